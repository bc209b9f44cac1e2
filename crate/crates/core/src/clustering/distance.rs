use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::ProfileMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// sqrt(X² / N) of the 2 × m table formed by the two rows.
    #[default]
    PhiSquare,
    /// sqrt(X²); not invariant under joint scaling.
    ChiSquare,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::PhiSquare => "phi_square",
            Measure::ChiSquare => "chi_square",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi_square" => Ok(Measure::PhiSquare),
            "chi_square" => Ok(Measure::ChiSquare),
            other => Err(Error::InvalidArgument(format!(
                "unknown measure {other:?} (expected phi_square or chi_square)"
            ))),
        }
    }
}

/// Returns (X², N) for the 2 × m table with rows `x` and `y`.
///
/// With row sums Rx, Ry and row proportions p = x/Rx, q = y/Ry the statistic
/// reduces to Rx·Ry·Σ (p_j − q_j)² / C_j, which avoids the cancellation of
/// the textbook observed-minus-expected sum when the rows are close. Columns
/// with C_j = 0 contribute nothing; so does a row whose total is zero, since
/// all of its expected cells vanish.
fn chi_square_statistic(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "rows of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument(
            "contingency rows must be finite and non-negative".into(),
        ));
    }
    let rx: f64 = x.iter().sum();
    let ry: f64 = y.iter().sum();
    let n = rx + ry;
    if n == 0.0 {
        return Err(Error::UndefinedDistance);
    }
    if rx == 0.0 || ry == 0.0 {
        return Ok((0.0, n));
    }
    let mut acc = 0.0;
    for (&xj, &yj) in x.iter().zip(y) {
        let c = xj + yj;
        if c > 0.0 {
            let diff = xj / rx - yj / ry;
            acc += diff * diff / c;
        }
    }
    Ok((rx * ry * acc, n))
}

pub fn phi_square_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    let (chi2, n) = chi_square_statistic(x, y)?;
    Ok((chi2 / n).sqrt())
}

pub fn chi_square_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    let (chi2, _) = chi_square_statistic(x, y)?;
    Ok(chi2.sqrt())
}

pub fn contingency_distance(x: &[f64], y: &[f64], measure: Measure) -> Result<f64> {
    match measure {
        Measure::PhiSquare => phi_square_distance(x, y),
        Measure::ChiSquare => chi_square_distance(x, y),
    }
}

/// Symmetric, zero-diagonal pairwise distances stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    entries: Vec<f64>,
    measure: Option<Measure>,
}

impl DistanceMatrix {
    /// Builds a matrix from a row-major `n × n` table.
    pub fn new(labels: Vec<String>, entries: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if entries.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "{} entries for {n} labels",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "distance ({i}, {j}) = {a} is not finite and non-negative"
                    )));
                }
                if a != b {
                    return Err(Error::InvalidArgument(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            labels,
            entries,
            measure: None,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn measure(&self) -> Option<Measure> {
        self.measure
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.labels.len() + j]
    }

    pub(crate) fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// CSV dump with a region_id header row and column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("region_id");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.n() {
                out.push(',');
                out.push_str(&super::format_sig9(self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// All pairwise distances between profile rows.
pub fn distance_matrix(profiles: &ProfileMatrix, measure: Measure) -> Result<DistanceMatrix> {
    let n = profiles.n_regions();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "distance matrix needs at least two regions, got {n}"
        )));
    }
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| contingency_distance(profiles.row(i), profiles.row(j), measure))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &d) in row.iter().enumerate() {
            let j = i + 1 + offset;
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        labels: profiles.regions().to_vec(),
        entries,
        measure: Some(measure),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_cases() {
        assert!((phi_square_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((phi_square_distance(&[2.0, 0.0], &[0.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(phi_square_distance(&[0.2, 0.1, 0.0], &[0.2, 0.1, 0.0]).unwrap(), 0.0);
        assert!((chi_square_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_rows() {
        assert!(matches!(
            phi_square_distance(&[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::UndefinedDistance)
        ));
        assert_eq!(phi_square_distance(&[0.0, 0.0], &[0.3, 0.1]).unwrap(), 0.0);
        assert!(phi_square_distance(&[1.0], &[1.0, 2.0]).is_err());
        assert!(phi_square_distance(&[-1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn measure_round_trips_through_text() {
        for m in [Measure::PhiSquare, Measure::ChiSquare] {
            assert_eq!(m.to_string().parse::<Measure>().unwrap(), m);
        }
        assert!("ward".parse::<Measure>().is_err());
    }

    #[test]
    fn matrix_constructor_checks_shape() {
        assert!(DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, f64::NAN, f64::NAN, 0.0]).is_err());
        assert!(DistanceMatrix::new(vec!["a".into(), "b".into()], vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }

    fn row_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..20).prop_flat_map(|m| {
            (
                prop::collection::vec(0.0f64..1.0, m),
                prop::collection::vec(0.0f64..1.0, m),
            )
        })
    }

    proptest! {
        #[test]
        fn metric_like_properties((x, y) in row_pair(), c in 0.01f64..100.0, rot in 0usize..20) {
            let d = phi_square_distance(&x, &y).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!((d - phi_square_distance(&y, &x).unwrap()).abs() < 1e-14);
            prop_assert!(phi_square_distance(&x, &x).unwrap() < 1e-12);

            let (mut px, mut py) = (x.clone(), y.clone());
            let k = rot % px.len();
            px.rotate_left(k);
            py.rotate_left(k);
            prop_assert!((phi_square_distance(&px, &py).unwrap() - d).abs() < 1e-12);

            let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
            let cy: Vec<f64> = y.iter().map(|v| v * c).collect();
            prop_assert!((phi_square_distance(&cx, &cy).unwrap() - d).abs() < 1e-10);
        }
    }
}
