//! Two-stage activity selection: keep activities whose players concentrate
//! in a moderate number of regions, then drop activities that duplicate a
//! larger one by Pearson correlation over regions.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::corpus::CountMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionConfig {
    pub top_small_k: usize,
    pub top_large_k: usize,
    /// The top-large share must be strictly above this.
    pub large_share_min: f64,
    /// The top-small share must be strictly below this.
    pub small_share_max: f64,
    /// Activities are deduplicated when r is strictly above this.
    pub corr_threshold: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            top_small_k: 5,
            top_large_k: 20,
            large_share_min: 0.50,
            small_share_max: 0.70,
            corr_threshold: 0.8,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_small_k == 0 || self.top_small_k > self.top_large_k {
            return Err(Error::InvalidArgument(format!(
                "need 0 < top_small_k <= top_large_k, got {} and {}",
                self.top_small_k, self.top_large_k
            )));
        }
        for (name, v) in [
            ("large_share_min", self.large_share_min),
            ("small_share_max", self.small_share_max),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!("{name} {v} outside [0, 1]")));
            }
        }
        if !(-1.0..=1.0).contains(&self.corr_threshold) {
            return Err(Error::InvalidArgument(format!(
                "corr_threshold {} outside [-1, 1]",
                self.corr_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Regional,
    ExcludedDiffuse,
    ExcludedConcentrated,
    ExcludedEmpty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityProfile {
    pub activity_id: String,
    pub national_total: u64,
    pub top_small_share: Option<f64>,
    pub top_large_share: Option<f64>,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedPair {
    pub dropped: String,
    pub kept: String,
    #[serde(serialize_with = "six_decimals")]
    pub r: f64,
}

fn six_decimals<S: Serializer>(r: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format!("{r:.6}")).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub kept: Vec<String>,
    pub profiles: Vec<ActivityProfile>,
    pub dropped_correlated: Vec<DroppedPair>,
}

impl SelectionReport {
    pub fn count(&self, class: Classification) -> usize {
        self.profiles
            .iter()
            .filter(|p| p.classification == class)
            .count()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("selection report serializes");
        s.push('\n');
        s
    }
}

/// Share of all players held by the `k` largest entries. `None` when there
/// are no players at all.
pub fn top_share(counts: &[u64], k: usize) -> Result<Option<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("top_share needs k >= 1".into()));
    }
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return Ok(None);
    }
    if k >= counts.len() {
        return Ok(Some(1.0));
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let top: u128 = sorted[..k].iter().map(|&c| c as u128).sum();
    Ok(Some(top as f64 / total as f64))
}

pub fn classify_activity(
    top_small_share: Option<f64>,
    top_large_share: Option<f64>,
    cfg: &SelectionConfig,
) -> Classification {
    let (Some(small), Some(large)) = (top_small_share, top_large_share) else {
        return Classification::ExcludedEmpty;
    };
    if small >= cfg.small_share_max {
        Classification::ExcludedConcentrated
    } else if large <= cfg.large_share_min {
        Classification::ExcludedDiffuse
    } else {
        Classification::Regional
    }
}

/// Sample Pearson correlation. `None` when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson over sequences of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument(
            "pearson needs at least two observations".into(),
        ));
    }
    // Single-pass co-moment accumulation.
    let (mut mx, mut my) = (0.0, 0.0);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (i, (&xi, &yi)) in x.iter().zip(y).enumerate() {
        let n = (i + 1) as f64;
        let dx = xi - mx;
        let dy = yi - my;
        mx += dx / n;
        my += dy / n;
        sxx += dx * (xi - mx);
        syy += dy * (yi - my);
        sxy += dx * (yi - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)))
}

/// Classifies and deduplicates every activity of `matrix`.
pub fn select_activities(matrix: &CountMatrix, cfg: &SelectionConfig) -> Result<SelectionReport> {
    select_activities_with_basis(matrix, matrix, cfg)
}

/// Like [`select_activities`], but concentration shares come from
/// `share_matrix` while correlations use `corr_matrix`. Both must list the
/// same activities in the same order.
pub fn select_activities_with_basis(
    share_matrix: &CountMatrix,
    corr_matrix: &CountMatrix,
    cfg: &SelectionConfig,
) -> Result<SelectionReport> {
    cfg.validate()?;
    if share_matrix.activities() != corr_matrix.activities() {
        return Err(Error::InvalidArgument(
            "share and correlation matrices list different activities".into(),
        ));
    }

    let mut profiles = Vec::with_capacity(share_matrix.n_activities());
    for (a, id) in share_matrix.activities().iter().enumerate() {
        let column = share_matrix.column(a);
        let small = top_share(&column, cfg.top_small_k)?;
        let large = top_share(&column, cfg.top_large_k)?;
        profiles.push(ActivityProfile {
            activity_id: id.clone(),
            national_total: column.iter().sum(),
            top_small_share: small,
            top_large_share: large,
            classification: classify_activity(small, large, cfg),
        });
    }

    let mut candidates: Vec<usize> = (0..profiles.len())
        .filter(|&a| profiles[a].classification == Classification::Regional)
        .collect();
    candidates.sort_by(|&a, &b| {
        profiles[b]
            .national_total
            .cmp(&profiles[a].national_total)
            .then_with(|| profiles[a].activity_id.cmp(&profiles[b].activity_id))
    });

    let series = |a: usize| -> Vec<f64> {
        corr_matrix.column(a).into_iter().map(|c| c as f64).collect()
    };
    let mut kept: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut dropped_correlated = Vec::new();
    for a in candidates {
        let xs = series(a);
        let mut blocker = None;
        if xs.len() >= 2 {
            for (k, ks) in &kept {
                if let Some(r) = pearson(&xs, ks)? {
                    if r > cfg.corr_threshold {
                        blocker = Some((*k, r));
                        break;
                    }
                }
            }
        }
        match blocker {
            Some((k, r)) => dropped_correlated.push(DroppedPair {
                dropped: profiles[a].activity_id.clone(),
                kept: profiles[k].activity_id.clone(),
                r,
            }),
            None => kept.push((a, xs)),
        }
    }

    Ok(SelectionReport {
        kept: kept
            .iter()
            .map(|(a, _)| profiles[*a].activity_id.clone())
            .collect(),
        profiles,
        dropped_correlated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn definitional_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
        let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        cov / (sx * sy)
    }

    fn matrix(columns: &[&[u64]]) -> CountMatrix {
        let na = columns.len();
        let nr = columns[0].len();
        let mut counts = vec![0; nr * na];
        for (a, col) in columns.iter().enumerate() {
            for (r, &c) in col.iter().enumerate() {
                counts[r * na + a] = c;
            }
        }
        let totals = (0..nr)
            .map(|r| counts[r * na..(r + 1) * na].iter().sum())
            .collect();
        CountMatrix::new(
            (0..nr).map(|r| format!("r{r:02}")).collect(),
            (0..na).map(|a| format!("act{a}")).collect(),
            counts,
            totals,
            true,
        )
        .unwrap()
    }

    #[test]
    fn top_share_cases() {
        let mut one_region = vec![0u64; 50];
        one_region[17] = 900;
        assert_eq!(top_share(&one_region, 5).unwrap(), Some(1.0));
        assert_eq!(top_share(&[7; 100], 20).unwrap(), Some(0.20));
        assert_eq!(
            top_share(&[10, 5, 3, 2, 1, 1], 2).unwrap(),
            Some(15.0 / 22.0)
        );
        assert_eq!(top_share(&[0, 0, 0], 2).unwrap(), None);
        assert_eq!(top_share(&[1, 2], 2).unwrap(), Some(1.0));
        assert!(top_share(&[1, 2], 0).is_err());
    }

    #[test]
    fn classify_published_rows() {
        let cfg = SelectionConfig::default();
        assert_eq!(
            classify_activity(Some(0.1876), Some(0.4316), &cfg),
            Classification::ExcludedDiffuse
        );
        assert_eq!(
            classify_activity(Some(0.4004), Some(0.6032), &cfg),
            Classification::Regional
        );
        assert_eq!(
            classify_activity(Some(0.9042), Some(0.9645), &cfg),
            Classification::ExcludedConcentrated
        );
        assert_eq!(classify_activity(None, None, &cfg), Classification::ExcludedEmpty);
    }

    #[test]
    fn classify_thresholds_are_strict() {
        let cfg = SelectionConfig::default();
        assert_eq!(
            classify_activity(Some(0.3), Some(0.5), &cfg),
            Classification::ExcludedDiffuse
        );
        assert_eq!(
            classify_activity(Some(0.7), Some(0.9), &cfg),
            Classification::ExcludedConcentrated
        );
        // both tests failing reports the top-small failure
        let odd = SelectionConfig {
            large_share_min: 0.95,
            ..cfg
        };
        assert_eq!(
            classify_activity(Some(0.8), Some(0.9), &odd),
            Classification::ExcludedConcentrated
        );
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 4.0, 2.0, 8.0];
        assert!((pearson(&x, &x).unwrap().unwrap() - 1.0).abs() < 1e-15);
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().unwrap();
        assert!((r + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), None);
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn pearson_matches_definition_on_random_pair() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x: Vec<f64> = (0..20).map(|_| rng.random_range(-50.0..50.0)).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..10.0)).collect();
            let r = pearson(&x, &y).unwrap().unwrap();
            assert!((r - definitional_pearson(&x, &y)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_columns_keep_larger() {
        let m = matrix(&[&[10, 20, 30, 40, 0, 0], &[8, 16, 24, 32, 0, 0]]);
        let cfg = SelectionConfig {
            top_small_k: 1,
            top_large_k: 3,
            ..Default::default()
        };
        let report = select_activities(&m, &cfg).unwrap();
        assert_eq!(report.kept, ["act0"]);
        assert_eq!(report.dropped_correlated.len(), 1);
        let d = &report.dropped_correlated[0];
        assert_eq!((d.dropped.as_str(), d.kept.as_str()), ("act1", "act0"));
        assert!((d.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn greedy_chain_keeps_a_and_c() {
        // r(A,B) ~ 0.90, r(B,C) ~ 0.90, r(A,C) ~ 0.70; totals A > B > C.
        let a: &[u64] = &[263, 436, 532, 178, 417, 424, 335, 296];
        let b: &[u64] = &[141, 388, 450, 165, 299, 428, 320, 288];
        let c: &[u64] = &[19, 298, 376, 197, 269, 368, 257, 295];
        let as_f = |v: &[u64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        let r = |x: &[u64], y: &[u64]| pearson(&as_f(x), &as_f(y)).unwrap().unwrap();
        assert!((r(a, b) - 0.8993).abs() < 1e-3);
        assert!((r(b, c) - 0.8999).abs() < 1e-3);
        assert!((r(a, c) - 0.6998).abs() < 1e-3);

        let cfg = SelectionConfig {
            top_small_k: 1,
            top_large_k: 4,
            ..Default::default()
        };
        let report = select_activities(&matrix(&[c, a, b]), &cfg).unwrap();
        assert_eq!(report.kept, ["act1", "act0"]);
        assert_eq!(report.dropped_correlated.len(), 1);
        assert_eq!(report.dropped_correlated[0].dropped, "act2");
        assert_eq!(report.dropped_correlated[0].kept, "act1");
    }

    #[test]
    fn negative_correlation_never_dedups() {
        let m = matrix(&[&[50, 40, 0, 0, 1], &[0, 1, 40, 50, 0]]);
        let cfg = SelectionConfig {
            top_small_k: 1,
            top_large_k: 2,
            corr_threshold: -0.5,
            ..Default::default()
        };
        let report = select_activities(&m, &cfg).unwrap();
        assert_eq!(report.kept.len(), 2);
    }

    #[test]
    fn json_prints_r_with_six_decimals() {
        let report = SelectionReport {
            kept: vec!["a".into()],
            profiles: vec![],
            dropped_correlated: vec![DroppedPair {
                dropped: "b".into(),
                kept: "a".into(),
                r: 0.9,
            }],
        };
        assert!(report.to_json().contains("\"r\": 0.900000"));
    }

    proptest! {
        #[test]
        fn top_share_permutation_and_scale_invariant(
            counts in prop::collection::vec(0u64..1000, 1..40),
            k in 1usize..10,
            scale in 1u64..50,
            rot in 0usize..40,
        ) {
            let base = top_share(&counts, k).unwrap();
            let mut rotated = counts.clone();
            let n = rotated.len();
            rotated.rotate_left(rot % n);
            rotated.reverse();
            prop_assert_eq!(top_share(&rotated, k).unwrap(), base);
            let scaled: Vec<u64> = counts.iter().map(|c| c * scale).collect();
            match (top_share(&scaled, k).unwrap(), base) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (a, b) => prop_assert_eq!(a, b),
            }
        }

        #[test]
        fn top_small_at_most_top_large(counts in prop::collection::vec(0u64..1000, 1..40)) {
            if let (Some(s), Some(l)) = (top_share(&counts, 5).unwrap(), top_share(&counts, 20).unwrap()) {
                prop_assert!(0.0 <= s && s <= l && l <= 1.0);
            }
        }

        #[test]
        fn classification_monotone(small in 0.0f64..1.0, large in 0.0f64..1.0, bump in 0.0f64..0.5) {
            let cfg = SelectionConfig::default();
            let base = classify_activity(Some(small), Some(large), &cfg);
            if base == Classification::Regional {
                let up = classify_activity(Some(small), Some((large + bump).min(1.0)), &cfg);
                prop_assert_ne!(up, Classification::ExcludedDiffuse);
                let down = classify_activity(Some((small - bump).max(0.0)), Some(large), &cfg);
                prop_assert_ne!(down, Classification::ExcludedConcentrated);
            }
        }

        #[test]
        fn pearson_symmetric_and_affine_invariant(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            a in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
            b in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            if let Some(r) = pearson(&x, &y).unwrap() {
                let ry = pearson(&y, &x).unwrap().unwrap();
                prop_assert!((r - ry).abs() < 1e-12);
                let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
                let ra = pearson(&ax, &y).unwrap().unwrap();
                prop_assert!((ra - a.signum() * r).abs() < 1e-9);
            }
        }

        #[test]
        fn dedup_invariants(columns in prop::collection::vec(prop::collection::vec(0u64..50, 12), 1..8)) {
            let refs: Vec<&[u64]> = columns.iter().map(|c| c.as_slice()).collect();
            let m = matrix(&refs);
            let cfg = SelectionConfig { top_small_k: 2, top_large_k: 6, corr_threshold: 0.5, ..Default::default() };
            let report = select_activities(&m, &cfg).unwrap();
            let again = select_activities(&m, &cfg).unwrap();
            prop_assert_eq!(report.to_json(), again.to_json());
            for d in &report.dropped_correlated {
                prop_assert!(d.r > cfg.corr_threshold);
            }
            let col = |id: &str| -> Vec<f64> {
                m.column(m.activity_index(id).unwrap()).into_iter().map(|c| c as f64).collect()
            };
            for (i, a) in report.kept.iter().enumerate() {
                let p = report.profiles.iter().find(|p| &p.activity_id == a).unwrap();
                prop_assert_eq!(p.classification, Classification::Regional);
                for b in &report.kept[i + 1..] {
                    if let Some(r) = pearson(&col(a), &col(b)).unwrap() {
                        prop_assert!(r <= cfg.corr_threshold);
                    }
                }
            }
        }
    }
}
