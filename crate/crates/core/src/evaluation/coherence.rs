use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clustering::ClusterAssignment;
use crate::corpus::RegionCatalog;
use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Great-circle distance in kilometres between two (lat, lon) points given
/// in degrees.
pub fn haversine_km((lat1, lon1): (f64, f64), (lat2, lon2): (f64, f64)) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// The `m` nearest regions of every located region in an assignment.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    /// Positions into the assignment of the regions that have coordinates.
    members: Vec<usize>,
    /// `neighbors[i]` indexes into `members`.
    neighbors: Vec<Vec<usize>>,
    /// Regions left out for lack of coordinates.
    pub excluded: Vec<String>,
}

impl NeighborIndex {
    pub fn build(assignment: &ClusterAssignment, catalog: &RegionCatalog, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("neighbour count must be at least 1".into()));
        }
        let mut members = Vec::new();
        let mut coords = Vec::new();
        let mut excluded = Vec::new();
        for (i, id) in assignment.region_ids.iter().enumerate() {
            match catalog.get(id).and_then(|r| r.coordinates()) {
                Some(c) => {
                    members.push(i);
                    coords.push(c);
                }
                None => excluded.push(id.clone()),
            }
        }
        if members.len() < m + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} located regions cannot supply {m} neighbours each",
                members.len()
            )));
        }
        let ids: Vec<&str> = members
            .iter()
            .map(|&i| assignment.region_ids[i].as_str())
            .collect();
        let neighbors = (0..members.len())
            .into_par_iter()
            .map(|a| {
                let mut others: Vec<(f64, usize)> = (0..members.len())
                    .filter(|&b| b != a)
                    .map(|b| (haversine_km(coords[a], coords[b]), b))
                    .collect();
                others.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| ids[x.1].cmp(ids[y.1])));
                others.truncate(m);
                others.into_iter().map(|(_, b)| b).collect()
            })
            .collect();
        Ok(Self {
            members,
            neighbors,
            excluded,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Labels of the located regions, in index order.
    pub fn member_labels(&self, assignment: &ClusterAssignment) -> Vec<usize> {
        self.members.iter().map(|&i| assignment.labels[i]).collect()
    }

    /// Fraction of (region, neighbour) pairs that share a label. `labels`
    /// is indexed like [`member_labels`](Self::member_labels).
    pub fn coherence(&self, labels: &[usize]) -> f64 {
        let mut same = 0usize;
        let mut total = 0usize;
        for (a, ns) in self.neighbors.iter().enumerate() {
            for &b in ns {
                total += 1;
                same += usize::from(labels[a] == labels[b]);
            }
        }
        if total == 0 {
            0.0
        } else {
            same as f64 / total as f64
        }
    }

    /// Mean and sample standard deviation of coherence over `n_shuffles`
    /// uniform permutations of `labels`. Shuffle `i` draws from ChaCha8
    /// seeded with `seed + i`.
    pub fn baseline(&self, labels: &[usize], n_shuffles: usize, seed: u64) -> Result<(f64, f64)> {
        if n_shuffles < 2 {
            return Err(Error::InvalidArgument("baseline needs at least two shuffles".into()));
        }
        let values: Vec<f64> = (0..n_shuffles)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let mut shuffled = labels.to_vec();
                shuffled.shuffle(&mut rng);
                self.coherence(&shuffled)
            })
            .collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok((mean, var.sqrt()))
    }
}

/// Share of nearest-neighbour pairs that fall in the same cluster, together
/// with the regions skipped for missing coordinates.
pub fn neighbor_coherence(
    assignment: &ClusterAssignment,
    catalog: &RegionCatalog,
    m: usize,
) -> Result<(f64, Vec<String>)> {
    let index = NeighborIndex::build(assignment, catalog, m)?;
    let labels = index.member_labels(assignment);
    Ok((index.coherence(&labels), index.excluded))
}

pub fn coherence_baseline(
    assignment: &ClusterAssignment,
    catalog: &RegionCatalog,
    m: usize,
    n_shuffles: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let index = NeighborIndex::build(assignment, catalog, m)?;
    let labels = index.member_labels(assignment);
    index.baseline(&labels, n_shuffles, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RegionMeta;

    fn line_catalog(n: usize) -> RegionCatalog {
        RegionCatalog::new(
            (0..n)
                .map(|i| RegionMeta {
                    region_id: format!("r{i:02}"),
                    name: String::new(),
                    province: None,
                    latitude: Some(0.0),
                    longitude: Some(i as f64 * 0.1),
                    population: None,
                    included: true,
                })
                .collect(),
        )
        .unwrap()
    }

    fn assign(groups: &[usize]) -> ClusterAssignment {
        ClusterAssignment::from_groups(
            (0..groups.len()).map(|i| format!("r{i:02}")).collect(),
            groups,
        )
        .unwrap()
    }

    #[test]
    fn haversine_quarter_meridian() {
        let d = haversine_km((0.0, 0.0), (90.0, 0.0));
        assert!((d - EARTH_RADIUS_KM * std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert_eq!(haversine_km((30.0, 120.0), (30.0, 120.0)), 0.0);
    }

    #[test]
    fn single_cluster_is_fully_coherent() {
        let (c, excluded) = neighbor_coherence(&assign(&[0; 8]), &line_catalog(8), 3).unwrap();
        assert_eq!(c, 1.0);
        assert!(excluded.is_empty());
        let (mean, std) = coherence_baseline(&assign(&[0; 8]), &line_catalog(8), 3, 10, 1).unwrap();
        assert_eq!((mean, std), (1.0, 0.0));
    }

    #[test]
    fn alternating_line_has_no_coherence() {
        let groups: Vec<usize> = (0..8).map(|i| i % 2).collect();
        let (c, _) = neighbor_coherence(&assign(&groups), &line_catalog(8), 1).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn too_few_regions_or_shuffles() {
        assert!(neighbor_coherence(&assign(&[0, 1]), &line_catalog(2), 2).is_err());
        assert!(neighbor_coherence(&assign(&[0, 1]), &line_catalog(2), 0).is_err());
        assert!(coherence_baseline(&assign(&[0, 1, 1]), &line_catalog(3), 1, 1, 0).is_err());
    }

    #[test]
    fn missing_coordinates_are_excluded() {
        let mut entries = line_catalog(5).entries().to_vec();
        entries[2].latitude = None;
        let cat = RegionCatalog::new(entries).unwrap();
        let (_, excluded) = neighbor_coherence(&assign(&[0, 0, 1, 1, 1]), &cat, 1).unwrap();
        assert_eq!(excluded, ["r02"]);
    }

    #[test]
    fn baseline_matches_permutation_expectation() {
        let n = 200;
        let groups: Vec<usize> = (0..n).map(|i| i * 2 / n).collect();
        let a = assign(&groups);
        let cat = line_catalog(n);
        let (mean, std) = coherence_baseline(&a, &cat, 5, 1000, 9).unwrap();
        // P(two distinct items share a label) under a uniform permutation
        let half = (n / 2) as f64;
        let exact = 2.0 * half * (half - 1.0) / (n as f64 * (n as f64 - 1.0));
        assert!((mean - exact).abs() < 3.0 * std, "{mean} vs {exact} (std {std})");
        assert!((mean - 0.5).abs() < 0.02);
        let again = coherence_baseline(&a, &cat, 5, 1000, 9).unwrap();
        assert_eq!((mean, std), again);
    }

    #[test]
    fn invariant_under_relabel_and_translation() {
        let groups = [0, 0, 0, 1, 1, 2, 2, 2, 2, 1];
        let relabelled: Vec<usize> = groups.iter().map(|g| (g + 1) % 3).collect();
        let cat = line_catalog(10);
        let moved = RegionCatalog::new(
            cat.entries()
                .iter()
                .map(|r| RegionMeta {
                    latitude: Some(1.0),
                    longitude: r.longitude.map(|l| l + 5.0),
                    ..r.clone()
                })
                .collect(),
        )
        .unwrap();
        let (c, _) = neighbor_coherence(&assign(&groups), &cat, 2).unwrap();
        let (c2, _) = neighbor_coherence(&assign(&relabelled), &cat, 2).unwrap();
        let (c3, _) = neighbor_coherence(&assign(&groups), &moved, 2).unwrap();
        assert_eq!(c, c2);
        assert_eq!(c, c3);
    }
}
