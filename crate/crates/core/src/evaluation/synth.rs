//! Planted-partition corpora with known cluster membership.
//!
//! Regions sit on a jittered grid. Provinces are compact blocks obtained by
//! recursive bisection of the grid, and each planted cluster owns a run of
//! consecutive (hence neighbouring) provinces. Every cluster has its own
//! signature activities; a region spends `signature_strength` of its players
//! on its cluster's signatures and the rest on activities shared by all.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::clustering::ClusterAssignment;
use crate::config::KeyValues;
use crate::corpus::{
    ActivityCatalog, ActivityMeta, CountMatrix, Corpus, RegionCatalog, RegionMeta,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub n_regions: usize,
    pub n_provinces: usize,
    pub n_planted_clusters: usize,
    pub activities_per_cluster: usize,
    pub n_global_activities: usize,
    pub signature_strength: f64,
    /// Inclusive range of players per region.
    pub players_per_region: (u64, u64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_regions: 336,
            n_provinces: 30,
            n_planted_clusters: 17,
            activities_per_cluster: 3,
            n_global_activities: 10,
            signature_strength: 0.3,
            players_per_region: (5_000, 15_000),
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.n_planted_clusters == 0 {
            return fail("need at least one planted cluster".into());
        }
        if self.n_planted_clusters > self.n_provinces || self.n_provinces > self.n_regions {
            return fail(format!(
                "need clusters <= provinces <= regions, got {} / {} / {}",
                self.n_planted_clusters, self.n_provinces, self.n_regions
            ));
        }
        if !(self.signature_strength > 0.0 && self.signature_strength < 1.0) {
            return fail(format!(
                "signature_strength {} outside (0, 1)",
                self.signature_strength
            ));
        }
        if self.activities_per_cluster == 0 || self.n_global_activities == 0 {
            return fail("need at least one signature and one global activity".into());
        }
        let (lo, hi) = self.players_per_region;
        if lo == 0 || lo > hi {
            return fail(format!("players_per_region {lo}..={hi} is empty or zero"));
        }
        Ok(())
    }

    /// Reads `key = value` lines; unspecified keys keep their defaults.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        let mut spec = Self::default();
        kv.set_parsed("n_regions", &mut spec.n_regions)?;
        kv.set_parsed("n_provinces", &mut spec.n_provinces)?;
        kv.set_parsed("n_planted_clusters", &mut spec.n_planted_clusters)?;
        kv.set_parsed("activities_per_cluster", &mut spec.activities_per_cluster)?;
        kv.set_parsed("n_global_activities", &mut spec.n_global_activities)?;
        kv.set_parsed("signature_strength", &mut spec.signature_strength)?;
        kv.set_parsed("players_min", &mut spec.players_per_region.0)?;
        kv.set_parsed("players_max", &mut spec.players_per_region.1)?;
        kv.set_parsed("seed", &mut spec.seed)?;
        kv.reject_unknown(&[
            "n_regions",
            "n_provinces",
            "n_planted_clusters",
            "activities_per_cluster",
            "n_global_activities",
            "signature_strength",
            "players_min",
            "players_max",
            "seed",
        ])?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub ground_truth: ClusterAssignment,
}

/// Splits `cells` into `parts` spatially compact groups, returned in an
/// order where consecutive groups are adjacent.
fn bisect(cells: Vec<(usize, usize)>, parts: usize, out: &mut Vec<Vec<(usize, usize)>>) {
    if parts == 1 {
        out.push(cells);
        return;
    }
    let span = |cells: &[(usize, usize)], f: fn(&(usize, usize)) -> usize| {
        let lo = cells.iter().map(f).min().unwrap_or(0);
        let hi = cells.iter().map(f).max().unwrap_or(0);
        hi - lo
    };
    let mut cells = cells;
    if span(&cells, |c| c.1) >= span(&cells, |c| c.0) {
        cells.sort_by_key(|&(r, c)| (c, r));
    } else {
        cells.sort_by_key(|&(r, c)| (r, c));
    }
    let first = parts / 2;
    let cut = cells.len() * first / parts;
    let rest = cells.split_off(cut);
    bisect(cells, first, out);
    bisect(rest, parts - first, out);
}

/// Draws counts for `total` players spread over `weights` (summing to one).
fn multinomial(rng: &mut ChaCha8Rng, total: u64, weights: &[f64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(weights.len());
    let mut left = total;
    let mut mass = 1.0;
    for (i, &w) in weights.iter().enumerate() {
        if i + 1 == weights.len() {
            out.push(left);
            break;
        }
        let p = if mass > 0.0 { (w / mass).clamp(0.0, 1.0) } else { 0.0 };
        let x = if left == 0 || p == 0.0 {
            0
        } else {
            Binomial::new(left, p).expect("valid binomial").sample(rng)
        };
        out.push(x);
        left -= x;
        mass -= w;
    }
    out
}

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Generates a complete corpus and its planted partition. Deterministic for
/// a given spec; the generator is ChaCha8 seeded from `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_regions;

    let cols = ((n as f64 * 1.3).sqrt().ceil() as usize).max(1);
    let cells: Vec<(usize, usize)> = (0..n).map(|i| (i / cols, i % cols)).collect();
    let mut provinces = Vec::with_capacity(spec.n_provinces);
    bisect(cells, spec.n_provinces, &mut provinces);

    let width = n.to_string().len().max(3);
    let pwidth = spec.n_provinces.to_string().len().max(2);
    let cwidth = spec.n_planted_clusters.to_string().len().max(2);

    // region index = row-major cell index
    let mut province_of = vec![0usize; n];
    for (p, cells) in provinces.iter().enumerate() {
        for &(r, c) in cells {
            province_of[r * cols + c] = p;
        }
    }
    let cluster_of_province =
        |p: usize| p * spec.n_planted_clusters / spec.n_provinces;

    let mut activities = Vec::new();
    for c in 0..spec.n_planted_clusters {
        for s in 0..spec.activities_per_cluster {
            activities.push(ActivityMeta {
                activity_id: format!("c{:0cwidth$}_s{}", c + 1, s + 1),
                name: format!("Cluster {} signature {}", c + 1, s + 1),
            });
        }
    }
    for g in 0..spec.n_global_activities {
        activities.push(ActivityMeta {
            activity_id: format!("global_{:02}", g + 1),
            name: format!("Global activity {}", g + 1),
        });
    }
    let na = activities.len();
    let signature_weights: Vec<Vec<f64>> = (0..spec.n_planted_clusters)
        .map(|_| weights(&mut rng, spec.activities_per_cluster))
        .collect();
    let global_weights = weights(&mut rng, spec.n_global_activities);
    let global_offset = spec.n_planted_clusters * spec.activities_per_cluster;

    let (lo, hi) = spec.players_per_region;
    let mut regions = Vec::with_capacity(n);
    let mut counts = vec![0u64; n * na];
    let mut totals = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    for (i, &province) in province_of.iter().enumerate() {
        let (row, col) = (i / cols, i % cols);
        let cluster = cluster_of_province(province);
        let players = rng.random_range(lo..=hi);
        let on_signature = Binomial::new(players, spec.signature_strength)
            .expect("valid binomial")
            .sample(&mut rng);
        let sig = multinomial(&mut rng, on_signature, &signature_weights[cluster]);
        let glob = multinomial(&mut rng, players - on_signature, &global_weights);
        let base = i * na;
        for (s, x) in sig.into_iter().enumerate() {
            counts[base + cluster * spec.activities_per_cluster + s] = x;
        }
        for (g, x) in glob.into_iter().enumerate() {
            counts[base + global_offset + g] = x;
        }
        totals.push(players);
        truth.push(cluster);

        let lat = 20.0 + row as f64 + rng.random_range(-0.25..0.25);
        let lon = 95.0 + col as f64 + rng.random_range(-0.25..0.25);
        let population = players * rng.random_range(40..=160);
        regions.push(RegionMeta {
            region_id: format!("R{:0width$}", i + 1),
            name: format!("Region {:0width$}", i + 1),
            province: Some(format!("P{:0pwidth$}", province + 1)),
            latitude: Some(lat.clamp(-90.0, 90.0)),
            longitude: Some(lon.clamp(-180.0, 180.0)),
            population: Some(population),
            included: true,
        });
    }

    let region_ids: Vec<String> = regions.iter().map(|r| r.region_id.clone()).collect();
    let matrix = CountMatrix::new(
        region_ids.clone(),
        activities.iter().map(|a| a.activity_id.clone()).collect(),
        counts,
        totals,
        true,
    )?;
    let corpus = Corpus {
        matrix,
        regions: RegionCatalog::new(regions)?,
        activities: ActivityCatalog::new(activities)?,
    };
    corpus.validate()?;
    Ok(SyntheticCorpus {
        corpus,
        ground_truth: ClusterAssignment::from_groups(region_ids, &truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::purity;

    #[test]
    fn default_spec_shape() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let m = &s.corpus.matrix;
        assert_eq!(m.n_regions(), 336);
        assert_eq!(m.n_activities(), 17 * 3 + 10);
        assert_eq!(s.ground_truth.k, 17);
        for r in 0..m.n_regions() {
            assert_eq!(m.row(r).iter().sum::<u64>(), m.region_totals()[r]);
        }
        let provinces: std::collections::BTreeSet<_> = s
            .corpus
            .regions
            .entries()
            .iter()
            .map(|r| r.province.clone())
            .collect();
        assert_eq!(provinces.len(), 30);
    }

    #[test]
    fn planted_clusters_are_unions_of_provinces() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let provinces: Vec<&str> = s
            .corpus
            .regions
            .entries()
            .iter()
            .map(|r| r.province_key())
            .collect();
        // every province sits inside a single planted cluster
        assert_eq!(purity(&provinces, &s.ground_truth.labels), 1.0);
    }

    #[test]
    fn provinces_are_compact() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let mut by_province: std::collections::HashMap<_, Vec<(f64, f64)>> = Default::default();
        for r in s.corpus.regions.entries() {
            by_province
                .entry(r.province.clone())
                .or_default()
                .push(r.coordinates().unwrap());
        }
        for pts in by_province.values() {
            assert!((11..=12).contains(&pts.len()));
            let lat_span = pts.iter().map(|p| p.0).fold(f64::MIN, f64::max)
                - pts.iter().map(|p| p.0).fold(f64::MAX, f64::min);
            let lon_span = pts.iter().map(|p| p.1).fold(f64::MIN, f64::max)
                - pts.iter().map(|p| p.1).fold(f64::MAX, f64::min);
            assert!(lat_span < 6.0 && lon_span < 6.0, "{lat_span} x {lon_span}");
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let b = generate_synthetic(&SyntheticSpec::default()).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.ground_truth, b.ground_truth);
        let c = generate_synthetic(&SyntheticSpec {
            seed: 43,
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.corpus.matrix, c.corpus.matrix);
    }

    #[test]
    fn infeasible_specs_rejected() {
        let bad = [
            SyntheticSpec {
                n_planted_clusters: 31,
                ..Default::default()
            },
            SyntheticSpec {
                n_provinces: 400,
                ..Default::default()
            },
            SyntheticSpec {
                signature_strength: 1.0,
                ..Default::default()
            },
            SyntheticSpec {
                players_per_region: (10, 5),
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(generate_synthetic(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn multinomial_conserves_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = [0.2, 0.5, 0.3];
        for total in [0, 1, 17, 10_000] {
            assert_eq!(multinomial(&mut rng, total, &w).iter().sum::<u64>(), total);
        }
    }
}
