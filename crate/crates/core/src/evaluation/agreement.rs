use std::collections::HashMap;
use std::hash::Hash;

use crate::clustering::ClusterAssignment;
use crate::corpus::RegionCatalog;

fn choose2(k: u64) -> f64 {
    (k as f64) * (k.saturating_sub(1) as f64) / 2.0
}

/// Adjusted Rand index between two labelings of the same items, computed from
/// their contingency table with the expected-index correction.
///
/// When the correction leaves no room (both partitions trivial in the same
/// way) the partitions coincide and the index is 1.
pub fn adjusted_rand_index<A: Eq + Hash, B: Eq + Hash>(a: &[A], b: &[B]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len() as u64;
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| choose2(c)).sum();
    let pairs = choose2(n);
    if pairs == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / pairs;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Fraction of regions whose cluster's most common province is their own.
pub fn purity<A: Eq + Hash, B: Eq + Hash>(clusters: &[A], classes: &[B]) -> f64 {
    if clusters.is_empty() {
        return 1.0;
    }
    let mut table: HashMap<&A, HashMap<&B, usize>> = HashMap::new();
    for (c, p) in clusters.iter().zip(classes) {
        *table.entry(c).or_default().entry(p).or_default() += 1;
    }
    let hits: usize = table
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    hits as f64 / clusters.len() as f64
}

/// Purity and adjusted Rand index of the clustering against provinces.
/// Regions missing from the catalog count as their own province.
pub fn province_agreement(assignment: &ClusterAssignment, catalog: &RegionCatalog) -> (f64, f64) {
    let provinces: Vec<&str> = assignment
        .region_ids
        .iter()
        .map(|id| catalog.get(id).map_or(id.as_str(), |m| m.province_key()))
        .collect();
    (
        purity(&assignment.labels, &provinces),
        adjusted_rand_index(&assignment.labels, &provinces),
    )
}
