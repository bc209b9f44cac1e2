//! Independent reference implementations and fixtures shared by the
//! integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::Rng;
use regiocluster::clustering::{Dendrogram, DistanceMatrix, Merge};

/// Phi from the textbook observed-versus-expected sum over the 2 × m table.
pub fn phi_contingency(x: &[f64], y: &[f64]) -> f64 {
    let rows = [x, y];
    let row_sums: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let n: f64 = row_sums.iter().sum();
    let mut chi2 = 0.0;
    for j in 0..x.len() {
        let col = x[j] + y[j];
        for (i, row) in rows.iter().enumerate() {
            let expected = row_sums[i] * col / n;
            if expected > 0.0 {
                chi2 += (row[j] - expected).powi(2) / expected;
            }
        }
    }
    (chi2 / n).sqrt()
}

/// Rand-index pieces by looking at every pair of items.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b, mut pairs) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            pairs += 1.0;
            in_a += f64::from(u8::from(sa));
            in_b += f64::from(u8::from(sb));
            both += f64::from(u8::from(sa && sb));
        }
    }
    if pairs == 0.0 {
        return 1.0;
    }
    let expected = in_a * in_b / pairs;
    let max = (in_a + in_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (both - expected) / (max - expected)
}

/// Every set partition of `n` items as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(cur: &mut Vec<usize>, n: usize, next: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=next {
            cur.push(b);
            grow(cur, n, next.max(b + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, 0, &mut out);
    out
}

pub type Step = (BTreeSet<usize>, BTreeSet<usize>, f64);

/// Average linkage that recomputes every cluster pair's mean leaf distance
/// from scratch at each step. Ties go to the pair with the smallest
/// minimum leaf indices.
pub fn naive_upgma(d: &[Vec<f64>]) -> Vec<Step> {
    let mut clusters: Vec<BTreeSet<usize>> = (0..d.len()).map(|i| BTreeSet::from([i])).collect();
    let mut steps = Vec::new();
    while clusters.len() > 1 {
        clusters.sort_by_key(|c| *c.first().unwrap());
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        sum += d[i][j];
                    }
                }
                let avg = sum / (clusters[a].len() * clusters[b].len()) as f64;
                if avg < best.2 {
                    best = (a, b, avg);
                }
            }
        }
        let right = clusters.remove(best.1);
        let left = clusters.remove(best.0);
        steps.push((left.clone(), right.clone(), best.2));
        clusters.push(left.union(&right).copied().collect());
    }
    steps
}

/// Leaf sets of each merge in a dendrogram, in merge order.
pub fn dendrogram_steps(tree: &Dendrogram) -> Vec<Step> {
    let n = tree.n_leaves();
    let mut sets: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
    let mut steps = Vec::new();
    for m in tree.merges() {
        let (l, r) = (sets[m.left].clone(), sets[m.right].clone());
        sets.push(l.union(&r).copied().collect());
        steps.push((l, r, m.height));
    }
    steps
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("r{i:02}")).collect()
}

pub fn random_distances(rng: &mut impl Rng, n: usize) -> (Vec<Vec<f64>>, DistanceMatrix) {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.01..1.0);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let flat = d.iter().flatten().copied().collect();
    (d, DistanceMatrix::new(labels(n), flat).unwrap())
}

/// A dendrogram built from random merge choices and increasing heights.
pub fn random_dendrogram(rng: &mut impl Rng, n: usize) -> Dendrogram {
    let mut roots: Vec<(usize, usize)> = (0..n).map(|i| (i, 1)).collect();
    let mut merges = Vec::new();
    let mut height = 0.0;
    for t in 0..n - 1 {
        let a = roots.swap_remove(rng.random_range(0..roots.len()));
        let b = roots.swap_remove(rng.random_range(0..roots.len()));
        height += rng.random_range(0.0..1.0);
        merges.push(Merge {
            left: a.0.min(b.0),
            right: a.0.max(b.0),
            height,
            size: a.1 + b.1,
        });
        roots.push((n + t, a.1 + b.1));
    }
    Dendrogram::new(labels(n), merges).unwrap()
}

/// Top 20 cities (city, province, players, population, printed percent).
pub const TOP20: &[(&str, &str, u64, u64, f64)] = &[
    ("Beijing", "", 235_185, 19_612_368, 1.20),
    ("Shanghai", "", 205_568, 23_019_148, 0.89),
    ("Shenzhen", "Guangdong", 169_112, 10_357_938, 1.63),
    ("Chongqing", "", 134_675, 28_846_170, 0.47),
    ("Taiyuan", "Shanxi", 127_579, 4_201_591, 3.04),
    ("Guangzhou", "Guangdong", 123_010, 12_700_800, 0.97),
    ("Xi'an", "Shaanxi", 120_222, 8_467_837, 1.42),
    ("Hangzhou", "Zhejiang", 111_637, 8_700_400, 1.28),
    ("Chengdu", "Sichuan", 107_915, 14_047_625, 0.77),
    ("Tianjin", "", 100_430, 12_938_224, 0.78),
    ("Suzhou", "Jiangsu", 88_091, 10_465_994, 0.84),
    ("Wuhan", "Hubei", 85_028, 9_785_392, 0.87),
    ("Dongguan", "Guangdong", 74_208, 8_220_237, 0.90),
    ("Ningbo", "Zhejiang", 70_878, 7_605_689, 0.93),
    ("Fuzhou", "Fujian", 70_068, 7_115_370, 0.98),
    ("Quanzhou", "Fujian", 68_601, 8_128_530, 0.84),
    ("Zhengzhou", "Henan", 67_710, 8_626_505, 0.78),
    ("Jilin City", "Jilin", 64_847, 4_414_681, 1.47),
    ("Fuyang", "Anhui", 63_157, 7_599_918, 0.83),
    ("Shijiazhuang", "Hebei", 62_064, 10_163_788, 0.61),
];

/// Nationwide player count in the same snapshot.
pub const NATIONAL_PLAYERS: u64 = 6_536_549;

/// Regions sharing the players outside the top 20, each smaller than rank 20.
pub const REST_REGIONS: u64 = 75;

/// Writes the top-20 table as a corpus with one activity, plus
/// [`REST_REGIONS`] regions holding every remaining player so the national
/// total matches. Returns the config path.
pub fn write_top20_corpus(dir: &Path) -> std::path::PathBuf {
    let mut regions = String::from("region_id,name,province,lat,lon,population,included\n");
    let mut counts = String::from("region_id,activity_id,count\n");
    let mut totals = String::from("region_id,total_players\n");
    for (i, (city, province, players, population, _)) in TOP20.iter().enumerate() {
        let name = if city.contains(['\'', ' ']) {
            format!("\"{city}\"")
        } else {
            city.to_string()
        };
        regions.push_str(&format!("c{:02},{name},{province},,,{population},true\n", i + 1));
        counts.push_str(&format!("c{:02},all,{players}\n", i + 1));
        totals.push_str(&format!("c{:02},{players}\n", i + 1));
    }
    let top: u64 = TOP20.iter().map(|r| r.2).sum();
    let rest = NATIONAL_PLAYERS - top;
    for i in 0..REST_REGIONS {
        let players = rest / REST_REGIONS + u64::from(i < rest % REST_REGIONS);
        regions.push_str(&format!("x{i:02},Other {i:02},,,,,true\n"));
        counts.push_str(&format!("x{i:02},all,{players}\n"));
        totals.push_str(&format!("x{i:02},{players}\n"));
    }
    fs::write(dir.join("regions.csv"), regions).unwrap();
    fs::write(dir.join("activities.csv"), "activity_id,name\nall,All games\n").unwrap();
    fs::write(dir.join("counts.csv"), counts).unwrap();
    fs::write(dir.join("totals.csv"), totals).unwrap();
    let conf = dir.join("pipeline.conf");
    fs::write(
        &conf,
        "regions = regions.csv\nactivities = activities.csv\ncounts = counts.csv\ntotals = totals.csv\ncomplete = true\n",
    )
    .unwrap();
    conf
}
