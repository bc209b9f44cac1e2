//! Numbers for the two geographic claims about a clustering: that clusters
//! are spatially contiguous, and that they follow province boundaries.
//! Also hosts the planted-partition generator used to validate the pipeline.

mod agreement;
mod coherence;
mod synth;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::clustering::ClusterAssignment;
use crate::corpus::RegionCatalog;
use crate::error::Result;

pub use agreement::{adjusted_rand_index, province_agreement, purity};
pub use coherence::{
    coherence_baseline, haversine_km, neighbor_coherence, NeighborIndex, EARTH_RADIUS_KM,
};
pub use synth::{generate_synthetic, SyntheticCorpus, SyntheticSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalConfig {
    pub neighbors: usize,
    pub shuffles: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            neighbors: 5,
            shuffles: 1000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub size: usize,
    pub dominant_province: String,
    pub dominant_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub regions: usize,
    pub k: usize,
    pub province_purity: f64,
    pub adjusted_rand_vs_provinces: f64,
    pub neighbors: usize,
    /// `None` when too few regions have coordinates.
    pub neighbor_coherence: Option<f64>,
    pub coherence_baseline_mean: Option<f64>,
    pub coherence_baseline_std: Option<f64>,
    pub shuffles: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_rand_vs_ground_truth: Option<f64>,
    pub per_cluster: Vec<ClusterSummary>,
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("evaluation report serializes");
        s.push('\n');
        s
    }

    /// How many baseline standard deviations the observed coherence sits
    /// above the permutation mean.
    pub fn coherence_z(&self) -> Option<f64> {
        let (c, m, s) = (
            self.neighbor_coherence?,
            self.coherence_baseline_mean?,
            self.coherence_baseline_std?,
        );
        (s > 0.0).then(|| (c - m) / s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "regions: {}  clusters: {}", self.regions, self.k);
        let _ = writeln!(out, "province purity: {:.4}", self.province_purity);
        let _ = writeln!(out, "ARI vs provinces: {:.4}", self.adjusted_rand_vs_provinces);
        if let Some(ari) = self.adjusted_rand_vs_ground_truth {
            let _ = writeln!(out, "ARI vs ground truth: {ari:.4}");
        }
        match (
            self.neighbor_coherence,
            self.coherence_baseline_mean,
            self.coherence_baseline_std,
        ) {
            (Some(c), Some(m), Some(s)) => {
                let _ = writeln!(
                    out,
                    "neighbour coherence (m={}): {c:.4}  baseline {m:.4} ± {s:.4} over {} shuffles",
                    self.neighbors, self.shuffles
                );
            }
            _ => {
                let _ = writeln!(out, "neighbour coherence: n/a");
            }
        }
        for c in &self.per_cluster {
            let _ = writeln!(
                out,
                "  cluster {:>3}: {:>4} regions, {} {:.1}%",
                c.cluster,
                c.size,
                c.dominant_province,
                100.0 * c.dominant_share
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

fn per_cluster(assignment: &ClusterAssignment, catalog: &RegionCatalog) -> Vec<ClusterSummary> {
    assignment
        .members()
        .into_iter()
        .enumerate()
        .map(|(i, members)| {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for &m in &members {
                let id = &assignment.region_ids[m];
                let key = catalog.get(id).map_or(id.as_str(), |r| r.province_key());
                *counts.entry(key).or_default() += 1;
            }
            // first maximum in name order
            let (province, n) = counts
                .iter()
                .fold(("", 0), |best, (&p, &c)| if c > best.1 { (p, c) } else { best });
            ClusterSummary {
                cluster: i + 1,
                size: members.len(),
                dominant_province: province.to_string(),
                dominant_share: if members.is_empty() {
                    0.0
                } else {
                    n as f64 / members.len() as f64
                },
            }
        })
        .collect()
}

/// Scores `assignment` against provinces, spatial neighbourhoods and, when
/// given, a known partition (matched by region_id).
pub fn evaluate(
    assignment: &ClusterAssignment,
    catalog: &RegionCatalog,
    cfg: &EvalConfig,
    ground_truth: Option<&ClusterAssignment>,
) -> Result<EvaluationReport> {
    let (purity, ari) = province_agreement(assignment, catalog);
    let mut warnings = Vec::new();

    let (coherence, mean, std) = match NeighborIndex::build(assignment, catalog, cfg.neighbors) {
        Ok(index) => {
            if !index.excluded.is_empty() {
                warnings.push(format!(
                    "{} regions without coordinates left out of neighbour coherence: {}",
                    index.excluded.len(),
                    index.excluded.join(", ")
                ));
            }
            let labels = index.member_labels(assignment);
            let (m, s) = index.baseline(&labels, cfg.shuffles, cfg.seed)?;
            (Some(index.coherence(&labels)), Some(m), Some(s))
        }
        Err(e) => {
            warnings.push(format!("neighbour coherence skipped: {e}"));
            (None, None, None)
        }
    };

    let truth_ari = ground_truth.map(|truth| {
        let (mut ours, mut theirs) = (Vec::new(), Vec::new());
        for (id, &label) in assignment.region_ids.iter().zip(&assignment.labels) {
            if let Some(t) = truth.label_of(id) {
                ours.push(label);
                theirs.push(t);
            }
        }
        adjusted_rand_index(&ours, &theirs)
    });

    Ok(EvaluationReport {
        regions: assignment.region_ids.len(),
        k: assignment.k,
        province_purity: purity,
        adjusted_rand_vs_provinces: ari,
        neighbors: cfg.neighbors,
        neighbor_coherence: coherence,
        coherence_baseline_mean: mean,
        coherence_baseline_std: std,
        shuffles: cfg.shuffles,
        seed: cfg.seed,
        adjusted_rand_vs_ground_truth: truth_ari,
        per_cluster: per_cluster(assignment, catalog),
        warnings,
    })
}
