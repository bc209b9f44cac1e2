//! ingest → filter → select → profile → distance → agglomerate → cut →
//! evaluate.

use std::path::Path;

use crate::clustering::{
    build_profiles, cut, distance_matrix, export_newick, upgma, ClusterAssignment, Dendrogram,
    DistanceMatrix,
};
use crate::config::{PipelineConfig, ShareBasis};
use crate::corpus::{filter_regions, load_corpus, Corpus, FilterReport, LoadOptions, LoadReport};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvaluationReport};
use crate::selection::{select_activities_with_basis, SelectionReport};

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub filter: FilterReport,
    pub selection: SelectionReport,
    /// Regions dropped because their total player count is zero.
    pub zero_total_regions: Vec<String>,
    pub distances: DistanceMatrix,
    pub dendrogram: Dendrogram,
    pub assignment: ClusterAssignment,
    pub evaluation: EvaluationReport,
    pub newick: String,
}

pub fn load(cfg: &PipelineConfig) -> Result<(Corpus, LoadReport)> {
    load_corpus(
        &cfg.counts,
        &cfg.regions,
        &cfg.activities,
        &LoadOptions {
            totals_path: cfg.totals.clone(),
            complete: cfg.complete,
        },
    )
}

/// Reads a `region_id,cluster_id` file.
pub fn read_assignment(path: &Path) -> Result<ClusterAssignment> {
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Internal(format!("{file}: {other:?}")),
        })?;
    let mut ids = Vec::new();
    let mut groups = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            file: file.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let (Some(id), Some(label)) = (rec.get(0), rec.get(1)) else {
            return Err(Error::Parse {
                file,
                line,
                message: "expected region_id,cluster_id".into(),
            });
        };
        let label: usize = label.parse().map_err(|_| Error::Parse {
            file: file.clone(),
            line,
            message: format!("cluster_id {label:?} is not an integer"),
        })?;
        ids.push(id.to_string());
        groups.push(label);
    }
    ClusterAssignment::from_groups(ids, &groups)
}

/// Runs every stage after ingestion. Errors name the failing stage.
pub fn run(
    corpus: &Corpus,
    cfg: &PipelineConfig,
    ground_truth: Option<&ClusterAssignment>,
) -> Result<PipelineOutcome> {
    cfg.validate().map_err(Error::in_stage("config"))?;
    let (filtered, filter) = filter_regions(&corpus.matrix, &corpus.regions);

    let share_matrix = match cfg.share_basis {
        ShareBasis::Included => &filtered,
        ShareBasis::All => &corpus.matrix,
    };
    let selection = select_activities_with_basis(share_matrix, &filtered, &cfg.selection)
        .map_err(Error::in_stage("select"))?;

    let (profiles, zero_total_regions) =
        build_profiles(&filtered, &selection.kept).map_err(Error::in_stage("profile"))?;
    let distances = distance_matrix(&profiles, cfg.measure).map_err(Error::in_stage("distance"))?;
    let dendrogram = upgma(&distances).map_err(Error::in_stage("cluster"))?;
    if !dendrogram.is_monotone() {
        return Err(Error::in_stage("cluster")(Error::Internal(
            "average-linkage heights decreased".into(),
        )));
    }
    let assignment = cut(&dendrogram, cfg.k).map_err(Error::in_stage("cut"))?;
    let mut evaluation = evaluate(&assignment, &corpus.regions, &cfg.eval, ground_truth)
        .map_err(Error::in_stage("evaluate"))?;
    if !zero_total_regions.is_empty() {
        evaluation.warnings.insert(
            0,
            format!(
                "regions with zero players dropped before clustering: {}",
                zero_total_regions.join(", ")
            ),
        );
    }
    if let Some(w) = &filter.warning {
        evaluation.warnings.insert(0, w.clone());
    }
    let newick = export_newick(&dendrogram) + "\n";

    Ok(PipelineOutcome {
        filter,
        selection,
        zero_total_regions,
        distances,
        dendrogram,
        assignment,
        evaluation,
        newick,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{generate_synthetic, SyntheticSpec};

    #[test]
    fn recovers_default_planted_partition() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let mut cfg = PipelineConfig::for_dir(Path::new("."));
        cfg.eval.shuffles = 50;
        let out = run(&s.corpus, &cfg, Some(&s.ground_truth)).unwrap();
        assert_eq!(out.assignment.k, 17);
        assert_eq!(out.evaluation.adjusted_rand_vs_ground_truth, Some(1.0));
        assert_eq!(out.selection.kept.len(), 17);
    }

    #[test]
    fn k_one_gives_largest_province_share() {
        let s = generate_synthetic(&SyntheticSpec::default()).unwrap();
        let mut cfg = PipelineConfig::for_dir(Path::new("."));
        cfg.k = 1;
        cfg.eval.shuffles = 10;
        let out = run(&s.corpus, &cfg, None).unwrap();
        let largest = out.evaluation.per_cluster[0].dominant_share * 336.0;
        assert!((out.evaluation.province_purity - largest / 336.0).abs() < 1e-12);
        assert_eq!(out.evaluation.neighbor_coherence, Some(1.0));
    }

    #[test]
    fn k_above_region_count_fails_in_cut() {
        let s = generate_synthetic(&SyntheticSpec {
            n_regions: 20,
            n_provinces: 4,
            n_planted_clusters: 2,
            ..Default::default()
        })
        .unwrap();
        let mut cfg = PipelineConfig::for_dir(Path::new("."));
        cfg.k = 21;
        cfg.selection.top_large_k = 5;
        cfg.selection.top_small_k = 2;
        match run(&s.corpus, &cfg, None) {
            Err(Error::Stage { stage, .. }) => assert_eq!(stage, "cut"),
            other => panic!("expected cut failure, got {other:?}"),
        }
    }
}
