use std::fmt::Write as _;

use crate::config::PipelineConfig;
use crate::pipeline::PipelineOutcome;
use crate::selection::Classification;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"))
}

pub fn markdown_report(outcome: &PipelineOutcome, cfg: &PipelineConfig) -> String {
    let sel = &outcome.selection;
    let ev = &outcome.evaluation;
    let mut s = String::new();
    let _ = writeln!(s, "# Regional clustering report\n");

    let _ = writeln!(s, "## Regions\n");
    let _ = writeln!(s, "- kept after inclusion filter: {}", outcome.filter.kept);
    let _ = writeln!(s, "- excluded: {}", outcome.filter.removed.len());
    let _ = writeln!(s, "- dropped for zero players: {}", outcome.zero_total_regions.len());
    let _ = writeln!(s, "- clustered: {}\n", outcome.assignment.region_ids.len());

    let _ = writeln!(s, "## Activity selection\n");
    let _ = writeln!(
        s,
        "Top-{} share must exceed {}, top-{} share must stay below {}; correlated pairs above r = {} are deduplicated.\n",
        cfg.selection.top_large_k,
        cfg.selection.large_share_min,
        cfg.selection.top_small_k,
        cfg.selection.small_share_max,
        cfg.selection.corr_threshold
    );
    let _ = writeln!(s, "| classification | activities |");
    let _ = writeln!(s, "|---|---:|");
    for (name, class) in [
        ("regional", Classification::Regional),
        ("excluded: diffuse", Classification::ExcludedDiffuse),
        ("excluded: concentrated", Classification::ExcludedConcentrated),
        ("excluded: no players", Classification::ExcludedEmpty),
    ] {
        let _ = writeln!(s, "| {name} | {} |", sel.count(class));
    }
    let _ = writeln!(
        s,
        "\n{} kept, {} dropped as correlated duplicates.\n",
        sel.kept.len(),
        sel.dropped_correlated.len()
    );

    let _ = writeln!(s, "## Clusters\n");
    let _ = writeln!(
        s,
        "Average linkage on {} distance, cut at k = {}.\n",
        cfg.measure, outcome.assignment.k
    );
    let _ = writeln!(s, "| cluster | regions | dominant province | share |");
    let _ = writeln!(s, "|---:|---:|---|---:|");
    for c in &ev.per_cluster {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.1}% |",
            c.cluster,
            c.size,
            c.dominant_province,
            100.0 * c.dominant_share
        );
    }

    let _ = writeln!(s, "\n## Evaluation\n");
    let _ = writeln!(s, "- province purity: {:.4}", ev.province_purity);
    let _ = writeln!(s, "- ARI vs provinces: {:.4}", ev.adjusted_rand_vs_provinces);
    if let Some(a) = ev.adjusted_rand_vs_ground_truth {
        let _ = writeln!(s, "- ARI vs ground truth: {a:.4}");
    }
    let _ = writeln!(
        s,
        "- neighbour coherence (m = {}): {}",
        ev.neighbors,
        opt(ev.neighbor_coherence)
    );
    let _ = writeln!(
        s,
        "- permutation baseline ({} shuffles, seed {}): {} ± {}",
        ev.shuffles,
        ev.seed,
        opt(ev.coherence_baseline_mean),
        opt(ev.coherence_baseline_std)
    );
    if let Some(z) = ev.coherence_z() {
        let _ = writeln!(s, "- coherence above baseline: {z:.1} standard deviations");
    }
    if !ev.warnings.is_empty() {
        let _ = writeln!(s, "\n## Warnings\n");
        for w in &ev.warnings {
            let _ = writeln!(s, "- {w}");
        }
    }
    s
}
