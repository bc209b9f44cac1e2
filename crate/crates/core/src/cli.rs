//! Command-line front end. [`main_with_args`] does everything the binary
//! does and returns the process exit code: 0 on success, 1 on internal
//! errors, 2 on input or validation errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::clustering::Measure;
use crate::config::{KeyValues, PipelineConfig};
use crate::corpus::{region_summaries, top_k_national_share, write_corpus, CorpusPaths};
use crate::error::{Error, Result};
use crate::evaluation::{generate_synthetic, SyntheticSpec};
use crate::output::{
    cluster_colors, clusters_geojson, dendrogram_svg, map_svg, markdown_report, write_artifacts,
    write_atomic,
};
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "regiocluster", version, about = "Cluster regions by their activity profiles")]
pub struct Cli {
    /// Pipeline config file (key = value lines).
    #[arg(long, global = true, default_value = "pipeline.conf")]
    pub config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the permutation baseline, or for `synth` the generator seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of clusters.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Distance measure: phi_square or chi_square.
    #[arg(long, global = true)]
    pub measure: Option<Measure>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the corpus and run all integrity checks.
    Validate,
    /// Run the full pipeline and write artifacts.
    Run,
    /// Generate a synthetic corpus with a planted partition.
    Synth {
        /// Spec file (key = value); defaults are used when omitted.
        spec: Option<PathBuf>,
    },
    /// Print the regions with the most players.
    Summarize {
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
}

impl Cli {
    fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::from_file(&self.config)?;
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.eval.seed = seed;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(m) = self.measure {
            cfg.measure = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Validate => cmd_validate(&cli, out, err),
        Command::Run => cmd_run(&cli, out, err),
        Command::Synth { spec } => cmd_synth(&cli, spec.as_deref(), out),
        Command::Summarize { top } => cmd_summarize(&cli, *top, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_validate(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = cli.pipeline_config()?;
    let (corpus, report) = pipeline::load(&cfg)?;
    corpus.validate()?;
    let mut files = vec![&cfg.regions, &cfg.activities, &cfg.counts];
    files.extend(cfg.totals.as_ref());
    for f in files {
        let _ = writeln!(out, "{}: ok", f.display());
    }
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let _ = writeln!(
        out,
        "{} regions, {} activities",
        corpus.matrix.n_regions(),
        corpus.matrix.n_activities()
    );
    Ok(())
}

fn cmd_run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = cli.pipeline_config().map_err(Error::in_stage("config"))?;
    let (corpus, report) = pipeline::load(&cfg).map_err(Error::in_stage("ingest"))?;
    for w in &report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let truth = cfg
        .ground_truth
        .as_deref()
        .map(pipeline::read_assignment)
        .transpose()
        .map_err(Error::in_stage("ingest"))?;
    let outcome = pipeline::run(&corpus, &cfg, truth.as_ref())?;

    let colors = cluster_colors(&outcome.dendrogram, &outcome.assignment);
    let mut artifacts = vec![
        ("assignments.csv", outcome.assignment.to_csv()),
        ("dendrogram.nwk", outcome.newick.clone()),
        ("selection.json", outcome.selection.to_json()),
        ("evaluation.json", outcome.evaluation.to_json()),
        ("report.md", markdown_report(&outcome, &cfg)),
        (
            "clusters.geojson",
            clusters_geojson(&outcome.assignment, &corpus.regions),
        ),
        (
            "dendrogram.svg",
            dendrogram_svg(&outcome.dendrogram, &outcome.assignment, &colors),
        ),
        (
            "map.svg",
            map_svg(&outcome.assignment, &corpus.regions, &colors),
        ),
    ];
    if cfg.dump_distances {
        artifacts.push(("distances.csv", outcome.distances.to_csv()));
    }
    write_artifacts(&cfg.out, &artifacts).map_err(Error::in_stage("write"))?;
    let _ = write!(out, "{}", outcome.evaluation.to_text());
    let _ = writeln!(out, "artifacts written to {}", cfg.out.display());
    Ok(())
}

fn cmd_synth(cli: &Cli, spec_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut spec = match spec_path {
        Some(p) => SyntheticSpec::from_key_values(&KeyValues::read(p)?)?,
        None => SyntheticSpec::default(),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let generated = generate_synthetic(&spec)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("synthetic"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_corpus(&generated.corpus, &CorpusPaths::in_dir(&dir))?;
    write_atomic(
        &dir.join("ground_truth.csv"),
        generated.ground_truth.to_csv().as_bytes(),
    )?;
    let mut cfg = PipelineConfig::for_dir(&dir);
    cfg.k = spec.n_planted_clusters;
    cfg.ground_truth = Some(dir.join("ground_truth.csv"));
    write_atomic(&dir.join("pipeline.conf"), cfg.to_key_values(&dir).as_bytes())?;
    let _ = writeln!(
        out,
        "{} regions, {} activities written to {}",
        generated.corpus.matrix.n_regions(),
        generated.corpus.matrix.n_activities(),
        dir.display()
    );
    Ok(())
}

fn cmd_summarize(cli: &Cli, top: usize, out: &mut dyn Write) -> Result<()> {
    let cfg = cli.pipeline_config()?;
    let (corpus, _) = pipeline::load(&cfg)?;
    let rows = region_summaries(&corpus.matrix, &corpus.regions);
    let _ = writeln!(
        out,
        "{:>4}  {:<24} {:>12} {:>12} {:>8} {:>8}",
        "rank", "region", "players", "population", "percent", "share"
    );
    for (i, r) in rows.iter().take(top).enumerate() {
        let name = corpus
            .regions
            .get(&r.region_id)
            .map_or(r.region_id.as_str(), |m| m.name.as_str());
        let population = r.population.map_or_else(|| "n/a".into(), |p| p.to_string());
        let percent = r
            .percent_of_population
            .map_or_else(|| "n/a".into(), |p| format!("{:.2}%", 100.0 * p));
        let _ = writeln!(
            out,
            "{:>4}  {:<24} {:>12} {:>12} {:>8} {:>7.2}%",
            i + 1,
            name,
            r.players,
            population,
            percent,
            100.0 * r.share_of_national
        );
    }
    let shown = top.min(rows.len());
    let _ = writeln!(
        out,
        "top {shown} regions hold {:.2}% of {} players",
        100.0 * top_k_national_share(&rows, top),
        rows.iter().map(|r| r.players).sum::<u64>()
    );
    Ok(())
}
