//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the directory holding the file.
//!
//! ```text
//! regions = regions.csv
//! activities = activities.csv
//! counts = counts.csv
//! totals = totals.csv
//! complete = true
//! k = 17
//! measure = phi_square
//! ```

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::clustering::Measure;
use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::selection::SelectionConfig;

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    source: String,
    entries: BTreeMap<String, (String, u64)>,
}

impl KeyValues {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((k, v)) = trimmed.split_once('=') else {
                return Err(Error::Parse {
                    file: source.into(),
                    line,
                    message: format!("expected key = value, got {trimmed:?}"),
                });
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), (v.trim().to_string(), line)).is_some() {
                return Err(Error::Parse {
                    file: source.into(),
                    line,
                    message: format!("duplicate key {key}"),
                });
            }
        }
        Ok(Self {
            source: source.into(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Overwrites `target` with the parsed value of `key` when present.
    pub fn set_parsed<T>(&self, key: &str, target: &mut T) -> Result<()>
    where
        T: FromStr,
        T::Err: Display,
    {
        if let Some((v, line)) = self.entries.get(key) {
            *target = v.parse().map_err(|e| Error::Parse {
                file: self.source.clone(),
                line: *line,
                message: format!("{key}: {e}"),
            })?;
        }
        Ok(())
    }

    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for (key, (_, line)) in &self.entries {
            if !known.contains(&key.as_str()) {
                return Err(Error::Parse {
                    file: self.source.clone(),
                    line: *line,
                    message: format!("unknown key {key}"),
                });
            }
        }
        Ok(())
    }
}

/// Which regions the top-k concentration shares are computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareBasis {
    /// Regions left after the inclusion filter.
    #[default]
    Included,
    /// Every region in the count data.
    All,
}

impl FromStr for ShareBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "included" => Ok(Self::Included),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidArgument(format!(
                "share_basis must be included or all, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub regions: PathBuf,
    pub activities: PathBuf,
    pub counts: PathBuf,
    pub totals: Option<PathBuf>,
    pub complete: bool,
    pub selection: SelectionConfig,
    pub share_basis: ShareBasis,
    pub measure: Measure,
    pub k: usize,
    pub eval: EvalConfig,
    pub out: PathBuf,
    pub ground_truth: Option<PathBuf>,
    pub top: usize,
    pub dump_distances: bool,
}

const KEYS: &[&str] = &[
    "regions",
    "activities",
    "counts",
    "totals",
    "complete",
    "top_small_k",
    "top_large_k",
    "large_share_min",
    "small_share_max",
    "corr_threshold",
    "share_basis",
    "measure",
    "k",
    "neighbors",
    "shuffles",
    "seed",
    "out",
    "ground_truth",
    "top",
    "dump_distances",
];

impl PipelineConfig {
    /// Defaults with input files named as `synth` writes them in `dir`.
    pub fn for_dir(dir: &Path) -> Self {
        Self {
            regions: dir.join("regions.csv"),
            activities: dir.join("activities.csv"),
            counts: dir.join("counts.csv"),
            totals: Some(dir.join("totals.csv")),
            complete: true,
            selection: SelectionConfig::default(),
            share_basis: ShareBasis::Included,
            measure: Measure::PhiSquare,
            k: 17,
            eval: EvalConfig::default(),
            out: dir.join("out"),
            ground_truth: None,
            top: 20,
            dump_distances: false,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let kv = KeyValues::read(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_key_values(&kv, base)
    }

    pub fn from_key_values(kv: &KeyValues, base: &Path) -> Result<Self> {
        kv.reject_unknown(KEYS)?;
        let path = |key: &str| kv.get(key).filter(|v| !v.is_empty()).map(|v| base.join(v));
        let required = |key: &str| {
            path(key).ok_or_else(|| Error::Config(format!("{}: missing key {key}", kv.source)))
        };
        let mut cfg = Self {
            regions: required("regions")?,
            activities: required("activities")?,
            counts: required("counts")?,
            totals: path("totals"),
            out: path("out").unwrap_or_else(|| base.join("out")),
            ground_truth: path("ground_truth"),
            ..Self::for_dir(base)
        };
        kv.set_parsed("complete", &mut cfg.complete)?;
        kv.set_parsed("top_small_k", &mut cfg.selection.top_small_k)?;
        kv.set_parsed("top_large_k", &mut cfg.selection.top_large_k)?;
        kv.set_parsed("large_share_min", &mut cfg.selection.large_share_min)?;
        kv.set_parsed("small_share_max", &mut cfg.selection.small_share_max)?;
        kv.set_parsed("corr_threshold", &mut cfg.selection.corr_threshold)?;
        kv.set_parsed("share_basis", &mut cfg.share_basis)?;
        kv.set_parsed("measure", &mut cfg.measure)?;
        kv.set_parsed("k", &mut cfg.k)?;
        kv.set_parsed("neighbors", &mut cfg.eval.neighbors)?;
        kv.set_parsed("shuffles", &mut cfg.eval.shuffles)?;
        kv.set_parsed("seed", &mut cfg.eval.seed)?;
        kv.set_parsed("top", &mut cfg.top)?;
        kv.set_parsed("dump_distances", &mut cfg.dump_distances)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        self.selection.validate()
    }

    /// Config text that reproduces this configuration, with paths written
    /// relative to `base` where possible.
    pub fn to_key_values(&self, base: &Path) -> String {
        let rel = |p: &Path| {
            p.strip_prefix(base)
                .unwrap_or(p)
                .display()
                .to_string()
        };
        let mut lines = vec![
            format!("regions = {}", rel(&self.regions)),
            format!("activities = {}", rel(&self.activities)),
            format!("counts = {}", rel(&self.counts)),
        ];
        if let Some(t) = &self.totals {
            lines.push(format!("totals = {}", rel(t)));
        }
        lines.push(format!("complete = {}", self.complete));
        if let Some(g) = &self.ground_truth {
            lines.push(format!("ground_truth = {}", rel(g)));
        }
        let s = &self.selection;
        lines.extend([
            format!("top_small_k = {}", s.top_small_k),
            format!("top_large_k = {}", s.top_large_k),
            format!("large_share_min = {}", s.large_share_min),
            format!("small_share_max = {}", s.small_share_max),
            format!("corr_threshold = {}", s.corr_threshold),
            format!(
                "share_basis = {}",
                match self.share_basis {
                    ShareBasis::Included => "included",
                    ShareBasis::All => "all",
                }
            ),
            format!("measure = {}", self.measure),
            format!("k = {}", self.k),
            format!("neighbors = {}", self.eval.neighbors),
            format!("shuffles = {}", self.eval.shuffles),
            format!("seed = {}", self.eval.seed),
            format!("out = {}", rel(&self.out)),
        ]);
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let kv = KeyValues::parse(
            "# corpus\nregions = r.csv\nactivities=a.csv\ncounts = c.csv\n\nk = 12\nmeasure = chi_square\n",
            "test.conf",
        )
        .unwrap();
        let cfg = PipelineConfig::from_key_values(&kv, Path::new("/data")).unwrap();
        assert_eq!(cfg.regions, Path::new("/data/r.csv"));
        assert_eq!(cfg.k, 12);
        assert_eq!(cfg.measure, Measure::ChiSquare);
        assert_eq!(cfg.totals, None);
        assert_eq!(cfg.selection, SelectionConfig::default());
    }

    #[test]
    fn round_trips_through_text() {
        let cfg = PipelineConfig::for_dir(Path::new("/corpus"));
        let text = cfg.to_key_values(Path::new("/corpus"));
        let back = PipelineConfig::from_key_values(
            &KeyValues::parse(&text, "x").unwrap(),
            Path::new("/corpus"),
        )
        .unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = KeyValues::parse("a = 1\nnonsense\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let kv = KeyValues::parse("regions=a\nactivities=b\ncounts=c\nk = many\n", "f").unwrap();
        assert!(matches!(
            PipelineConfig::from_key_values(&kv, Path::new(".")),
            Err(Error::Parse { line: 4, .. })
        ));
        let kv = KeyValues::parse("regions=a\nactivities=b\ncounts=c\ncolour = red\n", "f").unwrap();
        assert!(PipelineConfig::from_key_values(&kv, Path::new(".")).is_err());
        let kv = KeyValues::parse("regions=a\nactivities=b\n", "f").unwrap();
        assert!(matches!(
            PipelineConfig::from_key_values(&kv, Path::new(".")),
            Err(Error::Config(_))
        ));
    }
}
