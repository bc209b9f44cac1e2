//! Region × activity count data: catalogs, the count matrix, ingestion and
//! the descriptive per-region summaries.

mod io;
mod summary;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub use io::{load_corpus, write_corpus, CorpusPaths, LoadOptions, LoadReport, TOTAL_ROW_MARKER};
pub use summary::{region_summaries, top_k_national_share, RegionSummary};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMeta {
    pub region_id: String,
    pub name: String,
    /// Absent for province-level units such as municipalities.
    pub province: Option<String>,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub population: Option<u64>,
    pub included: bool,
}

impl RegionMeta {
    pub fn coordinates(&self) -> Option<(f64, f64)> {
        Some((self.latitude?, self.longitude?))
    }

    /// Province key used when comparing against province partitions. A region
    /// without a province is its own single-member province.
    pub fn province_key(&self) -> &str {
        self.province.as_deref().unwrap_or(&self.region_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCatalog {
    entries: Vec<RegionMeta>,
    index: HashMap<String, usize>,
}

impl RegionCatalog {
    pub fn new(entries: Vec<RegionMeta>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.region_id.is_empty() {
                return Err(Error::InvalidArgument("empty region_id".into()));
            }
            if let Some(lat) = e.latitude {
                if !(-90.0..=90.0).contains(&lat) {
                    return Err(Error::InvalidArgument(format!(
                        "region {}: latitude {lat} outside [-90, 90]",
                        e.region_id
                    )));
                }
            }
            if let Some(lon) = e.longitude {
                if !(-180.0..=180.0).contains(&lon) {
                    return Err(Error::InvalidArgument(format!(
                        "region {}: longitude {lon} outside [-180, 180]",
                        e.region_id
                    )));
                }
            }
            if index.insert(e.region_id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate region_id {}",
                    e.region_id
                )));
            }
        }
        Ok(Self { entries, index })
    }

    pub fn entries(&self) -> &[RegionMeta] {
        &self.entries
    }

    pub fn get(&self, region_id: &str) -> Option<&RegionMeta> {
        self.index.get(region_id).map(|&i| &self.entries[i])
    }

    pub fn position(&self, region_id: &str) -> Option<usize> {
        self.index.get(region_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityMeta {
    pub activity_id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityCatalog {
    entries: Vec<ActivityMeta>,
    index: HashMap<String, usize>,
}

impl ActivityCatalog {
    pub fn new(entries: Vec<ActivityMeta>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if e.activity_id.is_empty() {
                return Err(Error::InvalidArgument("empty activity_id".into()));
            }
            if index.insert(e.activity_id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate activity_id {}",
                    e.activity_id
                )));
            }
        }
        Ok(Self { entries, index })
    }

    pub fn entries(&self) -> &[ActivityMeta] {
        &self.entries
    }

    pub fn get(&self, activity_id: &str) -> Option<&ActivityMeta> {
        self.index.get(activity_id).map(|&i| &self.entries[i])
    }

    pub fn position(&self, activity_id: &str) -> Option<usize> {
        self.index.get(activity_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Dense region × activity player counts.
///
/// `region_totals` holds each region's players over *all* activities in the
/// source data, which exceeds the row sum when only a subset of activities
/// is stored. When `complete` is set the matrix claims to cover every
/// activity and the totals must dominate the row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    regions: Vec<String>,
    activities: Vec<String>,
    counts: Vec<u64>,
    region_totals: Vec<u64>,
    complete: bool,
}

impl CountMatrix {
    pub fn new(
        regions: Vec<String>,
        activities: Vec<String>,
        counts: Vec<u64>,
        region_totals: Vec<u64>,
        complete: bool,
    ) -> Result<Self> {
        let (nr, na) = (regions.len(), activities.len());
        if counts.len() != nr * na {
            return Err(Error::InvalidArgument(format!(
                "count table has {} cells, expected {nr} x {na}",
                counts.len()
            )));
        }
        if region_totals.len() != nr {
            return Err(Error::InvalidArgument(format!(
                "{} region totals for {nr} regions",
                region_totals.len()
            )));
        }
        let m = Self {
            regions,
            activities,
            counts,
            region_totals,
            complete,
        };
        m.check_totals()?;
        Ok(m)
    }

    fn check_totals(&self) -> Result<()> {
        for r in 0..self.n_regions() {
            let row = self.row(r);
            let total = self.region_totals[r];
            let max = row.iter().copied().max().unwrap_or(0);
            if total < max {
                return Err(Error::Integrity(format!(
                    "region {}: total {total} below its largest count {max}",
                    self.regions[r]
                )));
            }
            if self.complete {
                let sum: u64 = row.iter().sum();
                if total < sum {
                    return Err(Error::Integrity(format!(
                        "region {}: total {total} below row sum {sum} in a complete matrix",
                        self.regions[r]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn empty(complete: bool) -> Self {
        Self {
            regions: Vec::new(),
            activities: Vec::new(),
            counts: Vec::new(),
            region_totals: Vec::new(),
            complete,
        }
    }

    pub fn n_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn n_activities(&self) -> usize {
        self.activities.len()
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn region_totals(&self) -> &[u64] {
        &self.region_totals
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn count(&self, region: usize, activity: usize) -> u64 {
        self.counts[region * self.activities.len() + activity]
    }

    pub fn row(&self, region: usize) -> &[u64] {
        let na = self.activities.len();
        &self.counts[region * na..(region + 1) * na]
    }

    pub fn column(&self, activity: usize) -> Vec<u64> {
        (0..self.n_regions())
            .map(|r| self.count(r, activity))
            .collect()
    }

    pub fn activity_total(&self, activity: usize) -> u64 {
        (0..self.n_regions()).map(|r| self.count(r, activity)).sum()
    }

    pub fn region_index(&self, region_id: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == region_id)
    }

    pub fn activity_index(&self, activity_id: &str) -> Option<usize> {
        self.activities.iter().position(|a| a == activity_id)
    }

    /// Keeps the rows selected by `keep`, preserving order.
    pub fn retain_regions(&self, mut keep: impl FnMut(usize, &str) -> bool) -> Self {
        let na = self.n_activities();
        let mut regions = Vec::new();
        let mut counts = Vec::new();
        let mut totals = Vec::new();
        for (r, id) in self.regions.iter().enumerate() {
            if keep(r, id) {
                regions.push(id.clone());
                counts.extend_from_slice(self.row(r));
                totals.push(self.region_totals[r]);
            }
        }
        debug_assert_eq!(counts.len(), regions.len() * na);
        Self {
            regions,
            activities: self.activities.clone(),
            counts,
            region_totals: totals,
            complete: self.complete,
        }
    }
}

/// A count matrix together with the catalogs that describe its rows and
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub matrix: CountMatrix,
    pub regions: RegionCatalog,
    pub activities: ActivityCatalog,
}

impl Corpus {
    /// Checks referential integrity between the matrix and the catalogs and
    /// that matrix orderings follow catalog order.
    pub fn validate(&self) -> Result<()> {
        let mut last = None;
        for id in self.matrix.regions() {
            let pos = self
                .regions
                .position(id)
                .ok_or_else(|| Error::Integrity(format!("unknown region_id {id}")))?;
            if last.is_some_and(|l| pos <= l) {
                return Err(Error::Integrity(format!(
                    "matrix region order disagrees with catalog at {id}"
                )));
            }
            last = Some(pos);
        }
        let mut last = None;
        for id in self.matrix.activities() {
            let pos = self
                .activities
                .position(id)
                .ok_or_else(|| Error::Integrity(format!("unknown activity_id {id}")))?;
            if last.is_some_and(|l| pos <= l) {
                return Err(Error::Integrity(format!(
                    "matrix activity order disagrees with catalog at {id}"
                )));
            }
            last = Some(pos);
        }
        self.matrix.check_totals()
    }
}

/// Outcome of [`filter_regions`].
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FilterReport {
    pub kept: usize,
    pub removed: Vec<String>,
    pub warning: Option<String>,
}

/// Restricts the matrix to regions flagged `included` in the catalog.
/// Regions the catalog does not know are removed as well.
pub fn filter_regions(matrix: &CountMatrix, catalog: &RegionCatalog) -> (CountMatrix, FilterReport) {
    let mut removed = Vec::new();
    let filtered = matrix.retain_regions(|_, id| {
        let keep = catalog.get(id).is_some_and(|m| m.included);
        if !keep {
            removed.push(id.to_string());
        }
        keep
    });
    let warning = (filtered.n_regions() == 0 && matrix.n_regions() > 0)
        .then(|| format!("all {} regions excluded", matrix.n_regions()));
    let report = FilterReport {
        kept: filtered.n_regions(),
        removed,
        warning,
    };
    (filtered, report)
}
