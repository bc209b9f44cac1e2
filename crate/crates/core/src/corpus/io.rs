use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::{Path, PathBuf};

use super::{ActivityCatalog, ActivityMeta, CountMatrix, Corpus, RegionCatalog, RegionMeta};
use crate::error::{Error, Result};

/// Rows of the counts file whose `activity_id` equals this marker carry the
/// region's all-activity total instead of a count.
pub const TOTAL_ROW_MARKER: &str = "__total__";

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Companion `region_id,total_players` file.
    pub totals_path: Option<PathBuf>,
    /// The counts cover every activity in the source data.
    pub complete: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub warnings: Vec<String>,
}

/// File locations of a corpus on disk.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub regions: PathBuf,
    pub activities: PathBuf,
    pub counts: PathBuf,
    pub totals: PathBuf,
}

impl CorpusPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            regions: dir.join("regions.csv"),
            activities: dir.join("activities.csv"),
            counts: dir.join("counts.csv"),
            totals: dir.join("totals.csv"),
        }
    }
}

struct Table {
    file: String,
    columns: HashMap<String, usize>,
    reader: csv::Reader<File>,
}

impl Table {
    fn open(path: &Path, required: &[&str]) -> Result<Self> {
        let file = path.display().to_string();
        let handle = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(handle);
        let headers = reader.headers().map_err(|e| csv_error(&file, e))?.clone();
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim_start_matches('\u{feff}').to_string(), i))
            .collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(Error::Parse {
                    file,
                    line: 1,
                    message: format!("missing column `{col}`"),
                });
            }
        }
        Ok(Self {
            file,
            columns,
            reader,
        })
    }

    fn rows(&mut self) -> impl Iterator<Item = Result<Row<'_>>> + '_ {
        let file = self.file.clone();
        let columns = &self.columns;
        self.reader.records().map(move |rec| {
            let rec = rec.map_err(|e| csv_error(&file, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            Ok(Row {
                file: file.clone(),
                line,
                columns,
                record: rec,
            })
        })
    }
}

struct Row<'a> {
    file: String,
    line: u64,
    columns: &'a HashMap<String, usize>,
    record: csv::StringRecord,
}

impl Row<'_> {
    fn get(&self, col: &str) -> &str {
        self.record.get(self.columns[col]).unwrap_or("")
    }

    fn parse_err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn invalid(&self, message: impl Into<String>) -> Error {
        Error::Validation {
            file: self.file.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    fn id(&self, col: &str) -> Result<String> {
        let v = self.get(col);
        if v.is_empty() {
            return Err(self.invalid(format!("empty `{col}`")));
        }
        Ok(v.to_string())
    }

    fn count(&self, col: &str) -> Result<u64> {
        let raw = self.get(col);
        if let Some(rest) = raw.strip_prefix('-') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                return Err(self.invalid(format!("negative `{col}` {raw}")));
            }
        }
        if raw.is_empty() || !raw.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.parse_err(format!("`{col}` is not a base-10 integer: {raw:?}")));
        }
        raw.parse()
            .map_err(|_| self.parse_err(format!("`{col}` out of range: {raw}")))
    }

    fn optional_count(&self, col: &str) -> Result<Option<u64>> {
        if self.get(col).is_empty() {
            Ok(None)
        } else {
            self.count(col).map(Some)
        }
    }

    fn optional_degrees(&self, col: &str, limit: f64) -> Result<Option<f64>> {
        let raw = self.get(col);
        if raw.is_empty() {
            return Ok(None);
        }
        let v: f64 = raw
            .parse()
            .map_err(|_| self.parse_err(format!("`{col}` is not a decimal number: {raw:?}")))?;
        if !v.is_finite() || v.abs() > limit {
            return Err(self.invalid(format!("`{col}` {v} outside [-{limit}, {limit}]")));
        }
        Ok(Some(v))
    }
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        file: file.to_string(),
        line,
        message: e.to_string(),
    }
}

fn load_regions(path: &Path) -> Result<RegionCatalog> {
    let mut table = Table::open(
        path,
        &["region_id", "name", "province", "lat", "lon", "population", "included"],
    )?;
    let mut entries = Vec::new();
    let mut seen = HashMap::new();
    for row in table.rows() {
        let row = row?;
        let region_id = row.id("region_id")?;
        if let Some(first) = seen.insert(region_id.clone(), row.line) {
            return Err(row.invalid(format!(
                "duplicate region_id {region_id} (first on line {first})"
            )));
        }
        let included = match row.get("included") {
            "true" => true,
            "false" => false,
            other => return Err(row.parse_err(format!("`included` must be true or false, got {other:?}"))),
        };
        let province = Some(row.get("province"))
            .filter(|p| !p.is_empty())
            .map(str::to_string);
        entries.push(RegionMeta {
            name: row.get("name").to_string(),
            province,
            latitude: row.optional_degrees("lat", 90.0)?,
            longitude: row.optional_degrees("lon", 180.0)?,
            population: row.optional_count("population")?,
            included,
            region_id,
        });
    }
    RegionCatalog::new(entries)
}

fn load_activities(path: &Path) -> Result<ActivityCatalog> {
    let mut table = Table::open(path, &["activity_id", "name"])?;
    let mut entries = Vec::new();
    let mut seen = HashMap::new();
    for row in table.rows() {
        let row = row?;
        let activity_id = row.id("activity_id")?;
        if let Some(first) = seen.insert(activity_id.clone(), row.line) {
            return Err(row.invalid(format!(
                "duplicate activity_id {activity_id} (first on line {first})"
            )));
        }
        entries.push(ActivityMeta {
            name: row.get("name").to_string(),
            activity_id,
        });
    }
    ActivityCatalog::new(entries)
}

fn insert_total(
    totals: &mut HashMap<usize, u64>,
    row: &Row<'_>,
    region: usize,
    region_id: &str,
    value: u64,
) -> Result<()> {
    if totals.insert(region, value).is_some() {
        return Err(row.invalid(format!("duplicate total for region {region_id}")));
    }
    Ok(())
}

/// Reads a corpus from its three CSV files (plus an optional totals file).
///
/// Matrix rows are the regions that occur in the counts or totals data and
/// columns are the activities that occur in the counts data, both in catalog
/// order. Unlisted cells are zero.
pub fn load_corpus(
    counts_path: &Path,
    regions_path: &Path,
    activities_path: &Path,
    options: &LoadOptions,
) -> Result<(Corpus, LoadReport)> {
    let regions = load_regions(regions_path)?;
    let activities = load_activities(activities_path)?;
    let mut report = LoadReport::default();

    let unknown_region = |row: &Row<'_>, id: &str| {
        Error::Integrity(format!(
            "{}:{}: unknown region_id {id}",
            row.file, row.line
        ))
    };

    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut totals: HashMap<usize, u64> = HashMap::new();
    let mut used_regions = BTreeSet::new();
    let mut used_activities = BTreeSet::new();

    let mut table = Table::open(counts_path, &["region_id", "activity_id", "count"])?;
    for row in table.rows() {
        let row = row?;
        let region_id = row.id("region_id")?;
        let activity_id = row.id("activity_id")?;
        let count = row.count("count")?;
        let r = regions
            .position(&region_id)
            .ok_or_else(|| unknown_region(&row, &region_id))?;
        used_regions.insert(r);
        if activity_id == TOTAL_ROW_MARKER {
            insert_total(&mut totals, &row, r, &region_id, count)?;
            continue;
        }
        let a = activities.position(&activity_id).ok_or_else(|| {
            Error::Integrity(format!(
                "{}:{}: unknown activity_id {activity_id}",
                row.file, row.line
            ))
        })?;
        used_activities.insert(a);
        if cells.insert((r, a), count).is_some() {
            return Err(row.invalid(format!(
                "duplicate cell ({region_id}, {activity_id})"
            )));
        }
    }

    if let Some(path) = &options.totals_path {
        let mut table = Table::open(path, &["region_id", "total_players"])?;
        for row in table.rows() {
            let row = row?;
            let region_id = row.id("region_id")?;
            let total = row.count("total_players")?;
            let r = regions
                .position(&region_id)
                .ok_or_else(|| unknown_region(&row, &region_id))?;
            used_regions.insert(r);
            insert_total(&mut totals, &row, r, &region_id, total)?;
        }
    }

    let region_order: Vec<usize> = used_regions.into_iter().collect();
    let activity_order: Vec<usize> = used_activities.into_iter().collect();
    let activity_col: HashMap<usize, usize> = activity_order
        .iter()
        .enumerate()
        .map(|(col, &a)| (a, col))
        .collect();
    let na = activity_order.len();
    let mut counts = vec![0u64; region_order.len() * na];
    let row_of: HashMap<usize, usize> = region_order
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i))
        .collect();
    for (&(r, a), &c) in &cells {
        counts[row_of[&r] * na + activity_col[&a]] = c;
    }

    let counts_file = counts_path.display().to_string();
    let mut region_totals = Vec::with_capacity(region_order.len());
    for (i, &r) in region_order.iter().enumerate() {
        let id = &regions.entries()[r].region_id;
        match totals.get(&r) {
            Some(&t) => region_totals.push(t),
            None if options.complete => {
                return Err(Error::Validation {
                    file: counts_file,
                    line: 0,
                    message: format!("region {id} has no total_players in a complete matrix"),
                })
            }
            None => {
                let sum = counts[i * na..(i + 1) * na].iter().sum();
                report.warnings.push(format!(
                    "region {id} has no total_players; using its row sum {sum}"
                ));
                region_totals.push(sum);
            }
        }
    }

    let matrix = CountMatrix::new(
        region_order
            .iter()
            .map(|&r| regions.entries()[r].region_id.clone())
            .collect(),
        activity_order
            .iter()
            .map(|&a| activities.entries()[a].activity_id.clone())
            .collect(),
        counts,
        region_totals,
        options.complete,
    )?;
    if matrix.n_regions() == 0 || matrix.n_activities() == 0 {
        report.warnings.push(format!(
            "count matrix has {} regions and {} activities",
            matrix.n_regions(),
            matrix.n_activities()
        ));
    }

    let corpus = Corpus {
        matrix,
        regions,
        activities,
    };
    corpus.validate()?;
    Ok((corpus, report))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Internal(format!("{}: {other:?}", path.display())),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes the corpus in the formats read by [`load_corpus`]. Zero cells are
/// omitted except where needed to keep an all-zero activity column present.
pub fn write_corpus(corpus: &Corpus, paths: &CorpusPaths) -> Result<()> {
    let mut w = writer(&paths.regions)?;
    let e = write_err(&paths.regions);
    w.write_record(["region_id", "name", "province", "lat", "lon", "population", "included"])
        .map_err(&e)?;
    for r in corpus.regions.entries() {
        w.write_record([
            r.region_id.clone(),
            r.name.clone(),
            r.province.clone().unwrap_or_default(),
            opt(r.latitude),
            opt(r.longitude),
            opt(r.population),
            r.included.to_string(),
        ])
        .map_err(&e)?;
    }
    w.flush().map_err(|io| Error::io(&paths.regions, io))?;

    let mut w = writer(&paths.activities)?;
    let e = write_err(&paths.activities);
    w.write_record(["activity_id", "name"]).map_err(&e)?;
    for a in corpus.activities.entries() {
        w.write_record([&a.activity_id, &a.name]).map_err(&e)?;
    }
    w.flush().map_err(|io| Error::io(&paths.activities, io))?;

    let m = &corpus.matrix;
    let mut w = writer(&paths.counts)?;
    let e = write_err(&paths.counts);
    w.write_record(["region_id", "activity_id", "count"]).map_err(&e)?;
    let mut column_written = vec![false; m.n_activities()];
    for (r, region_id) in m.regions().iter().enumerate() {
        for (a, activity_id) in m.activities().iter().enumerate() {
            let c = m.count(r, a);
            if c > 0 || (!column_written[a] && m.activity_total(a) == 0) {
                column_written[a] = true;
                w.write_record([region_id, activity_id, &c.to_string()])
                    .map_err(&e)?;
            }
        }
    }
    w.flush().map_err(|io| Error::io(&paths.counts, io))?;

    let mut w = writer(&paths.totals)?;
    let e = write_err(&paths.totals);
    w.write_record(["region_id", "total_players"]).map_err(&e)?;
    for (region_id, total) in m.regions().iter().zip(m.region_totals()) {
        w.write_record([region_id, &total.to_string()]).map_err(&e)?;
    }
    w.flush().map_err(|io| Error::io(&paths.totals, io))?;
    Ok(())
}
