//! C ABI for regiocluster.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `rc_*_free` function. Every fallible call returns an
//! [`RcStatus`]; on failure a description is available from
//! [`rc_last_error`] on the same thread until the next failing call.
//! Strings passed in are NUL-terminated UTF-8. Strings handed out by a
//! result handle stay valid until that handle is freed.
//!
//! The header `include/regiocluster.h` is generated from this file.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use regiocluster::clustering::{self, ClusterAssignment, Measure};
use regiocluster::config::PipelineConfig;
use regiocluster::corpus::{load_corpus, Corpus, LoadOptions};
use regiocluster::evaluation::{self, SyntheticSpec};
use regiocluster::pipeline::{self, PipelineOutcome};
use regiocluster::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Integrity = 6,
    UndefinedDistance = 7,
    Config = 8,
    Internal = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcMeasure {
    PhiSquare = 0,
    ChiSquare = 1,
}

/// Parameters of the synthetic planted-partition generator.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcSynthSpec {
    pub n_regions: usize,
    pub n_provinces: usize,
    pub n_planted_clusters: usize,
    pub activities_per_cluster: usize,
    pub n_global_activities: usize,
    pub signature_strength: f64,
    pub players_min: u64,
    pub players_max: u64,
    pub seed: u64,
}

/// Pipeline parameters that do not involve files.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RcRunOptions {
    pub k: usize,
    /// One of the [`RcMeasure`] values.
    pub measure: u32,
    pub top_small_k: usize,
    pub top_large_k: usize,
    pub large_share_min: f64,
    pub small_share_max: f64,
    pub corr_threshold: f64,
    pub neighbors: usize,
    pub shuffles: usize,
    pub seed: u64,
}

/// A loaded or generated corpus.
pub struct RcCorpus {
    inner: Corpus,
}

/// A region → cluster labelling.
pub struct RcAssignment {
    inner: ClusterAssignment,
    ids: Vec<CString>,
}

/// Everything a pipeline run produced.
pub struct RcResult {
    assignment: RcAssignment,
    newick: CString,
    selection_json: CString,
    evaluation_json: CString,
}

struct Failure(RcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let mut root = &e;
        while let Error::Stage { source, .. } = root {
            root = source;
        }
        let status = match root {
            Error::Io { .. } => RcStatus::Io,
            Error::Parse { .. } => RcStatus::Parse,
            Error::Validation { .. } => RcStatus::Validation,
            Error::Integrity(_) => RcStatus::Integrity,
            Error::InvalidArgument(_) => RcStatus::InvalidArgument,
            Error::UndefinedDistance => RcStatus::UndefinedDistance,
            Error::Config(_) => RcStatus::Config,
            _ => RcStatus::Internal,
        };
        Failure(status, message)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {what}"));
            RcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(RcStatus::InvalidArgument, format!("{what} is not UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn c_string(s: String) -> Result<CString, Failure> {
    CString::new(s).map_err(|_| Failure(RcStatus::Internal, "string contains NUL".into()))
}

impl RcAssignment {
    fn new(inner: ClusterAssignment) -> Result<Self, Failure> {
        let ids = inner
            .region_ids
            .iter()
            .map(|s| c_string(s.clone()))
            .collect::<Result<_, _>>()?;
        Ok(Self { inner, ids })
    }
}

/// Message describing the last failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Phi-square distance between two non-negative vectors of length `len`.
///
/// # Safety
/// `x` and `y` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_phi_square_distance(
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let x = slice_arg(x, len, "x")?;
        let y = slice_arg(y, len, "y")?;
        let out = out_arg(out, "out")?;
        *out = clustering::phi_square_distance(x, y)?;
        Ok(())
    })
}

/// Adjusted Rand index between two labellings of `len` items.
///
/// # Safety
/// `a` and `b` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_adjusted_rand_index(
    a: *const usize,
    b: *const usize,
    len: usize,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let a = slice_arg(a, len, "a")?;
        let b = slice_arg(b, len, "b")?;
        let out = out_arg(out, "out")?;
        *out = evaluation::adjusted_rand_index(a, b);
        Ok(())
    })
}

/// Loads a corpus from CSV files. `totals` may be NULL.
///
/// # Safety
/// Path arguments must be NULL or NUL-terminated strings; `out` must be
/// writable. On success `*out` receives a handle for [`rc_corpus_free`].
#[no_mangle]
pub unsafe extern "C" fn rc_corpus_load(
    counts: *const c_char,
    regions: *const c_char,
    activities: *const c_char,
    totals: *const c_char,
    complete: bool,
    out: *mut *mut RcCorpus,
) -> RcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let options = LoadOptions {
            totals_path: if totals.is_null() {
                None
            } else {
                Some(path_arg(totals, "totals")?)
            },
            complete,
        };
        let (corpus, _) = load_corpus(
            &path_arg(counts, "counts")?,
            &path_arg(regions, "regions")?,
            &path_arg(activities, "activities")?,
            &options,
        )?;
        *out = Box::into_raw(Box::new(RcCorpus { inner: corpus }));
        Ok(())
    })
}

/// # Safety
/// `corpus` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_corpus_free(corpus: *mut RcCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Number of regions in the count matrix, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_corpus_n_regions(corpus: *const RcCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.matrix.n_regions())
}

/// Number of activities in the count matrix, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_corpus_n_activities(corpus: *const RcCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.matrix.n_activities())
}

#[no_mangle]
pub extern "C" fn rc_synth_spec_default() -> RcSynthSpec {
    let d = SyntheticSpec::default();
    RcSynthSpec {
        n_regions: d.n_regions,
        n_provinces: d.n_provinces,
        n_planted_clusters: d.n_planted_clusters,
        activities_per_cluster: d.activities_per_cluster,
        n_global_activities: d.n_global_activities,
        signature_strength: d.signature_strength,
        players_min: d.players_per_region.0,
        players_max: d.players_per_region.1,
        seed: d.seed,
    }
}

/// Generates a synthetic corpus and its planted partition.
///
/// # Safety
/// `spec` must be readable; `corpus_out` and `truth_out` writable. On
/// success both receive handles the caller frees.
#[no_mangle]
pub unsafe extern "C" fn rc_synthetic_generate(
    spec: *const RcSynthSpec,
    corpus_out: *mut *mut RcCorpus,
    truth_out: *mut *mut RcAssignment,
) -> RcStatus {
    guard(|| {
        let s = *spec.as_ref().ok_or_else(|| null("spec"))?;
        let corpus_out = out_arg(corpus_out, "corpus_out")?;
        let truth_out = out_arg(truth_out, "truth_out")?;
        *corpus_out = ptr::null_mut();
        *truth_out = ptr::null_mut();
        let generated = evaluation::generate_synthetic(&SyntheticSpec {
            n_regions: s.n_regions,
            n_provinces: s.n_provinces,
            n_planted_clusters: s.n_planted_clusters,
            activities_per_cluster: s.activities_per_cluster,
            n_global_activities: s.n_global_activities,
            signature_strength: s.signature_strength,
            players_per_region: (s.players_min, s.players_max),
            seed: s.seed,
        })?;
        let truth = RcAssignment::new(generated.ground_truth)?;
        *corpus_out = Box::into_raw(Box::new(RcCorpus {
            inner: generated.corpus,
        }));
        *truth_out = Box::into_raw(Box::new(truth));
        Ok(())
    })
}

/// # Safety
/// `assignment` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_assignment_free(assignment: *mut RcAssignment) {
    if !assignment.is_null() {
        drop(Box::from_raw(assignment));
    }
}

/// Number of labelled regions, or 0 for NULL.
///
/// # Safety
/// `assignment` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_assignment_len(assignment: *const RcAssignment) -> usize {
    assignment.as_ref().map_or(0, |a| a.inner.labels.len())
}

/// Number of clusters, or 0 for NULL.
///
/// # Safety
/// `assignment` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_assignment_k(assignment: *const RcAssignment) -> usize {
    assignment.as_ref().map_or(0, |a| a.inner.k)
}

/// Copies the 1-based cluster labels into `labels`, which must hold
/// [`rc_assignment_len`] values.
///
/// # Safety
/// `assignment` must be a live handle; `labels` must point to `len`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn rc_assignment_labels(
    assignment: *const RcAssignment,
    labels: *mut usize,
    len: usize,
) -> RcStatus {
    guard(|| {
        let a = assignment.as_ref().ok_or_else(|| null("assignment"))?;
        if len != a.inner.labels.len() {
            return Err(Failure(
                RcStatus::InvalidArgument,
                format!("buffer holds {len} labels, need {}", a.inner.labels.len()),
            ));
        }
        if len > 0 {
            if labels.is_null() {
                return Err(null("labels"));
            }
            std::slice::from_raw_parts_mut(labels, len).copy_from_slice(&a.inner.labels);
        }
        Ok(())
    })
}

/// Region id at position `index`, or NULL when out of range. The string
/// lives as long as the handle.
///
/// # Safety
/// `assignment` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_assignment_region_id(
    assignment: *const RcAssignment,
    index: usize,
) -> *const c_char {
    assignment
        .as_ref()
        .and_then(|a| a.ids.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

#[no_mangle]
pub extern "C" fn rc_run_options_default() -> RcRunOptions {
    let cfg = PipelineConfig::for_dir(".".as_ref());
    RcRunOptions {
        k: cfg.k,
        measure: RcMeasure::PhiSquare as u32,
        top_small_k: cfg.selection.top_small_k,
        top_large_k: cfg.selection.top_large_k,
        large_share_min: cfg.selection.large_share_min,
        small_share_max: cfg.selection.small_share_max,
        corr_threshold: cfg.selection.corr_threshold,
        neighbors: cfg.eval.neighbors,
        shuffles: cfg.eval.shuffles,
        seed: cfg.eval.seed,
    }
}

/// Runs selection, clustering, and evaluation on `corpus`.
/// `ground_truth` may be NULL.
///
/// # Safety
/// `corpus` must be a live handle, `options` readable, `ground_truth` NULL
/// or a live handle, and `out` writable. On success `*out` receives a handle
/// for [`rc_result_free`].
#[no_mangle]
pub unsafe extern "C" fn rc_pipeline_run(
    corpus: *const RcCorpus,
    options: *const RcRunOptions,
    ground_truth: *const RcAssignment,
    out: *mut *mut RcResult,
) -> RcStatus {
    guard(|| {
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        let o = *options.as_ref().ok_or_else(|| null("options"))?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let mut cfg = PipelineConfig::for_dir(".".as_ref());
        cfg.k = o.k;
        cfg.measure = match o.measure {
            m if m == RcMeasure::PhiSquare as u32 => Measure::PhiSquare,
            m if m == RcMeasure::ChiSquare as u32 => Measure::ChiSquare,
            m => {
                return Err(Failure(
                    RcStatus::InvalidArgument,
                    format!("unknown measure {m}"),
                ))
            }
        };
        cfg.selection.top_small_k = o.top_small_k;
        cfg.selection.top_large_k = o.top_large_k;
        cfg.selection.large_share_min = o.large_share_min;
        cfg.selection.small_share_max = o.small_share_max;
        cfg.selection.corr_threshold = o.corr_threshold;
        cfg.eval.neighbors = o.neighbors;
        cfg.eval.shuffles = o.shuffles;
        cfg.eval.seed = o.seed;
        let truth = ground_truth.as_ref().map(|t| &t.inner);
        let PipelineOutcome {
            assignment,
            newick,
            selection,
            evaluation,
            ..
        } = pipeline::run(&corpus.inner, &cfg, truth)?;
        let result = RcResult {
            assignment: RcAssignment::new(assignment)?,
            newick: c_string(newick)?,
            selection_json: c_string(selection.to_json())?,
            evaluation_json: c_string(evaluation.to_json())?,
        };
        *out = Box::into_raw(Box::new(result));
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rc_result_free(result: *mut RcResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// The flat clustering, owned by `result`. Do not free it separately.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_result_assignment(result: *const RcResult) -> *const RcAssignment {
    result.as_ref().map_or(ptr::null(), |r| &r.assignment)
}

/// Newick text of the full dendrogram.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_result_newick(result: *const RcResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.newick.as_ptr())
}

/// Activity selection report as JSON.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_result_selection_json(result: *const RcResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.selection_json.as_ptr())
}

/// Evaluation report as JSON.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rc_result_evaluation_json(result: *const RcResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.evaluation_json.as_ptr())
}
