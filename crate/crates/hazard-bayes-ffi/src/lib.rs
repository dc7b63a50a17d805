//! C ABI for the batting survival-analysis engine.
//!
//! Everything crosses the boundary through plain structs, opaque handles and
//! status codes; see `include/hazard_bayes.h` for the C declarations. All
//! functions are panic-safe: a Rust panic is caught and reported as
//! `HB_ERR_INTERNAL`. Failure details are available per thread through
//! [`hb_last_error`].
//!
//! Handle rules: values returned through `hb_dataset **` / `hb_posterior **`
//! are owned by the caller and must be released with the matching `_free`
//! function, which accepts null.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use hazard_bayes::analysis::{
    analyze_player, bayes_factor_vs_constant, compare_players, summarize, ParamSelector,
    PlayerPosterior,
};
use hazard_bayes::ingest::parse_innings_file;
use hazard_bayes::model::{BattingParams, InningsData, InningsRecord};
use hazard_bayes::simulate::{simulate_career, CensorModel};
use hazard_bayes::stats::SummaryRow;
use hazard_bayes::NsConfig;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SamplerError = 4,
    OutOfRange = 5,
    Internal = 6,
}

/// Natural model parameters, by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HbParams {
    pub mu1: f64,
    pub mu2: f64,
    pub transition_scale: f64,
}

/// Median with 16/84-percentile offsets.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HbSummary {
    pub median: f64,
    pub plus_err: f64,
    pub minus_err: f64,
    pub lo68: f64,
    pub hi68: f64,
}

/// Nested-sampling configuration. Zero `n_particles`/`mcmc_steps` select the
/// defaults (1000 each).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HbNsConfig {
    pub n_particles: u64,
    pub mcmc_steps: u64,
    pub seed: u64,
}

/// Innings set handle.
pub struct HbDataset {
    records: Vec<InningsRecord>,
}

/// Posterior handle: equal-weight samples plus evidence.
pub struct HbPosterior {
    inner: PlayerPosterior,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: impl AsRef<str>) {
    let sanitized: String =
        message.as_ref().chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: HbStatus, message: impl AsRef<str>) -> HbStatus {
    set_last_error(message);
    status
}

/// Run a fallible body, converting panics into `HB_ERR_INTERNAL`.
fn guarded(body: impl FnOnce() -> HbStatus) -> HbStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in hazard-bayes".to_string());
            fail(HbStatus::Internal, message)
        }
    }
}

fn params_from_c(p: &HbParams) -> Result<BattingParams, HbStatus> {
    BattingParams::new(p.mu1, p.mu2, p.transition_scale).map_err(|e| {
        set_last_error(e.to_string());
        HbStatus::InvalidArgument
    })
}

fn selector_from_c(param: c_int) -> Result<ParamSelector, HbStatus> {
    match param {
        0 => Ok(ParamSelector::InitialAverage),
        1 => Ok(ParamSelector::EquilibriumAverage),
        2 => Ok(ParamSelector::TransitionScale),
        other => {
            set_last_error(format!("parameter selector {other} outside 0..=2"));
            Err(HbStatus::OutOfRange)
        }
    }
}

fn config_from_c(config: *const HbNsConfig) -> NsConfig {
    if config.is_null() {
        return NsConfig::new(1000, 1000, 0);
    }
    let c = unsafe { &*config };
    NsConfig::new(
        if c.n_particles == 0 { 1000 } else { c.n_particles as usize },
        if c.mcmc_steps == 0 { 1000 } else { c.mcmc_steps as usize },
        c.seed,
    )
}

/// Message for the most recent failure on this thread; empty when the last
/// call succeeded. The pointer stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn hb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn hb_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Allocate an empty innings set.
#[no_mangle]
pub extern "C" fn hb_dataset_new() -> *mut HbDataset {
    Box::into_raw(Box::new(HbDataset { records: Vec::new() }))
}

/// Release a dataset handle (null is a no-op).
///
/// # Safety
/// `dataset` must be null or a pointer obtained from this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn hb_dataset_free(dataset: *mut HbDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Append one innings (`not_out` nonzero marks a censored innings).
///
/// # Safety
/// `dataset` must be a valid dataset handle.
#[no_mangle]
pub unsafe extern "C" fn hb_dataset_push(
    dataset: *mut HbDataset,
    score: u32,
    not_out: c_int,
) -> HbStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_mut() }) else {
            return fail(HbStatus::NullArgument, "dataset is null");
        };
        dataset.records.push(InningsRecord { score, not_out: not_out != 0 });
        HbStatus::Ok
    })
}

/// Number of innings in a dataset (0 for null).
///
/// # Safety
/// `dataset` must be null or a valid dataset handle.
#[no_mangle]
pub unsafe extern "C" fn hb_dataset_len(dataset: *const HbDataset) -> usize {
    unsafe { dataset.as_ref() }.map_or(0, |d| d.records.len())
}

/// Parse an innings CSV (`player,score` rows, `*` suffix for not-out) and
/// return the named player's innings. A null `player` is accepted when the
/// file holds exactly one player.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string, `player` null or the
/// same, and `out` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn hb_dataset_parse_csv(
    text: *const c_char,
    player: *const c_char,
    out: *mut *mut HbDataset,
) -> HbStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "text and out must be non-null");
        }
        let content = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(s) => s,
            Err(_) => return fail(HbStatus::ParseError, "text is not valid UTF-8"),
        };
        let parsed = match parse_innings_file(content) {
            Ok(p) => p,
            Err(e) => return fail(HbStatus::ParseError, e.to_string()),
        };
        let records = if player.is_null() {
            match parsed.players.as_slice() {
                [(_, only)] => only.clone(),
                players => {
                    return fail(
                        HbStatus::InvalidArgument,
                        format!("file holds {} players; name one", players.len()),
                    )
                }
            }
        } else {
            let name = match unsafe { CStr::from_ptr(player) }.to_str() {
                Ok(s) => s,
                Err(_) => return fail(HbStatus::ParseError, "player is not valid UTF-8"),
            };
            match parsed.get(name) {
                Some(records) => records.to_vec(),
                None => {
                    return fail(HbStatus::InvalidArgument, format!("player '{name}' not in file"))
                }
            }
        };
        unsafe { *out = Box::into_raw(Box::new(HbDataset { records })) };
        HbStatus::Ok
    })
}

/// Effective average mu(x) at a (real-valued) score.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_effective_average(
    params: *const HbParams,
    score: f64,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        let score_ok = score >= 0.0; // also rejects NaN
        if !score_ok {
            return fail(HbStatus::InvalidArgument, "score must be >= 0");
        }
        match params_from_c(unsafe { &*params }) {
            Ok(p) => {
                unsafe { *out = p.effective_average(score) };
                HbStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Dismissal probability H(x) at an integer score.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_hazard(
    params: *const HbParams,
    score: u32,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        match params_from_c(unsafe { &*params }) {
            Ok(p) => {
                unsafe { *out = p.hazard(score) };
                HbStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Survival probability G(x) at an integer score.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_survival(
    params: *const HbParams,
    score: u32,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        match params_from_c(unsafe { &*params }) {
            Ok(p) => {
                unsafe { *out = p.survival(score) };
                HbStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Score probability P(X = x).
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_score_pmf(
    params: *const HbParams,
    score: u32,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        match params_from_c(unsafe { &*params }) {
            Ok(p) => {
                unsafe { *out = p.score_pmf(score) };
                HbStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Censored log-likelihood of a dataset under the given parameters.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hb_log_likelihood(
    dataset: *const HbDataset,
    params: *const HbParams,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(HbStatus::NullArgument, "dataset is null");
        };
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        let p = match params_from_c(unsafe { &*params }) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let data = match InningsData::new(&dataset.records) {
            Ok(d) => d,
            Err(e) => return fail(HbStatus::InvalidArgument, e.to_string()),
        };
        unsafe { *out = data.log_likelihood(&p) };
        HbStatus::Ok
    })
}

/// Draw a synthetic career into a new dataset handle.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_simulate_career(
    params: *const HbParams,
    n_innings: u64,
    censor_prob: f64,
    seed: u64,
    out: *mut *mut HbDataset,
) -> HbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(HbStatus::NullArgument, "params and out must be non-null");
        }
        if n_innings == 0 {
            return fail(HbStatus::InvalidArgument, "need at least one innings");
        }
        let p = match params_from_c(unsafe { &*params }) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let censor = match CensorModel::new(censor_prob) {
            Ok(c) => c,
            Err(e) => return fail(HbStatus::InvalidArgument, e.to_string()),
        };
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let records = simulate_career(&p, n_innings as usize, censor, &mut rng);
        unsafe { *out = Box::into_raw(Box::new(HbDataset { records })) };
        HbStatus::Ok
    })
}

/// Fit the varying-hazard model to a dataset; the posterior handle carries
/// equal-weight samples and the log-evidence.
///
/// # Safety
/// `dataset` and `out` must be valid pointers; `config` may be null for
/// defaults.
#[no_mangle]
pub unsafe extern "C" fn hb_analyze(
    dataset: *const HbDataset,
    config: *const HbNsConfig,
    out: *mut *mut HbPosterior,
) -> HbStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(HbStatus::NullArgument, "dataset is null");
        };
        if out.is_null() {
            return fail(HbStatus::NullArgument, "out is null");
        }
        let ns_config = config_from_c(config);
        match analyze_player("ffi", &dataset.records, &ns_config) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(HbPosterior { inner })) };
                HbStatus::Ok
            }
            Err(e) => fail(HbStatus::SamplerError, e.to_string()),
        }
    })
}

/// Release a posterior handle (null is a no-op).
///
/// # Safety
/// `posterior` must be null or an owned handle from [`hb_analyze`].
#[no_mangle]
pub unsafe extern "C" fn hb_posterior_free(posterior: *mut HbPosterior) {
    if !posterior.is_null() {
        drop(unsafe { Box::from_raw(posterior) });
    }
}

/// Number of posterior samples (0 for null).
///
/// # Safety
/// `posterior` must be null or a valid posterior handle.
#[no_mangle]
pub unsafe extern "C" fn hb_posterior_len(posterior: *const HbPosterior) -> usize {
    unsafe { posterior.as_ref() }.map_or(0, |p| p.inner.samples.len())
}

/// Copy sample `index` into `out`.
///
/// # Safety
/// `posterior` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_posterior_sample(
    posterior: *const HbPosterior,
    index: usize,
    out: *mut HbParams,
) -> HbStatus {
    guarded(|| {
        let Some(posterior) = (unsafe { posterior.as_ref() }) else {
            return fail(HbStatus::NullArgument, "posterior is null");
        };
        if out.is_null() {
            return fail(HbStatus::NullArgument, "out is null");
        }
        let Some(sample) = posterior.inner.samples.get(index) else {
            return fail(
                HbStatus::OutOfRange,
                format!("index {index} >= {}", posterior.inner.samples.len()),
            );
        };
        unsafe {
            *out = HbParams {
                mu1: sample.params.initial_average(),
                mu2: sample.params.equilibrium_average(),
                transition_scale: sample.params.transition_scale(),
            };
        }
        HbStatus::Ok
    })
}

/// Log-evidence and its uncertainty.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hb_posterior_log_evidence(
    posterior: *const HbPosterior,
    log_z: *mut f64,
    log_z_err: *mut f64,
) -> HbStatus {
    guarded(|| {
        let Some(posterior) = (unsafe { posterior.as_ref() }) else {
            return fail(HbStatus::NullArgument, "posterior is null");
        };
        if log_z.is_null() || log_z_err.is_null() {
            return fail(HbStatus::NullArgument, "log_z and log_z_err must be non-null");
        }
        let Some(evidence) = posterior.inner.evidence else {
            return fail(HbStatus::InvalidArgument, "posterior carries no evidence");
        };
        unsafe {
            *log_z = evidence.log_z;
            *log_z_err = evidence.log_z_err;
        }
        HbStatus::Ok
    })
}

/// Summary row (median, 16/84 offsets) for one parameter: 0 = mu1, 1 = mu2,
/// 2 = transition scale L.
///
/// # Safety
/// `posterior` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hb_posterior_summary(
    posterior: *const HbPosterior,
    param: c_int,
    out: *mut HbSummary,
) -> HbStatus {
    guarded(|| {
        let Some(posterior) = (unsafe { posterior.as_ref() }) else {
            return fail(HbStatus::NullArgument, "posterior is null");
        };
        if out.is_null() {
            return fail(HbStatus::NullArgument, "out is null");
        }
        let selector = match selector_from_c(param) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let summary = match summarize(&posterior.inner) {
            Ok(s) => s,
            Err(e) => return fail(HbStatus::InvalidArgument, e.to_string()),
        };
        let row: SummaryRow = match selector {
            ParamSelector::InitialAverage => summary.mu1,
            ParamSelector::EquilibriumAverage => summary.mu2,
            ParamSelector::TransitionScale => summary.transition_scale,
        };
        unsafe {
            *out = HbSummary {
                median: row.median,
                plus_err: row.plus_err,
                minus_err: row.minus_err,
                lo68: row.lo68,
                hi68: row.hi68,
            };
        }
        HbStatus::Ok
    })
}

/// Posterior probability that parameter `param` of `a` exceeds that of `b`.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hb_compare(
    a: *const HbPosterior,
    b: *const HbPosterior,
    param: c_int,
    seed: u64,
    out: *mut f64,
) -> HbStatus {
    guarded(|| {
        let (Some(a), Some(b)) = (unsafe { a.as_ref() }, unsafe { b.as_ref() }) else {
            return fail(HbStatus::NullArgument, "posteriors must be non-null");
        };
        if out.is_null() {
            return fail(HbStatus::NullArgument, "out is null");
        }
        let selector = match selector_from_c(param) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        unsafe { *out = compare_players(&a.inner, &b.inner, selector, &mut rng) };
        HbStatus::Ok
    })
}

/// Evidence for the varying-hazard model and the constant-hazard baseline,
/// plus the log Bayes factor between them.
///
/// # Safety
/// `dataset` must be valid; output pointers may be null to skip a value.
#[no_mangle]
pub unsafe extern "C" fn hb_log_bayes_factor(
    dataset: *const HbDataset,
    config: *const HbNsConfig,
    log_z: *mut f64,
    log_z0: *mut f64,
    log_bayes_factor: *mut f64,
) -> HbStatus {
    guarded(|| {
        let Some(dataset) = (unsafe { dataset.as_ref() }) else {
            return fail(HbStatus::NullArgument, "dataset is null");
        };
        let ns_config = config_from_c(config);
        match bayes_factor_vs_constant(&dataset.records, &ns_config) {
            Ok(result) => {
                unsafe {
                    if !log_z.is_null() {
                        *log_z = result.varying.log_z;
                    }
                    if !log_z0.is_null() {
                        *log_z0 = result.constant.log_z;
                    }
                    if !log_bayes_factor.is_null() {
                        *log_bayes_factor = result.log_bayes_factor;
                    }
                }
                HbStatus::Ok
            }
            Err(e) => fail(HbStatus::SamplerError, e.to_string()),
        }
    })
}
