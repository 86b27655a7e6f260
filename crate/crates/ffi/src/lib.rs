//! C ABI over `chemotaxis-core`.
//!
//! Every function returns a [`ChemoStatus`]; results go through out
//! pointers. On failure, [`chemo_last_error`] describes the most recent
//! error on the calling thread. Simulations live behind an opaque
//! [`ChemoSim`] handle that must be released with [`chemo_sim_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use chemotaxis_core::config::{parse_config, RunSpec};
use chemotaxis_core::diagnostics::{total_mass, SeriesVerdict};
use chemotaxis_core::model::Variant;
use chemotaxis_core::solver::{build_grid, init_state, run, RunVerdict, SimState, Stepper};
use chemotaxis_core::theory::{
    classify_exponents, find_pbar, gn_exponents, mass_bound, Exponents, GnParams, PbarScan, Relation, Verdict,
};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    ConfigError = 4,
    SolverError = 5,
    TheoryError = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoVariant {
    Local = 0,
    Nonlocal = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoField {
    U = 0,
    V = 1,
    W = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoRunVerdict {
    Completed = 0,
    BlowupSuspected = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChemoSeriesVerdict {
    Bounded = 0,
    BlowupSuspected = 1,
    Inconclusive = 2,
}

/// Structural exponents of a model.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChemoExponents {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub k: f64,
    pub l: f64,
    pub r: f64,
    pub n: u32,
}

/// Assumption flags and verdict.
///
/// `witness_mask` has one bit per sufficient witness. For `tau = 0` bits
/// 0, 1, 2 stand for A1, A2, A3; for `tau = 1` bits 0 to 3 stand for the
/// pairs A2+A4, A2+A5, A3+A4, A3+A5.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ChemoRegime {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub a5: bool,
    pub bounded: bool,
    pub witness_mask: u32,
}

/// Inputs of the interpolation exponents.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ChemoGnParams {
    /// Values `<= 0` select the default `max{l, m3+l-1} + 1`.
    pub q: f64,
    pub n: u32,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub k: f64,
    pub l: f64,
}

/// Interpolation exponents at one `p`.
///
/// `theta2` is NaN when `l <= 1`. Bit `i` of `defined_mask` / `holds_mask`
/// refers to relation `i` in the order theta, sigma_theta, theta1,
/// sigma1_theta1, theta2, sigma1_theta2, theta4, sigma2_theta4, theta3.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ChemoExponentSet {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub sigma: f64,
    pub theta1: f64,
    pub sigma1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub sigma2: f64,
    pub defined_mask: u32,
    pub holds_mask: u32,
}

/// Opaque simulation handle.
pub struct ChemoSim {
    spec: RunSpec,
    stepper: Stepper,
    state: SimState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: ChemoStatus, message: impl Into<String>) -> ChemoStatus {
    set_error(message);
    status
}

fn guard(body: impl FnOnce() -> ChemoStatus) -> ChemoStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(ChemoStatus::Panic, "internal panic"),
    }
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chemo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

fn variant_of(v: ChemoVariant) -> Variant {
    match v {
        ChemoVariant::Local => Variant::Local,
        ChemoVariant::Nonlocal => Variant::Nonlocal,
    }
}

/// Classifies exponents for the given variant and `tau` (0 or 1).
///
/// # Safety
/// `exponents` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_classify(
    variant: ChemoVariant,
    tau: u8,
    exponents: *const ChemoExponents,
    out: *mut ChemoRegime,
) -> ChemoStatus {
    guard(|| {
        let (Some(e), Some(out)) = (exponents.as_ref(), out.as_mut()) else {
            return fail(ChemoStatus::NullPointer, "null argument");
        };
        let e = Exponents { m1: e.m1, m2: e.m2, m3: e.m3, k: e.k, l: e.l, r: e.r, n: e.n };
        let report = match classify_exponents(variant_of(variant), tau, &e) {
            Ok(r) => r,
            Err(err) => return fail(ChemoStatus::TheoryError, err.to_string()),
        };
        let mut mask = 0u32;
        if let Some(Verdict::BoundedByTheorem { witnesses, .. }) = &report.verdict {
            let order: Vec<Vec<u8>> = if tau == 0 {
                vec![vec![1], vec![2], vec![3]]
            } else {
                vec![vec![2, 4], vec![2, 5], vec![3, 4], vec![3, 5]]
            };
            for w in witnesses {
                let ids: Vec<u8> = w.iter().map(|a| *a as u8 + 1).collect();
                if let Some(bit) = order.iter().position(|o| *o == ids) {
                    mask |= 1 << bit;
                }
            }
        }
        *out = ChemoRegime {
            a1: report.a1,
            a2: report.a2,
            a3: report.a3,
            a4: report.a4,
            a5: report.a5,
            bounded: report.verdict.as_ref().is_some_and(Verdict::is_bounded),
            witness_mask: mask,
        };
        ChemoStatus::Ok
    })
}

fn gn_params(g: &ChemoGnParams) -> GnParams {
    let q = if g.q > 0.0 { g.q } else { GnParams::default_q(g.l, g.m3) };
    GnParams { q, n: g.n, m1: g.m1, m2: g.m2, m3: g.m3, k: g.k, l: g.l }
}

/// Evaluates every interpolation exponent at `p`.
///
/// # Safety
/// `params` and `out` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_exponents(
    p: f64,
    params: *const ChemoGnParams,
    out: *mut ChemoExponentSet,
) -> ChemoStatus {
    guard(|| {
        let (Some(g), Some(out)) = (params.as_ref(), out.as_mut()) else {
            return fail(ChemoStatus::NullPointer, "null argument");
        };
        let set = match gn_exponents(p, &gn_params(g)) {
            Ok(s) => s,
            Err(err) => return fail(ChemoStatus::TheoryError, err.to_string()),
        };
        let (mut defined, mut holds) = (0u32, 0u32);
        for (i, rel) in Relation::ALL.iter().enumerate() {
            if let Some(flag) = set.flag(*rel) {
                defined |= 1 << i;
                if flag {
                    holds |= 1 << i;
                }
            }
        }
        *out = ChemoExponentSet {
            p: set.p,
            q: set.q,
            theta: set.theta,
            sigma: set.sigma,
            theta1: set.theta1,
            sigma1: set.sigma1,
            theta2: set.theta2.unwrap_or(f64::NAN),
            theta3: set.theta3,
            theta4: set.theta4,
            sigma2: set.sigma2,
            defined_mask: defined,
            holds_mask: holds,
        };
        ChemoStatus::Ok
    })
}

/// Smallest `p̄` on the default scan at which every applicable relation
/// holds, verified over the forward window.
///
/// # Safety
/// `params` and `out_pbar` must be valid pointers or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_find_pbar(params: *const ChemoGnParams, out_pbar: *mut f64) -> ChemoStatus {
    guard(|| {
        let (Some(g), Some(out)) = (params.as_ref(), out_pbar.as_mut()) else {
            return fail(ChemoStatus::NullPointer, "null argument");
        };
        match find_pbar(&gn_params(g), &[], &PbarScan::default()) {
            Ok(cert) => {
                *out = cert.pbar;
                ChemoStatus::Ok
            }
            Err(err) => fail(ChemoStatus::TheoryError, err.to_string()),
        }
    })
}

/// Uniform bound on the total mass.
///
/// # Safety
/// `out` must be a valid pointer or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_mass_bound(
    lambda: f64,
    mu: f64,
    r: f64,
    omega_measure: f64,
    initial_mass: f64,
    out: *mut f64,
) -> ChemoStatus {
    guard(|| {
        let Some(out) = out.as_mut() else {
            return fail(ChemoStatus::NullPointer, "null argument");
        };
        match mass_bound(lambda, mu, r, omega_measure, initial_mass) {
            Ok(m) => {
                *out = m;
                ChemoStatus::Ok
            }
            Err(err) => fail(ChemoStatus::TheoryError, err.to_string()),
        }
    })
}

/// Builds a simulation from configuration text and its initial state.
///
/// # Safety
/// `config` must be a NUL-terminated string or NULL; `out` a valid pointer
/// or NULL. On success `*out` owns a handle for [`chemo_sim_free`].
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_new(config: *const c_char, out: *mut *mut ChemoSim) -> ChemoStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(ChemoStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(config).to_str() else {
            return fail(ChemoStatus::InvalidUtf8, "configuration is not valid UTF-8");
        };
        let spec = match parse_config(text) {
            Ok(s) => s,
            Err(e) => return fail(ChemoStatus::ConfigError, e.to_string()),
        };
        let built = build_grid(&spec.domain).map(|g| g.into_shared()).and_then(|grid| {
            let stepper = Stepper::new(spec.model.clone(), Arc::clone(&grid), spec.step_settings())?;
            let state = init_state(&grid, &spec.init, &spec.model)?;
            Ok((stepper, state))
        });
        match built {
            Ok((stepper, state)) => {
                *out = Box::into_raw(Box::new(ChemoSim { spec, stepper, state }));
                ChemoStatus::Ok
            }
            Err(e) => fail(ChemoStatus::SolverError, e.to_string()),
        }
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `sim` must come from [`chemo_sim_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_free(sim: *mut ChemoSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn with_sim(sim: *mut ChemoSim, body: impl FnOnce(&mut ChemoSim) -> ChemoStatus) -> ChemoStatus {
    guard(|| match sim.as_mut() {
        Some(s) => body(s),
        None => fail(ChemoStatus::NullPointer, "null simulation handle"),
    })
}

/// Takes one time step.
///
/// # Safety
/// `sim` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_step(sim: *mut ChemoSim) -> ChemoStatus {
    with_sim(sim, |s| match s.stepper.step(&s.state) {
        Ok(next) => {
            s.state = next;
            ChemoStatus::Ok
        }
        Err(e) => fail(ChemoStatus::SolverError, e.to_string()),
    })
}

/// Steps until time `t_end`. On a solver error the state of the last
/// successful step is kept.
///
/// # Safety
/// `sim` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_advance(sim: *mut ChemoSim, t_end: f64) -> ChemoStatus {
    with_sim(sim, |s| {
        if !t_end.is_finite() || t_end < s.state.t {
            return fail(ChemoStatus::InvalidArgument, format!("t_end = {t_end} is before t = {}", s.state.t));
        }
        while s.state.t < t_end {
            match s.stepper.advance(&s.state, Some(t_end)) {
                Ok(next) => s.state = next,
                Err(e) => return fail(ChemoStatus::SolverError, e.to_string()),
            }
        }
        ChemoStatus::Ok
    })
}

/// Runs to the configured horizon with diagnostics and reports both the
/// run verdict and the verdict of the recorded series.
///
/// # Safety
/// `sim` must be a live handle or NULL; the out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_run(
    sim: *mut ChemoSim,
    run_verdict: *mut ChemoRunVerdict,
    series_verdict: *mut ChemoSeriesVerdict,
) -> ChemoStatus {
    with_sim(sim, |s| {
        let (Some(rv), Some(sv)) = (run_verdict.as_mut(), series_verdict.as_mut()) else {
            return fail(ChemoStatus::NullPointer, "null argument");
        };
        let outcome = match run(&s.stepper, s.state.clone(), &s.spec.run_control(), |_, _| Ok(())) {
            Ok(o) => o,
            Err(e) => return fail(ChemoStatus::SolverError, e.to_string()),
        };
        *rv = match outcome.verdict {
            RunVerdict::Completed => ChemoRunVerdict::Completed,
            RunVerdict::BlowupSuspected(_) => ChemoRunVerdict::BlowupSuspected,
        };
        *sv = match outcome.series.verdict {
            Some(SeriesVerdict::Bounded) => ChemoSeriesVerdict::Bounded,
            Some(SeriesVerdict::BlowupSuspected(_)) => ChemoSeriesVerdict::BlowupSuspected,
            Some(SeriesVerdict::Inconclusive) | None => ChemoSeriesVerdict::Inconclusive,
        };
        s.state = outcome.state;
        ChemoStatus::Ok
    })
}

/// Current time.
///
/// # Safety
/// `sim` must be a live handle or NULL; `out` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_time(sim: *mut ChemoSim, out: *mut f64) -> ChemoStatus {
    with_sim(sim, |s| match out.as_mut() {
        Some(o) => {
            *o = s.state.t;
            ChemoStatus::Ok
        }
        None => fail(ChemoStatus::NullPointer, "null argument"),
    })
}

/// Total mass of `u`.
///
/// # Safety
/// `sim` must be a live handle or NULL; `out` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_mass(sim: *mut ChemoSim, out: *mut f64) -> ChemoStatus {
    with_sim(sim, |s| match out.as_mut() {
        Some(o) => {
            *o = total_mass(&s.state.u);
            ChemoStatus::Ok
        }
        None => fail(ChemoStatus::NullPointer, "null argument"),
    })
}

/// Cells along x and y; `ny` is 1 in one dimension.
///
/// # Safety
/// `sim` must be a live handle or NULL; out pointers valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_shape(sim: *mut ChemoSim, nx: *mut usize, ny: *mut usize) -> ChemoStatus {
    with_sim(sim, |s| match (nx.as_mut(), ny.as_mut()) {
        (Some(x), Some(y)) => {
            let grid = s.state.grid();
            *x = grid.nx();
            *y = grid.ny();
            ChemoStatus::Ok
        }
        _ => fail(ChemoStatus::NullPointer, "null argument"),
    })
}

/// Copies a field into `buffer` in cell order (x fastest).
///
/// # Safety
/// `sim` must be a live handle or NULL; `buffer` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn chemo_sim_field(
    sim: *mut ChemoSim,
    field: ChemoField,
    buffer: *mut f64,
    len: usize,
) -> ChemoStatus {
    with_sim(sim, |s| {
        if buffer.is_null() {
            return fail(ChemoStatus::NullPointer, "null buffer");
        }
        let values = match field {
            ChemoField::U => s.state.u.values(),
            ChemoField::V => s.state.v.values(),
            ChemoField::W => s.state.w.values(),
        };
        if len < values.len() {
            return fail(ChemoStatus::BufferTooSmall, format!("buffer holds {len} values, field has {}", values.len()));
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
        ChemoStatus::Ok
    })
}
