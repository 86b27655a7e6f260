//! Positivity-preserving finite-volume solver on zero-flux rectangles.
//!
//! The density equation is advanced explicitly with an adaptive step; the
//! signals are recomputed from the new density by an elliptic solve
//! (`τ = 0`, both variants) or advanced by one implicit Euler step (`τ = 1`).

mod elliptic;
mod flux;
mod grid;
mod init;
mod run;
mod snapshot;

use std::sync::Arc;

use thiserror::Error;

use crate::model::{ValidatedModel, Variant};

pub use elliptic::{
    solve_elliptic_local, solve_elliptic_nonlocal, solve_mean_free, solve_shifted, LinearSolve, RELATIVE_TOLERANCE,
};
pub use flux::{compute_fluxes, FaceFluxes};
pub use grid::{build_grid, Field, Grid, MIN_CELLS};
pub use init::{init_state, Preset};
pub use run::{run, BlowupReason, RunControl, RunOutcome, RunVerdict};
pub use snapshot::{read_snapshot, render_snapshot, write_snapshot, Snapshot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("grid needs at least 4 cells per axis, got {0}")]
    TooFewCells(usize),
    #[error("bad domain: {0}")]
    BadDomain(String),
    #[error("elliptic shift must be positive, got {0} (use the nonlocal solver for η = 0)")]
    NonPositiveEta(f64),
    #[error("linear solver hit its cap after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("non-finite values in {0}")]
    NonFiniteField(&'static str),
    #[error("stable step {dt:e} fell below dt_min = {dt_min:e}")]
    DtUnderflow { dt: f64, dt_min: f64 },
    #[error("negative initial data: {0}")]
    NegativeInitialData(String),
    #[error("initial data file: {0}")]
    FileFormatError(String),
    #[error("model dimension n = {model} does not match grid dimension {grid}")]
    DimensionMismatch { model: u32, grid: usize },
    #[error("invalid run control: {0}")]
    BadControl(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Grid functions and clock of a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    /// Size of the step that produced this state (0 initially).
    pub dt: f64,
    pub u: Field,
    pub v: Field,
    pub w: Field,
    pub step_count: u64,
}

impl SimState {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSettings {
    /// In `(0, 1]`.
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for StepSettings {
    fn default() -> Self {
        StepSettings { cfl: 0.4, dt_min: 1e-12, dt_max: 0.1 }
    }
}

impl StepSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::BadControl(format!("cfl must lie in (0,1], got {}", self.cfl)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            return Err(SolverError::BadControl(format!(
                "need 0 < dt_min <= dt_max, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }
}

/// Largest explicit step for the density equation:
/// `cfl · min[h²/(2·d·D_max), h/(2·d·|a|_max), 1/(λ + μ r (sup u)^(r-1) + 1)]`,
/// clamped above by `dt_max`.
pub fn stable_dt(state: &SimState, model: &ValidatedModel, settings: &StepSettings) -> Result<f64, SolverError> {
    let fluxes = compute_fluxes(state, model)?;
    stable_dt_with(state, model, settings, &fluxes)
}

fn stable_dt_with(
    state: &SimState,
    model: &ValidatedModel,
    settings: &StepSettings,
    fluxes: &FaceFluxes,
) -> Result<f64, SolverError> {
    let grid = state.grid();
    let dim = grid.dimension() as f64;
    let h = grid.min_spacing();
    let sup_u = state.u.values().iter().copied().fold(0.0f64, f64::max);
    let min_u = state.u.values().iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    // (u+1)^(m1-1) is monotone in u, so its sup sits at an extreme cell value
    let d_max = (sup_u + 1.0).powf(model.m1 - 1.0).max((min_u + 1.0).powf(model.m1 - 1.0));

    let diffusive = h * h / (2.0 * dim * d_max);
    let advective = if fluxes.max_speed > 0.0 { h / (2.0 * dim * fluxes.max_speed) } else { f64::INFINITY };
    let reactive = 1.0 / (model.lambda + model.mu * model.r * sup_u.powf(model.r - 1.0) + 1.0);
    let dt = settings.cfl * diffusive.min(advective).min(reactive);
    if !(dt >= settings.dt_min) {
        return Err(SolverError::DtUnderflow { dt, dt_min: settings.dt_min });
    }
    Ok(dt.min(settings.dt_max))
}

/// Advances a validated model on a fixed grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: ValidatedModel,
    grid: Arc<Grid>,
    settings: StepSettings,
}

impl Stepper {
    pub fn new(model: ValidatedModel, grid: Arc<Grid>, settings: StepSettings) -> Result<Self, SolverError> {
        if model.n as usize != grid.dimension() {
            return Err(SolverError::DimensionMismatch { model: model.n, grid: grid.dimension() });
        }
        settings.validate()?;
        Ok(Stepper { model, grid, settings })
    }

    pub fn model(&self) -> &ValidatedModel {
        &self.model
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn settings(&self) -> &StepSettings {
        &self.settings
    }

    /// One step of the stable size.
    pub fn step(&self, state: &SimState) -> Result<SimState, SolverError> {
        self.advance(state, None)
    }

    /// One step, shortened if needed so as not to pass `t_end`.
    pub fn advance(&self, state: &SimState, t_end: Option<f64>) -> Result<SimState, SolverError> {
        let fluxes = compute_fluxes(state, &self.model)?;
        let mut dt = stable_dt_with(state, &self.model, &self.settings, &fluxes)?;
        if let Some(t_end) = t_end {
            let remaining = t_end - state.t;
            // halve rather than leave a sliver for the last step
            if remaining <= dt {
                dt = remaining;
            } else if remaining < 2.0 * dt {
                dt = 0.5 * remaining;
            }
        }
        self.advance_with(state, &fluxes, dt)
    }

    fn advance_with(&self, state: &SimState, fluxes: &FaceFluxes, dt: f64) -> Result<SimState, SolverError> {
        let m = &self.model;
        let grid = &self.grid;
        let transported = fluxes.limited_transport(grid, state.u.values(), dt);
        let u_new: Vec<f64> = transported
            .iter()
            .zip(state.u.values())
            .map(|(&ut, &u)| {
                let u = u.max(0.0);
                let reaction = if m.lambda == 0.0 && m.mu == 0.0 { 0.0 } else { m.lambda * u - m.mu * u.powf(m.r) };
                (ut + dt * reaction).max(0.0)
            })
            .collect();
        let u_new = Field::new(grid.clone(), u_new)?;
        if !u_new.is_finite() {
            return Err(SolverError::NonFiniteField("u"));
        }
        let (v, w) = self.signals(&u_new, Some((&state.v, &state.w)), dt)?;
        Ok(SimState { t: state.t + dt, dt, u: u_new, v, w, step_count: state.step_count + 1 })
    }

    pub(crate) fn signals(
        &self,
        u: &Field,
        previous: Option<(&Field, &Field)>,
        dt: f64,
    ) -> Result<(Field, Field), SolverError> {
        signals(&self.model, &self.grid, u, previous, dt)
    }
}

/// Signals for density `u`: elliptic solves when `τ = 0` or without a
/// previous state, one implicit Euler step of length `dt` from `previous`
/// when `τ = 1`.
pub(crate) fn signals(
    m: &ValidatedModel,
    grid: &Arc<Grid>,
    u: &Field,
    previous: Option<(&Field, &Field)>,
    dt: f64,
) -> Result<(Field, Field), SolverError> {
    let f = u.map(|s| m.attractant.eval_unchecked(s.max(0.0)));
    let g = u.map(|s| m.repellent.eval_unchecked(s.max(0.0)));
    let (pv, pw) = match previous {
        Some((v, w)) => (Some(v), Some(w)),
        None => (None, None),
    };
    match (m.variant, m.tau, previous) {
        (Variant::Nonlocal, _, _) => {
            Ok((solve_mean_free(grid, &f, pv)?.solution, solve_mean_free(grid, &g, pw)?.solution))
        }
        (Variant::Local, 1, Some((v, w))) => {
            let inv = 1.0 / dt;
            let rhs_v =
                Field::new(grid.clone(), v.values().iter().zip(f.values()).map(|(a, b)| a * inv + b).collect())?;
            let rhs_w =
                Field::new(grid.clone(), w.values().iter().zip(g.values()).map(|(a, b)| a * inv + b).collect())?;
            Ok((
                solve_shifted(grid, m.beta + inv, &rhs_v, Some(v))?.solution,
                solve_shifted(grid, m.delta + inv, &rhs_w, Some(w))?.solution,
            ))
        }
        (Variant::Local, _, _) => {
            Ok((solve_shifted(grid, m.beta, &f, pv)?.solution, solve_shifted(grid, m.delta, &g, pw)?.solution))
        }
    }
}

/// Free-function form of [`Stepper::step`].
pub fn step(state: &SimState, model: &ValidatedModel, settings: &StepSettings) -> Result<SimState, SolverError> {
    Stepper::new(model.clone(), state.grid().clone(), *settings)?.step(state)
}
