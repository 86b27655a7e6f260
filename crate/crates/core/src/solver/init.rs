use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{ValidatedModel, Variant};

use super::snapshot::read_snapshot;
use super::{signals, Field, Grid, SimState, SolverError};

/// Initial density, and for `τ = 1` initial signals.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Constant {
        c: f64,
    },
    /// `floor + amplitude · exp(-|x - center|² / (2 width²))`; the second
    /// center coordinate is ignored in 1D.
    Gaussian {
        center: [f64; 2],
        width: f64,
        amplitude: f64,
        floor: f64,
    },
    /// `c + amplitude · ζ_i` with `ζ_i` uniform on `[-1, 1]`, drawn from a
    /// seeded ChaCha8 stream in cell order.
    PerturbedConstant {
        c: f64,
        amplitude: f64,
        seed: u64,
    },
    /// A snapshot table on the same grid.
    FromFile(PathBuf),
}

fn negative(what: &str, value: f64) -> SolverError {
    SolverError::NegativeInitialData(format!("{what} = {value}"))
}

fn density(grid: &Arc<Grid>, preset: &Preset) -> Result<Field, SolverError> {
    match *preset {
        Preset::Constant { c } => {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(negative("c", c));
            }
            Ok(Field::constant(grid.clone(), c))
        }
        Preset::Gaussian { center, width, amplitude, floor } => {
            if !(width > 0.0) || !width.is_finite() {
                return Err(SolverError::BadDomain(format!("gaussian width must be positive, got {width}")));
            }
            if !(floor >= 0.0) {
                return Err(negative("floor", floor));
            }
            if !(amplitude >= 0.0) {
                return Err(negative("amplitude", amplitude));
            }
            let two_d = grid.dimension() == 2;
            Ok(Field::from_fn(grid.clone(), |[x, y]| {
                let dy = if two_d { y - center[1] } else { 0.0 };
                let d2 = (x - center[0]).powi(2) + dy * dy;
                floor + amplitude * (-d2 / (2.0 * width * width)).exp()
            }))
        }
        Preset::PerturbedConstant { c, amplitude, seed } => {
            if !(c >= 0.0) {
                return Err(negative("c", c));
            }
            if !(amplitude >= 0.0) || amplitude > c {
                return Err(SolverError::NegativeInitialData(format!(
                    "perturbation amplitude {amplitude} must lie in [0, c = {c}]"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values = (0..grid.len()).map(|_| (c + amplitude * rng.gen_range(-1.0..=1.0)).max(0.0)).collect();
            Field::new(grid.clone(), values)
        }
        Preset::FromFile(_) => unreachable!("handled by init_state"),
    }
}

/// Builds the initial state.
///
/// For `τ = 0` the signals are solved from `u0`. For `τ = 1` analytic
/// presets start the signals at the elliptic quasi-equilibrium of `u0`,
/// while `FromFile` takes `v0`, `w0` from the file.
pub fn init_state(grid: &Arc<Grid>, preset: &Preset, model: &ValidatedModel) -> Result<SimState, SolverError> {
    let (u, given) = match preset {
        Preset::FromFile(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| SolverError::FileFormatError(format!("{}: {e}", path.display())))?;
            let snap = read_snapshot(&text)?;
            if snap.cells() != grid.cells() {
                return Err(SolverError::FileFormatError(format!(
                    "file grid {:?} does not match configured grid {:?}",
                    snap.cells(),
                    grid.cells()
                )));
            }
            if let Some(bad) = snap.u.iter().find(|&&x| x < 0.0) {
                return Err(negative("u0", *bad));
            }
            let u = Field::new(grid.clone(), snap.u)?;
            let v = Field::new(grid.clone(), snap.v)?;
            let w = Field::new(grid.clone(), snap.w)?;
            (u, Some((v, w)))
        }
        other => (density(grid, other)?, None),
    };
    if !u.is_finite() {
        return Err(SolverError::NonFiniteField("u0"));
    }
    let (v, w) = match given {
        Some(vw) if model.tau == 1 && model.variant == Variant::Local => vw,
        _ => signals(model, grid, &u, None, 0.0)?,
    };
    Ok(SimState { t: 0.0, dt: 0.0, u, v, w, step_count: 0 })
}
