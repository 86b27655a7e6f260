//! Face fluxes of the cell-density equation.
//!
//! For a face between cells `L` (lower coordinate) and `R`, with
//! `ū = (u_L + u_R)/2`,
//!
//! ```text
//! J = (ū+1)^(m1-1) (u_R - u_L)/h + a · u_up
//! a = -χ (ū+1)^(m2-1) (v_R - v_L)/h + ξ (ū+1)^(m3-1) (w_R - w_L)/h
//! ```
//!
//! and `u_t = (J_right - J_left)/h_x + (J_top - J_bottom)/h_y + ...`.
//! A positive `J` moves mass from `R` to `L`, so `u_up = u_R` when `a > 0`
//! and `u_L` otherwise. Boundary faces carry zero flux.

use crate::model::ModelSpec;

use super::{Grid, SimState, SolverError};

/// Face-flux arrays including the (zero) boundary faces.
///
/// `x` holds `(nx+1)·ny` values indexed `i_face + (nx+1)·j`; `y` holds
/// `nx·(ny+1)` values indexed `i + nx·j_face` and is empty in 1D.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Largest `|a|` over all faces.
    pub max_speed: f64,
}

struct Coefficients {
    m1: f64,
    m2: f64,
    m3: f64,
    chi: f64,
    xi: f64,
}

impl Coefficients {
    fn face(&self, ul: f64, ur: f64, dv: f64, dw: f64, h: f64, speed: &mut f64) -> f64 {
        let avg = 0.5 * (ul + ur) + 1.0;
        let diffusive = avg.powf(self.m1 - 1.0) * (ur - ul) / h;
        let mut a = 0.0;
        if self.chi != 0.0 {
            a -= self.chi * avg.powf(self.m2 - 1.0) * dv / h;
        }
        if self.xi != 0.0 {
            a += self.xi * avg.powf(self.m3 - 1.0) * dw / h;
        }
        *speed = speed.max(a.abs());
        let upwind = if a > 0.0 { ur } else { ul };
        diffusive + a * upwind
    }
}

pub fn compute_fluxes(state: &SimState, model: &ModelSpec) -> Result<FaceFluxes, SolverError> {
    let grid = state.u.grid().clone();
    let (u, v, w) = (state.u.values(), state.v.values(), state.w.values());
    for (name, f) in [("u", u), ("v", v), ("w", w)] {
        if f.iter().any(|x| !x.is_finite()) {
            return Err(SolverError::NonFiniteField(name));
        }
    }
    let c = Coefficients { m1: model.m1, m2: model.m2, m3: model.m3, chi: model.chi, xi: model.xi };
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut speed = 0.0f64;

    let hx = grid.spacing(0);
    let mut x = vec![0.0; (nx + 1) * ny];
    for j in 0..ny {
        for i in 1..nx {
            let (l, r) = (i - 1 + nx * j, i + nx * j);
            x[i + (nx + 1) * j] = c.face(u[l], u[r], v[r] - v[l], w[r] - w[l], hx, &mut speed);
        }
    }

    let mut y = Vec::new();
    if grid.dimension() == 2 {
        let hy = grid.spacing(1);
        y = vec![0.0; nx * (ny + 1)];
        for j in 1..ny {
            for i in 0..nx {
                let (l, r) = (i + nx * (j - 1), i + nx * j);
                y[i + nx * j] = c.face(u[l], u[r], v[r] - v[l], w[r] - w[l], hy, &mut speed);
            }
        }
    }
    Ok(FaceFluxes { x, y, max_speed: speed })
}

impl FaceFluxes {
    /// Net rate of change `∂u/∂t` from transport, per cell.
    pub fn divergence(&self, grid: &Grid) -> Vec<f64> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let hx = grid.spacing(0);
        let mut div = vec![0.0; grid.len()];
        for j in 0..ny {
            for i in 0..nx {
                div[i + nx * j] = (self.x[i + 1 + (nx + 1) * j] - self.x[i + (nx + 1) * j]) / hx;
            }
        }
        if grid.dimension() == 2 {
            let hy = grid.spacing(1);
            for j in 0..ny {
                for i in 0..nx {
                    div[i + nx * j] += (self.y[i + nx * (j + 1)] - self.y[i + nx * j]) / hy;
                }
            }
        }
        div
    }

    /// Transport update `u + dt·div J` with outgoing fluxes of any cell
    /// scaled down so that it cannot export more than it holds.
    pub(crate) fn limited_transport(&self, grid: &Grid, u: &[f64], dt: f64) -> Vec<f64> {
        let (nx, ny) = (grid.nx(), grid.ny());
        let hx = grid.spacing(0);
        let hy = if grid.dimension() == 2 { grid.spacing(1) } else { 1.0 };

        // mass each cell would export during dt
        let mut export = vec![0.0; grid.len()];
        for j in 0..ny {
            for i in 1..nx {
                let f = self.x[i + (nx + 1) * j] * dt / hx;
                if f > 0.0 {
                    export[i + nx * j] += f;
                } else {
                    export[i - 1 + nx * j] -= f;
                }
            }
        }
        if grid.dimension() == 2 {
            for j in 1..ny {
                for i in 0..nx {
                    let f = self.y[i + nx * j] * dt / hy;
                    if f > 0.0 {
                        export[i + nx * j] += f;
                    } else {
                        export[i + nx * (j - 1)] -= f;
                    }
                }
            }
        }
        let scale: Vec<f64> =
            export.iter().zip(u).map(|(&e, &ui)| if e > ui { ui.max(0.0) / e } else { 1.0 }).collect();

        // drained cells keep exactly nothing of their own content
        let mut out: Vec<f64> =
            u.iter().zip(&export).zip(&scale).map(|((&ui, &e), &s)| if s < 1.0 { 0.0 } else { ui - e }).collect();
        for j in 0..ny {
            for i in 1..nx {
                let (l, r) = (i - 1 + nx * j, i + nx * j);
                let f = self.x[i + (nx + 1) * j] * dt / hx;
                if f > 0.0 {
                    out[l] += f * scale[r];
                } else {
                    out[r] -= f * scale[l];
                }
            }
        }
        if grid.dimension() == 2 {
            for j in 1..ny {
                for i in 0..nx {
                    let (l, r) = (i + nx * (j - 1), i + nx * j);
                    let f = self.y[i + nx * j] * dt / hy;
                    if f > 0.0 {
                        out[l] += f * scale[r];
                    } else {
                        out[r] -= f * scale[l];
                    }
                }
            }
        }
        out
    }
}
