//! Zero-flux elliptic problems `-Δz + ηz = ψ` on the cell-centered grid.
//!
//! The discrete Laplacian is the 3-point (1D) or 5-point (2D) stencil with
//! boundary faces dropped, which is exactly the homogeneous Neumann
//! condition for finite volumes. The operator is symmetric, positive
//! definite for `η > 0` and positive semidefinite with kernel `span{1}` for
//! `η = 0`; both cases go through conjugate gradients.

use super::{Field, Grid, SolverError};

pub const RELATIVE_TOLERANCE: f64 = 1e-10;

/// Matrix-free application of `-Δ_h + η`.
pub(crate) fn apply_operator(grid: &Grid, eta: f64, z: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let cx = 1.0 / (grid.spacing(0) * grid.spacing(0));
    let cy = if grid.dimension() == 2 { 1.0 / (grid.spacing(1) * grid.spacing(1)) } else { 0.0 };
    for j in 0..ny {
        for i in 0..nx {
            let idx = i + nx * j;
            let zi = z[idx];
            let mut acc = eta * zi;
            if i > 0 {
                acc += cx * (zi - z[idx - 1]);
            }
            if i + 1 < nx {
                acc += cx * (zi - z[idx + 1]);
            }
            if j > 0 {
                acc += cy * (zi - z[idx - nx]);
            }
            if j + 1 < ny {
                acc += cy * (zi - z[idx + nx]);
            }
            out[idx] = acc;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

/// Outcome of a linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolve {
    pub solution: Field,
    pub iterations: usize,
    /// Final residual in the cell-measure weighted 2-norm.
    pub residual: f64,
}

/// Conjugate gradients for `(-Δ_h + η) z = b`, starting from `guess`.
///
/// Stops once `‖b - Az‖ ≤ tol·(‖scale‖ + 1)` in the weighted 2-norm.
/// With `singular` set, `b`, the iterate and the search directions are kept
/// mean-free.
fn conjugate_gradient(
    grid: &Grid,
    eta: f64,
    b: &[f64],
    guess: Option<&[f64]>,
    scale: f64,
    singular: bool,
) -> Result<(Vec<f64>, usize, f64), SolverError> {
    let n = grid.len();
    let weight = grid.cell_measure().sqrt();
    let target = RELATIVE_TOLERANCE * (scale + 1.0) / weight;
    let max_iter = 10 * n;

    let mut x = guess.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if singular {
        remove_mean(&mut x);
    }
    let mut ax = vec![0.0; n];
    apply_operator(grid, eta, &x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if singular {
        remove_mean(&mut r);
    }
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target {
        return Ok((x, 0, rr.sqrt() * weight));
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply_operator(grid, eta, &p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolverError::SolverDiverged { iterations: it, residual: rr.sqrt() * weight });
        }
        let alpha = rr / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        if singular {
            remove_mean(&mut r);
        }
        let rr_new = dot(&r, &r);
        if !rr_new.is_finite() {
            return Err(SolverError::NonFiniteField("linear solver residual"));
        }
        if rr_new.sqrt() <= target {
            if singular {
                remove_mean(&mut x);
            }
            return Ok((x, it, rr_new.sqrt() * weight));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        if singular {
            remove_mean(&mut p);
            remove_mean(&mut x);
        }
    }
    Err(SolverError::SolverDiverged { iterations: max_iter, residual: rr.sqrt() * weight })
}

fn weighted_norm(grid: &Grid, x: &[f64]) -> f64 {
    (dot(x, x) * grid.cell_measure()).sqrt()
}

/// Solves `-Δz + ηz = ψ` with zero flux, `η > 0`.
pub fn solve_elliptic_local(grid: &Grid, eta: f64, psi: &Field) -> Result<Field, SolverError> {
    solve_shifted(grid, eta, psi, None).map(|s| s.solution)
}

/// As [`solve_elliptic_local`], warm-started from `guess`.
pub fn solve_shifted(grid: &Grid, eta: f64, psi: &Field, guess: Option<&Field>) -> Result<LinearSolve, SolverError> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SolverError::NonPositiveEta(eta));
    }
    if !psi.is_finite() {
        return Err(SolverError::NonFiniteField("elliptic right-hand side"));
    }
    let scale = weighted_norm(grid, psi.values());
    let (z, iterations, residual) =
        conjugate_gradient(grid, eta, psi.values(), guess.map(Field::values), scale, false)?;
    Ok(LinearSolve { solution: Field::new(psi.grid().clone(), z)?, iterations, residual })
}

/// Solves `-Δz = ψ - ⟨ψ⟩` with zero flux and `mean(z) = 0`.
pub fn solve_elliptic_nonlocal(grid: &Grid, psi: &Field) -> Result<Field, SolverError> {
    solve_mean_free(grid, psi, None).map(|s| s.solution)
}

pub fn solve_mean_free(grid: &Grid, psi: &Field, guess: Option<&Field>) -> Result<LinearSolve, SolverError> {
    if !psi.is_finite() {
        return Err(SolverError::NonFiniteField("elliptic right-hand side"));
    }
    let mut b = psi.values().to_vec();
    remove_mean(&mut b);
    let scale = weighted_norm(grid, psi.values());
    let (mut z, iterations, residual) = conjugate_gradient(grid, 0.0, &b, guess.map(Field::values), scale, true)?;
    remove_mean(&mut z);
    Ok(LinearSolve { solution: Field::new(psi.grid().clone(), z)?, iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DomainSpec;
    use crate::solver::build_grid;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid_1d(n: usize) -> Arc<Grid> {
        build_grid(&DomainSpec::new_1d(PI, n)).unwrap().into_shared()
    }

    fn residual_norm(grid: &Grid, eta: f64, z: &Field, psi: &[f64]) -> f64 {
        let mut az = vec![0.0; grid.len()];
        apply_operator(grid, eta, z.values(), &mut az);
        let r: Vec<f64> = az.iter().zip(psi).map(|(a, b)| a - b).collect();
        weighted_norm(grid, &r)
    }

    #[test]
    fn constant_source() {
        let g = grid_1d(16);
        let psi = Field::constant(g.clone(), 3.0);
        let z = solve_elliptic_local(&g, 2.0, &psi).unwrap();
        assert!(z.values().iter().all(|&v| (v - 1.5).abs() < 1e-12));

        let z = solve_elliptic_nonlocal(&g, &psi).unwrap();
        assert!(z.sup_abs() < 1e-14);
    }

    #[test]
    fn non_positive_eta_rejected() {
        let g = grid_1d(8);
        let psi = Field::constant(g.clone(), 1.0);
        assert_eq!(solve_elliptic_local(&g, 0.0, &psi), Err(SolverError::NonPositiveEta(0.0)));
    }

    #[test]
    fn residual_meets_tolerance() {
        let g = build_grid(&DomainSpec::new_2d(2.0, 1.0, 24, 12)).unwrap().into_shared();
        let psi = Field::from_fn(g.clone(), |[x, y]| (x * 3.0).sin() + y * y + 1.0);
        let z = solve_elliptic_local(&g, 0.7, &psi).unwrap();
        let tol = RELATIVE_TOLERANCE * (weighted_norm(&g, psi.values()) + 1.0);
        assert!(residual_norm(&g, 0.7, &z, psi.values()) <= tol * 1.01);

        let z = solve_elliptic_nonlocal(&g, &psi).unwrap();
        let centered: Vec<f64> = psi.values().iter().map(|v| v - psi.mean()).collect();
        assert!(residual_norm(&g, 0.0, &z, &centered) <= tol * 1.01);
        assert!(z.mean().abs() <= 1e-10 * (1.0 + z.sup_abs()));
    }

    #[test]
    fn manufactured_cosine() {
        let g = grid_1d(64);
        let exact = Field::from_fn(g.clone(), |[x, _]| x.cos());
        let z = solve_elliptic_local(&g, 1.0, &exact.map(|c| 2.0 * c)).unwrap();
        let err = z.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-3, "err = {err}");

        let z = solve_elliptic_nonlocal(&g, &exact).unwrap();
        let err = z.values().iter().zip(exact.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-3, "err = {err}");
    }

    #[test]
    fn warm_start_at_solution_takes_no_iterations() {
        let g = grid_1d(32);
        let psi = Field::from_fn(g.clone(), |[x, _]| 1.0 + x);
        let first = solve_shifted(&g, 1.0, &psi, None).unwrap();
        let again = solve_shifted(&g, 1.0, &psi, Some(&first.solution)).unwrap();
        assert_eq!(again.iterations, 0);
        assert_eq!(again.solution, first.solution);
    }
}
