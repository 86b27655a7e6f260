//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chemotaxis_core::config::{parse_config, RunSpec};
use chemotaxis_core::diagnostics::{corrector_bounds, corrector_value, total_mass, SeriesVerdict};
use chemotaxis_core::model::{DomainSpec, Variant};
use chemotaxis_core::solver::{
    build_grid, init_state, run, solve_elliptic_local, solve_elliptic_nonlocal, Field, Grid, SimState, Stepper,
};
use chemotaxis_core::theory::{
    classify, classify_exponents, find_pbar, gn_exponents, mass_bound, Assumption, Exponents, GnParams, PbarScan,
    Relation, Verdict,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || format!("took {elapsed:.2?}, limit {limit_secs} s"))
}

// ---------------------------------------------------------------------------
// Independent exponent oracle, written directly from the interpolation
// definitions with P = p + m1 - 1.

struct Raw {
    theta: f64,
    sigma: f64,
    theta1: f64,
    sigma1: f64,
    theta2: Option<f64>,
    theta3: f64,
    theta4: f64,
    sigma2: f64,
}

fn raw_exponents(p: f64, g: &GnParams) -> Raw {
    let GnParams { q, n, m1, m2, m3, k, l } = *g;
    let big_p = p + m1 - 1.0;
    let den = big_p / 2.0 - 0.5 + 1.0 / n as f64;
    let th = |s: f64| (big_p / 2.0 - big_p / (2.0 * s)) / den;
    Raw {
        theta: th(p + m2 + k - 1.0),
        sigma: 2.0 * (p + m2 + k - 1.0) / big_p,
        theta1: th(p + m3 + l - 1.0),
        sigma1: 2.0 * (p + m3 + l - 1.0) / big_p,
        theta2: if l > 1.0 { Some(th(l)) } else { None },
        theta3: th(p),
        theta4: th(q),
        sigma2: 2.0 * (p + q) / big_p,
    }
}

fn raw_quantity(raw: &Raw, rel: Relation) -> Option<f64> {
    Some(match rel {
        Relation::Theta => raw.theta,
        Relation::SigmaTheta => raw.sigma * raw.theta / 2.0,
        Relation::Theta1 => raw.theta1,
        Relation::Sigma1Theta1 => raw.sigma1 * raw.theta1 / 2.0,
        Relation::Theta2 => raw.theta2?,
        Relation::Sigma1Theta2 => raw.sigma1 * raw.theta2? / 2.0,
        Relation::Theta4 => raw.theta4,
        Relation::Sigma2Theta4 => raw.sigma2 * raw.theta4 / 2.0,
        Relation::Theta3 => raw.theta3,
    })
}

fn raw_flag(raw: &Raw, rel: Relation) -> Option<bool> {
    raw_quantity(raw, rel).map(|x| x > 0.0 && x < 1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    while checked < 10_000 {
        let n = rng.gen_range(1..=3u32);
        let (m1, m2, m3) = (rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0));
        let (k, l) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
        let (p, q) = (rng.gen_range(1.01..30.0), rng.gen_range(1.01..10.0));
        let big_p = p + m1 - 1.0;
        if big_p <= 0.0
            || big_p / 2.0 - 0.5 + 1.0 / n as f64 <= 0.0
            || p + m2 + k - 1.0 <= 0.0
            || p + m3 + l - 1.0 <= 0.0
        {
            continue;
        }
        checked += 1;
        let g = GnParams { q, n, m1, m2, m3, k, l };
        let set = gn_exponents(p, &g).map_err(|e| format!("admissible tuple rejected: {e}"))?;
        let den = p + m1 - 2.0 + 2.0 / n as f64;
        let st = set.quantity(Relation::SigmaTheta).unwrap();
        let st1 = set.quantity(Relation::Sigma1Theta1).unwrap();
        ensure(close(st, (p + m2 + k - 2.0) / den, 1e-12), || format!("σθ/2 closed form off at {g:?}, p={p}"))?;
        ensure(close(st1, (p + m3 + l - 2.0) / den, 1e-12), || format!("σ1θ1/2 closed form off at {g:?}, p={p}"))?;
        let raw = raw_exponents(p, &g);
        for rel in Relation::ALL {
            let (ours, theirs) = (set.flag(rel), raw_flag(&raw, rel));
            ensure(ours == theirs, || format!("flag {rel} differs at {g:?}, p={p}: {ours:?} vs {theirs:?}"))?;
            if let (Some(a), Some(b)) = (set.quantity(rel), raw_quantity(&raw, rel)) {
                ensure(close(a, b, 1e-12), || format!("{rel} value {a} vs {b}"))?;
            }
        }
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!("{checked} tuples, closed forms and flags agree ({:.2?})", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut certified = 0;
    let mut worst_pbar: f64 = 0.0;
    while certified < 500 {
        let n = rng.gen_range(1..=3u32);
        let (m1, m2, m3) = (rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0), rng.gen_range(-1.0..3.0));
        let (k, l) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
        let diffusion = m1 + 2.0 / n as f64;
        if !(m2 + k < diffusion && m3 + l < diffusion) {
            continue;
        }
        let q = GnParams::default_q(l, m3);
        let g = GnParams { q, n, m1, m2, m3, k, l };
        let cert = find_pbar(&g, &[], &PbarScan::default()).map_err(|e| format!("find_pbar failed at {g:?}: {e}"))?;
        ensure(cert.samples.len() == 50, || "expected 50 verification samples".into())?;
        ensure(cert.samples.iter().all(|&s| s > cert.pbar && s <= cert.pbar + 50.0), || {
            "samples outside window".into()
        })?;
        for &p in &cert.samples {
            let raw = raw_exponents(p, &g);
            for &rel in &cert.required {
                ensure(raw_flag(&raw, rel) == Some(true), || format!("{rel} fails at p={p} for {g:?}"))?;
            }
        }
        worst_pbar = worst_pbar.max(cert.pbar);
        certified += 1;
    }

    let boundary = GnParams { q: 2.0, n: 2, m1: 1.0, m2: 0.5, m3: 0.5, k: 1.0, l: 1.0 };
    let at = |p: f64| gn_exponents(p, &boundary).map_err(|e| e.to_string());
    let two = at(2.0)?;
    ensure(close(two.quantity(Relation::Sigma2Theta4).unwrap(), 1.0, 1e-12), || "σ2θ4/2 at p=2 is not 1".into())?;
    ensure(two.flag(Relation::Sigma2Theta4) == Some(false), || "boundary case accepted at p=2".into())?;
    ensure(at(3.0)?.all_hold(&Relation::applicable(1.0)), || "boundary case rejected at p=3".into())?;

    within(start.elapsed(), 30.0)?;
    Ok(format!(
        "{certified} tuples certified (max p̄ {worst_pbar:.2}); boundary case fails at 2, holds at 3 ({:.2?})",
        start.elapsed()
    ))
}

// ---------------------------------------------------------------------------
// Simulation helpers

struct ModelText<'a> {
    variant: &'a str,
    tau: u8,
    chi: f64,
    xi: f64,
    exps: [f64; 6], // m1, m2, m3, k, l, r
    lambda: f64,
    mu: f64,
    test_mode: bool,
}

impl Default for ModelText<'_> {
    fn default() -> Self {
        ModelText {
            variant: "local",
            tau: 0,
            chi: 0.5,
            xi: 0.5,
            exps: [1.0, 1.0, 1.0, 1.0, 1.0, 2.0],
            lambda: 1.0,
            mu: 1.0,
            test_mode: false,
        }
    }
}

fn config(model: &ModelText, grid: &str, time: &str, init: &str) -> RunSpec {
    let [m1, m2, m3, k, l, r] = model.exps;
    let mut text = format!(
        "[model]\nvariant = {}\ntau = {}\nchi = {}\nxi = {}\nlambda = {}\nmu = {}\nr = {r}\n\
         m1 = {m1}\nm2 = {m2}\nm3 = {m3}\nalpha = 1\nk = {k}\ngamma0 = 1\nl = {l}\n",
        model.variant, model.tau, model.chi, model.xi, model.lambda, model.mu
    );
    if model.variant == "local" {
        text.push_str("beta = 1\ndelta = 1\n");
    }
    if model.test_mode {
        text.push_str("test_mode = true\n");
    }
    text.push_str(&format!("[grid]\n{grid}\n[time]\n{time}\n[init]\n{init}\n"));
    parse_config(&text).unwrap_or_else(|e| panic!("config rejected: {e}\n{text}"))
}

fn prepare(spec: &RunSpec) -> (Stepper, SimState) {
    let grid = build_grid(&spec.domain).expect("grid").into_shared();
    let stepper = Stepper::new(spec.model.clone(), grid.clone(), spec.step_settings()).expect("stepper");
    let state = init_state(&grid, &spec.init, &spec.model).expect("initial state");
    (stepper, state)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let grids = [
        (
            "dimension = 1\nlengths = 10\ncells = 64",
            "preset = gaussian\ncenter = 5\nwidth = 1\namplitude = 3\nfloor = 0.2",
        ),
        (
            "dimension = 1\nlengths = 10\ncells = 64",
            "preset = gaussian\ncenter = 3\nwidth = 0.7\namplitude = 2\nfloor = 1",
        ),
        (
            "dimension = 2\nlengths = 4, 4\ncells = 24, 24",
            "preset = gaussian\ncenter = 2, 2\nwidth = 0.6\namplitude = 4\nfloor = 0.3",
        ),
    ];
    let kinds = [("local", 0u8), ("local", 1), ("nonlocal", 0)];
    let mut worst: f64 = f64::INFINITY;
    let mut configs = 0;
    for (grid, init) in grids {
        for (variant, tau) in kinds {
            let model = ModelText { variant, tau, exps: [1.0, 1.0, 1.0, 1.0, 1.5, 1.5], ..Default::default() };
            let spec = config(&model, grid, "T = 5", init);
            let (stepper, state) = prepare(&spec);
            let omega = state.grid().measure();
            let bound = mass_bound(1.0, 1.0, 1.5, omega, total_mass(&state.u)).map_err(|e| e.to_string())?;
            let outcome = run(&stepper, state, &spec.run_control(), |_, _| Ok(())).map_err(|e| e.to_string())?;
            let peak = outcome.series.samples.iter().map(|s| s.mass).fold(0.0, f64::max);
            ensure(peak <= 1.05 * bound, || format!("{variant} τ={tau} {grid:?}: mass {peak} above 1.05·{bound}"))?;
            worst = worst.min(1.0 - peak / bound);
            configs += 1;
        }
    }

    let conserving = ModelText {
        chi: 0.0,
        xi: 0.0,
        lambda: 0.0,
        mu: 0.0,
        test_mode: true,
        exps: [1.5, 1.0, 1.0, 1.0, 1.0, 2.0],
        ..Default::default()
    };
    let spec = config(
        &conserving,
        "dimension = 1\nlengths = 10\ncells = 64",
        "T = 1",
        "preset = gaussian\ncenter = 4\nwidth = 1\namplitude = 2\nfloor = 0.1",
    );
    let (stepper, mut state) = prepare(&spec);
    let m0 = total_mass(&state.u);
    for _ in 0..10_000 {
        state = stepper.step(&state).map_err(|e| e.to_string())?;
    }
    let drift = (total_mass(&state.u) - m0).abs() / m0;
    ensure(drift < 1e-8, || format!("test-mode mass drift {drift:e}"))?;
    Ok(format!(
        "{configs} configurations within bound (smallest margin {worst:.3}); test-mode drift {drift:.1e} over 10^4 steps ({:.2?})",
        start.elapsed()
    ))
}

fn max_error(z: &Field, exact: impl Fn([f64; 2]) -> f64) -> f64 {
    z.grid().centers().zip(z.values()).map(|(c, v)| (v - exact(c)).abs()).fold(0.0, f64::max)
}

fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn criterion_4() -> Outcome {
    use std::f64::consts::PI;
    let start = Instant::now();
    let grid_1d = |n: usize| -> Arc<Grid> { build_grid(&DomainSpec::new_1d(PI, n)).unwrap().into_shared() };
    let grid_2d = |n: usize| -> Arc<Grid> { build_grid(&DomainSpec::new_2d(PI, PI, n, n)).unwrap().into_shared() };
    let sizes = [32, 64, 128];
    let mut report = Vec::new();
    let mut cases: Vec<(&str, Vec<f64>)> = Vec::new();

    let mut errs = Vec::new();
    for n in sizes {
        let g = grid_1d(n);
        let psi = Field::from_fn(g.clone(), |[x, _]| 2.0 * x.cos());
        let z = solve_elliptic_local(&g, 1.0, &psi).map_err(|e| e.to_string())?;
        errs.push(max_error(&z, |[x, _]| x.cos()));
    }
    cases.push(("local 1D", errs));

    let mut errs = Vec::new();
    for n in sizes {
        let g = grid_1d(n);
        let psi = Field::from_fn(g.clone(), |[x, _]| x.cos() + 3.0);
        let z = solve_elliptic_nonlocal(&g, &psi).map_err(|e| e.to_string())?;
        errs.push(max_error(&z, |[x, _]| x.cos()));
    }
    cases.push(("nonlocal 1D", errs));

    let mut errs = Vec::new();
    for n in sizes {
        let g = grid_2d(n);
        let psi = Field::from_fn(g.clone(), |[x, y]| 6.0 * x.cos() * (2.0 * y).cos());
        let z = solve_elliptic_local(&g, 1.0, &psi).map_err(|e| e.to_string())?;
        errs.push(max_error(&z, |[x, y]| x.cos() * (2.0 * y).cos()));
    }
    cases.push(("local 2D", errs.clone()));

    let mut errs = Vec::new();
    for n in sizes {
        let g = grid_2d(n);
        let psi = Field::from_fn(g.clone(), |[x, y]| 2.0 * x.cos() * y.cos());
        let z = solve_elliptic_nonlocal(&g, &psi).map_err(|e| e.to_string())?;
        errs.push(max_error(&z, |[x, y]| x.cos() * y.cos()));
    }
    cases.push(("nonlocal 2D", errs));

    for (name, errs) in &cases {
        let orders = observed_orders(errs);
        ensure(orders.iter().all(|&o| o >= 1.9), || format!("{name}: errors {errs:?}, orders {orders:?}"))?;
        report.push(format!("{name} {:.3}/{:.3}", orders[0], orders[1]));
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("orders {} ({:.2?})", report.join(", "), start.elapsed()))
}

/// variant, tau, grid, [m1, m2, m3, k, l, r], lambda, mu
type Equilibrium<'a> = (&'a str, u8, &'a str, [f64; 6], f64, f64);

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cases: [Equilibrium; 5] = [
        ("local", 0u8, "dimension = 1\nlengths = 10\ncells = 64", [1.0, 1.0, 1.0, 1.0, 1.5, 1.5], 2.0, 1.0),
        ("local", 1, "dimension = 1\nlengths = 10\ncells = 64", [-0.5, 0.0, 0.5, 2.0, 1.0, 2.5], 3.0, 0.5),
        ("nonlocal", 0, "dimension = 1\nlengths = 5\ncells = 40", [1.0, 2.0, 1.0, 1.0, 2.0, 2.0], 1.0, 4.0),
        ("local", 0, "dimension = 2\nlengths = 2, 3\ncells = 12, 18", [2.0, 1.0, 0.0, 1.0, 1.0, 3.0], 1.5, 2.0),
        ("local", 1, "dimension = 2\nlengths = 2, 3\ncells = 12, 18", [1.0, 1.0, 1.0, 0.5, 1.5, 1.5], 2.0, 1.0),
    ];
    let mut worst: f64 = 0.0;
    for (variant, tau, grid, exps, lambda, mu) in cases {
        let u_star = (lambda / mu).powf(1.0 / (exps[5] - 1.0));
        let model = ModelText { variant, tau, chi: 2.0, xi: 1.0, exps, lambda, mu, ..Default::default() };
        let spec = config(&model, grid, "T = 100", &format!("preset = constant\nc = {u_star:.17e}"));
        let (stepper, mut state) = prepare(&spec);
        let (v_star, w_star) = if variant == "local" {
            // f(s) = α (s+1)^k, g(s) = γ0 (s+1)^l with α = γ0 = β = δ = 1
            ((u_star + 1.0).powf(exps[3]), (u_star + 1.0).powf(exps[4]))
        } else {
            (0.0, 0.0)
        };
        let dev = |s: &SimState| {
            let d = |f: &Field, c: f64| f.values().iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
            d(&s.u, u_star).max(d(&s.v, v_star)).max(d(&s.w, w_star))
        };
        ensure(dev(&state) <= 1e-12 * u_star.max(v_star).max(w_star).max(1.0), || {
            format!("{variant} τ={tau}: initial state is not the equilibrium ({:e})", dev(&state))
        })?;
        for step in 0..1000 {
            let next = stepper.step(&state).map_err(|e| e.to_string())?;
            let change = next
                .u
                .values()
                .iter()
                .zip(state.u.values())
                .chain(next.v.values().iter().zip(state.v.values()))
                .chain(next.w.values().iter().zip(state.w.values()))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ensure(change <= 1e-12, || format!("{variant} τ={tau} {grid:?}: step {step} moved by {change:e}"))?;
            worst = worst.max(change);
            state = next;
        }
    }
    Ok(format!("{} equilibria held, largest per-step change {worst:.1e} ({:.2?})", cases.len(), start.elapsed()))
}

/// Composite five-point Gauss-Legendre quadrature of `F_j` on `[0, u]`.
fn corrector_quadrature(u: f64, j: i32, p: f64) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let a = p + j as f64 - 3.0;
    let panels = 400;
    let h = u / panels as f64;
    let mut sum = 0.0;
    for i in 0..panels {
        let mid = (i as f64 + 0.5) * h;
        for (x, wgt) in NODES {
            let s = mid + 0.5 * h * x;
            sum += wgt * s * (s + 1.0).powf(a);
        }
    }
    sum * 0.5 * h
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lowest = f64::INFINITY;
    for i in 0..100 {
        let (variant, tau) = match i % 3 {
            0 => ("local", 0u8),
            1 => ("local", 1),
            _ => ("nonlocal", 0),
        };
        let exps = [
            rng.gen_range(-1.0..2.0),
            rng.gen_range(-0.5..2.0),
            rng.gen_range(-0.5..2.0),
            rng.gen_range(0.5..2.5),
            rng.gen_range(0.5..2.5),
            rng.gen_range(1.2..3.0),
        ];
        let model = ModelText {
            variant,
            tau,
            chi: rng.gen_range(0.0..10.0),
            xi: rng.gen_range(0.0..5.0),
            exps,
            lambda: rng.gen_range(0.1..3.0),
            mu: rng.gen_range(0.1..3.0),
            ..Default::default()
        };
        let grid = if i % 4 == 3 {
            "dimension = 2\nlengths = 2, 2\ncells = 12, 12"
        } else {
            "dimension = 1\nlengths = 5\ncells = 48"
        };
        let c = rng.gen_range(0.2..3.0);
        let init = format!("preset = perturbed_constant\nc = {c}\namplitude = {c}\nseed = {i}");
        let spec = config(&model, grid, "T = 1", &init);
        let (stepper, mut state) = prepare(&spec);
        for _ in 0..200 {
            state = match stepper.step(&state) {
                Ok(s) => s,
                // an aborted run has still never produced a negative density
                Err(_) => break,
            };
            let m = state.u.min();
            ensure(m >= 0.0, || format!("run {i}: min u = {m:e} at t = {}", state.t))?;
            lowest = lowest.min(m);
        }
    }

    let mut checked = 0;
    while checked < 10_000 {
        let u = 10f64.powf(rng.gen_range(-4.0..2.0));
        let j = rng.gen_range(-1..=3);
        let p = rng.gen_range(1.01..6.0);
        if p + (j as f64) < 3.0 {
            continue;
        }
        checked += 1;
        let f = corrector_value(u, j, p).map_err(|e| e.to_string())?;
        let (lo, hi) = corrector_bounds(u, j, p).map_err(|e| e.to_string())?;
        let tol = 1e-12 * f.abs().max(1e-300);
        ensure(lo <= f + tol && f <= hi + tol, || format!("sandwich fails: u={u} j={j} p={p}: {lo} ≤ {f} ≤ {hi}"))?;
        let oracle = corrector_quadrature(u, j, p);
        ensure(close(f, oracle, 1e-9) || (f - oracle).abs() <= 1e-9 * oracle.abs(), || {
            format!("F_j(u={u}, j={j}, p={p}) = {f}, quadrature {oracle}")
        })?;
    }
    Ok(format!("100 runs min u {lowest:.2e} ≥ 0; sandwich held on {checked} samples ({:.2?})", start.elapsed()))
}

type Witness = (Variant, u8, Vec<Assumption>);

fn criterion_7() -> Outcome {
    let start = Instant::now();
    // variant, tau, [m1, m2, m3, k, l, r]
    let bounded: [(&str, u8, [f64; 6]); 8] = [
        ("local", 0, [-1.0, 0.0, 0.0, 1.0, 2.0, 1.5]),
        ("local", 0, [1.0, 1.0, 0.0, 1.0, 1.0, 1.5]),
        ("nonlocal", 0, [1.0, 1.0, 1.0, 1.0, 2.0, 1.5]),
        ("nonlocal", 0, [-1.0, 0.0, 0.0, 1.0, 1.0, 2.0]),
        ("local", 1, [-1.0, 0.0, 0.0, 1.0, 1.0, 2.0]),
        ("local", 1, [1.0, 1.0, 0.0, 1.0, 2.0, 1.5]),
        ("local", 1, [1.0, 1.0, 0.0, 1.0, 1.0, 1.5]),
        ("local", 1, [1.0, 0.0, 0.0, 1.0, 2.0, 2.0]),
    ];
    let grid = "dimension = 1\nlengths = 10\ncells = 64";
    let bump = "preset = gaussian\ncenter = 5\nwidth = 1\namplitude = 1\nfloor = 1";
    let mut covered: Vec<Witness> = Vec::new();
    for (variant, tau, exps) in bounded {
        let model = ModelText { variant, tau, exps, ..Default::default() };
        let spec = config(&model, grid, "T = 50", bump);
        let regime = classify(&spec.model).map_err(|e| e.to_string())?;
        let Some(Verdict::BoundedByTheorem { witnesses, .. }) = regime.verdict else {
            return Err(format!("{variant} τ={tau} {exps:?} is not classified Bounded"));
        };
        covered.extend(witnesses.into_iter().map(|w| (spec.model.variant, tau, w)));
        let (stepper, state) = prepare(&spec);
        let outcome = run(&stepper, state, &spec.run_control(), |_, _| Ok(())).map_err(|e| e.to_string())?;
        let verdict = outcome.series.verdict;
        ensure(verdict == Some(SeriesVerdict::Bounded), || format!("{variant} τ={tau} {exps:?}: verdict {verdict:?}"))?;
    }
    use Assumption::*;
    let wanted: Vec<Witness> = vec![
        (Variant::Local, 0, vec![A1]),
        (Variant::Local, 0, vec![A2]),
        (Variant::Local, 0, vec![A3]),
        (Variant::Nonlocal, 0, vec![A1]),
        (Variant::Nonlocal, 0, vec![A2]),
        (Variant::Nonlocal, 0, vec![A3]),
        (Variant::Local, 1, vec![A2, A4]),
        (Variant::Local, 1, vec![A2, A5]),
        (Variant::Local, 1, vec![A3, A4]),
        (Variant::Local, 1, vec![A3, A5]),
    ];
    for w in &wanted {
        ensure(covered.contains(w), || format!("witness {w:?} not exercised"))?;
    }

    let aggregation = ModelText {
        variant: "nonlocal",
        chi: 500.0,
        xi: 1.0,
        exps: [-1.0, 2.0, 1.0, 2.0, 1.0, 1.5],
        ..Default::default()
    };
    let spec =
        config(&aggregation, grid, "T = 1e-5", "preset = gaussian\ncenter = 5\nwidth = 0.5\namplitude = 2\nfloor = 5");
    let regime = classify(&spec.model).map_err(|e| e.to_string())?;
    ensure(regime.verdict == Some(Verdict::NotCovered), || "aggregation set should be NotCovered".into())?;
    let (stepper, state) = prepare(&spec);
    let initial_sup = state.u.sup_abs();
    let outcome = run(&stepper, state, &spec.run_control(), |_, _| Ok(())).map_err(|e| e.to_string())?;
    let peak = outcome.series.samples.iter().map(|s| s.sup_u).fold(0.0, f64::max);
    let growth = peak / initial_sup;
    let verdict = outcome.series.verdict.ok_or("aggregation run has no verdict")?;
    let accepted = match verdict {
        SeriesVerdict::BlowupSuspected(_) => true,
        SeriesVerdict::Inconclusive => growth >= 10.0,
        SeriesVerdict::Bounded => false,
    };
    ensure(accepted, || format!("aggregation run: verdict {verdict:?}, growth {growth:.1}x"))?;
    within(start.elapsed(), 600.0)?;
    Ok(format!(
        "8 bounded runs plateau, aggregation run {verdict} with sup u growth {growth:.1}x ({:.2?})",
        start.elapsed()
    ))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    // Lattice values are multiples of 1/2, so comparisons are done exactly
    // on integers scaled by 2n.
    let halves = |lo: i64, count: i64| (0..count).map(move |i| lo + i);
    let mut points = 0u64;
    let mut mismatches = 0u64;
    for n in 1..=3u32 {
        for m1 in halves(-3, 8) {
            for m2 in halves(-2, 6) {
                for m3 in halves(-2, 6) {
                    for k in halves(1, 5) {
                        for l in halves(1, 5) {
                            for r in halves(3, 5) {
                                points += 1;
                                let e = Exponents {
                                    m1: m1 as f64 / 2.0,
                                    m2: m2 as f64 / 2.0,
                                    m3: m3 as f64 / 2.0,
                                    k: k as f64 / 2.0,
                                    l: l as f64 / 2.0,
                                    r: r as f64 / 2.0,
                                    n,
                                };
                                let ni = n as i64;
                                let attract = ni * (m2 + k);
                                let repel = ni * (m3 + l);
                                let diffusion = ni * m1 + 4;
                                let rr = ni * r;
                                let a =
                                    [attract < repel, attract < rr, attract < diffusion, repel < rr, repel < diffusion];
                                let parabolic_elliptic = a[0] || a[1] || a[2];
                                let fully_parabolic = (a[1] || a[2]) && (a[3] || a[4]);
                                let cases = [
                                    (Variant::Local, 0u8, parabolic_elliptic),
                                    (Variant::Nonlocal, 0, parabolic_elliptic),
                                    (Variant::Local, 1, fully_parabolic),
                                ];
                                for (variant, tau, expected) in cases {
                                    let rep = classify_exponents(variant, tau, &e).map_err(|err| err.to_string())?;
                                    let flags = [rep.a1, rep.a2, rep.a3, rep.a4, rep.a5];
                                    let bounded = rep.verdict.as_ref().is_some_and(Verdict::is_bounded);
                                    if flags != a || bounded != expected {
                                        mismatches += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ensure(points >= 100_000, || format!("lattice has only {points} points"))?;
    ensure(mismatches == 0, || format!("{mismatches} mismatches over {points} points"))?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("{points} lattice points, 0 mismatches ({:.2?})", start.elapsed()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("exponent closed forms", criterion_1),
        ("p̄ certification", criterion_2),
        ("mass bound", criterion_3),
        ("elliptic solver order", criterion_4),
        ("steady-state preservation", criterion_5),
        ("positivity and sandwich", criterion_6),
        ("regime reproduction", criterion_7),
        ("classifier truth table", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {} [{name}]: PASS - {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL - {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
