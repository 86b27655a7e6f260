//! Norms, energy functionals, recorded time series and run verdicts.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::ValidatedModel;
use crate::solver::{Field, SimState};
use crate::theory::{mass_bound, RegimeReport, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("L^p norm needs p >= 1, got {0}")]
    PLessThanOne(f64),
    #[error("phi functional needs p > 1, got {0}")]
    PNotGreaterThanOne(f64),
    #[error("corrector F_j needs p + j - 1 >= 0 and finite input (p = {p}, j = {j}, u = {u})")]
    ExponentDegenerate { p: f64, j: i32, u: f64 },
    #[error("empty time series")]
    EmptySeries,
    #[error("sample time {t} does not follow {previous}")]
    NonIncreasingTime { previous: f64, t: f64 },
    #[error("sample carries {got} L^p norms, series expects {expected}")]
    SampleShape { expected: usize, got: usize },
}

/// Midpoint quadrature `Σ u_i |K_i|`.
pub fn total_mass(field: &Field) -> f64 {
    field.values().iter().sum::<f64>() * field.grid().cell_measure()
}

pub fn lp_norm(field: &Field, p: f64) -> Result<f64, DiagnosticsError> {
    if !(p >= 1.0) {
        return Err(DiagnosticsError::PLessThanOne(p));
    }
    if p.is_infinite() {
        return Ok(sup_norm(field));
    }
    let sum: f64 = field.values().iter().map(|x| x.abs().powf(p)).sum();
    Ok((sum * field.grid().cell_measure()).powf(1.0 / p))
}

pub fn sup_norm(field: &Field) -> f64 {
    field.sup_abs()
}

/// `(1/p) ∫ (u+1)^p`.
pub fn phi_functional(u: &Field, p: f64) -> Result<f64, DiagnosticsError> {
    if !(p > 1.0) {
        return Err(DiagnosticsError::PNotGreaterThanOne(p));
    }
    let sum: f64 = u.values().iter().map(|&x| (x + 1.0).powf(p)).sum();
    Ok(sum * u.grid().cell_measure() / p)
}

/// `((u+1)^c - 1)/c`, continued by `ln(1+u)` at `c = 0`.
fn power_term(u: f64, c: f64) -> f64 {
    let log = u.ln_1p();
    if c == 0.0 {
        log
    } else {
        (c * log).exp_m1() / c
    }
}

/// `F_j(u) = ∫_0^u s (s+1)^(p+j-3) ds` for one value `u >= 0`.
pub fn corrector_value(u: f64, j: i32, p: f64) -> Result<f64, DiagnosticsError> {
    let a = p + j as f64 - 3.0;
    if !(a + 2.0 >= 0.0) || !u.is_finite() || !(u >= 0.0) {
        return Err(DiagnosticsError::ExponentDegenerate { p, j, u });
    }
    if u < 0.25 {
        // binomial series Σ C(a,i) u^(i+2)/(i+2); the closed form cancels here
        let (mut coeff, mut power, mut sum) = (1.0, u * u, 0.0);
        for i in 0..200 {
            let term = coeff * power / (i as f64 + 2.0);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            coeff *= (a - i as f64) / (i as f64 + 1.0);
            power *= u;
        }
        return Ok(sum);
    }
    Ok(power_term(u, a + 2.0) - power_term(u, a + 1.0))
}

/// Lower and upper sandwich bounds `u^e/e` and `((u+1)^e - 1)/e` with
/// `e = p + j - 1 > 0`. The lower bound is valid for `p + j >= 3`.
pub fn corrector_bounds(u: f64, j: i32, p: f64) -> Result<(f64, f64), DiagnosticsError> {
    let e = p + j as f64 - 1.0;
    if !(e > 0.0) || !(u >= 0.0) {
        return Err(DiagnosticsError::ExponentDegenerate { p, j, u });
    }
    Ok((u.powf(e) / e, power_term(u, e)))
}

/// `∫ F_j(u)`, cellwise closed form.
pub fn corrector_functional(u: &Field, j: i32, p: f64) -> Result<f64, DiagnosticsError> {
    let mut sum = 0.0;
    for &x in u.values() {
        sum += corrector_value(x.max(0.0), j, p)?;
    }
    Ok(sum * u.grid().cell_measure())
}

/// One recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub mass: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub sup_w: f64,
    pub dt: f64,
    pub phi: f64,
    /// One entry per exponent of the series' `p_list`.
    pub lp: Vec<f64>,
}

impl Sample {
    /// Exponents are not checked here; [`TimeSeries::new`] does that.
    pub fn of(state: &SimState, p_list: &[f64], phi_p: f64) -> Sample {
        let u = &state.u;
        let cm = u.grid().cell_measure();
        Sample {
            t: state.t,
            mass: total_mass(u),
            sup_u: sup_norm(u),
            sup_v: sup_norm(&state.v),
            sup_w: sup_norm(&state.w),
            dt: state.dt,
            phi: u.values().iter().map(|&x| (x + 1.0).powf(phi_p)).sum::<f64>() * cm / phi_p,
            lp: p_list.iter().map(|&p| lp_norm(u, p).unwrap_or(f64::NAN)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suspicion {
    Threshold,
    DtFloor,
    Growth,
}

impl fmt::Display for Suspicion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suspicion::Threshold => "threshold",
            Suspicion::DtFloor => "dt_min",
            Suspicion::Growth => "growth",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    Bounded,
    BlowupSuspected(Suspicion),
    Inconclusive,
}

impl fmt::Display for SeriesVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesVerdict::Bounded => f.write_str("Bounded"),
            SeriesVerdict::BlowupSuspected(s) => write!(f, "BlowupSuspected({s})"),
            SeriesVerdict::Inconclusive => f.write_str("Inconclusive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub p_list: Vec<f64>,
    pub phi_p: f64,
    pub samples: Vec<Sample>,
    pub verdict: Option<SeriesVerdict>,
}

impl TimeSeries {
    pub fn new(p_list: Vec<f64>, phi_p: f64) -> Result<Self, DiagnosticsError> {
        if let Some(&p) = p_list.iter().find(|&&p| !(p >= 1.0)) {
            return Err(DiagnosticsError::PLessThanOne(p));
        }
        if !(phi_p > 1.0) {
            return Err(DiagnosticsError::PNotGreaterThanOne(phi_p));
        }
        Ok(TimeSeries { p_list, phi_p, samples: Vec::new(), verdict: None })
    }

    pub fn push(&mut self, sample: Sample) -> Result<(), DiagnosticsError> {
        if sample.lp.len() != self.p_list.len() {
            return Err(DiagnosticsError::SampleShape { expected: self.p_list.len(), got: sample.lp.len() });
        }
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(DiagnosticsError::NonIncreasingTime { previous: last.t, t: sample.t });
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("t,mass,sup_u,sup_v,sup_w,dt,phi_p");
        for p in &self.p_list {
            let _ = write!(h, ",lp_{p}");
        }
        h
    }

    /// Header, one row per sample, and a `# verdict=` line when set.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for s in &self.samples {
            let _ = write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.mass, s.sup_u, s.sup_v, s.sup_w, s.dt, s.phi
            );
            for x in &s.lp {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        if let Some(v) = self.verdict {
            let _ = writeln!(out, "# verdict={v}");
        }
        out
    }
}

/// Parameters of [`detect_blowup`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub blowup_threshold: f64,
    pub dt_min: f64,
    pub growth_factor: f64,
    /// Fraction of trailing samples searched for growth.
    pub tail_fraction: f64,
    pub plateau_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            blowup_threshold: 1e6,
            dt_min: 1e-12,
            growth_factor: 10.0,
            tail_fraction: 0.1,
            plateau_tolerance: 1e-3,
        }
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Classifies a recorded series by its `sup u` history.
///
/// * `BlowupSuspected` if any `sup u` exceeds the threshold (or is not
///   finite), any step size fell below `dt_min`, or some tail sample is a
///   new record that is at least `growth_factor` times the smallest tail
///   sample before it. The tail is the last `max(2, ⌈tail_fraction·N⌉)`
///   samples.
/// * `Bounded` if the maximum over the second half is within
///   `1 + plateau_tolerance` of the maximum over the first half.
/// * `Inconclusive` otherwise.
pub fn detect_blowup(series: &TimeSeries, th: &Thresholds) -> Result<SeriesVerdict, DiagnosticsError> {
    let samples = &series.samples;
    if samples.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let sup: Vec<f64> = samples.iter().map(|s| s.sup_u).collect();
    if sup.iter().any(|&s| !(s <= th.blowup_threshold)) {
        return Ok(SeriesVerdict::BlowupSuspected(Suspicion::Threshold));
    }
    if samples.iter().any(|s| s.dt > 0.0 && s.dt < th.dt_min) {
        return Ok(SeriesVerdict::BlowupSuspected(Suspicion::DtFloor));
    }

    let n = sup.len();
    let tail = ((th.tail_fraction * n as f64).ceil() as usize).max(2).min(n);
    let (before, window) = sup.split_at(n - tail);
    let mut record = max_of(before) * (1.0 + th.plateau_tolerance);
    let mut running_min = f64::INFINITY;
    for &s in window {
        running_min = running_min.min(s);
        if s > record && s > 0.0 && s >= th.growth_factor * running_min {
            return Ok(SeriesVerdict::BlowupSuspected(Suspicion::Growth));
        }
        record = record.max(s);
    }

    let mid = n / 2;
    let first = &sup[..mid.max(1)];
    let second = &sup[mid..];
    if max_of(second) <= (1.0 + th.plateau_tolerance) * max_of(first) {
        Ok(SeriesVerdict::Bounded)
    } else {
        Ok(SeriesVerdict::Inconclusive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    /// Theory and run both say bounded.
    Agreement,
    /// Theory says bounded, the run suspects blow-up.
    Tension,
    /// Theory says bounded, the run shows no plateau yet.
    Unresolved,
    /// The regime is not covered by theory.
    NoClaim,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub consistency: Consistency,
    pub series_verdict: SeriesVerdict,
    /// Uniform mass bound `M`, when `λ, μ > 0`.
    pub mass_bound: Option<f64>,
    /// `1 - max recorded mass / M`; negative means the bound is violated.
    pub mass_margin: Option<f64>,
    pub advice: Option<String>,
}

/// Compares a finished run against the theory-layer regime.
pub fn boundedness_report(
    series: &TimeSeries,
    regime: &RegimeReport,
    model: &ValidatedModel,
    omega_measure: f64,
    thresholds: &Thresholds,
) -> Result<BoundednessReport, DiagnosticsError> {
    let series_verdict = match series.verdict {
        Some(v) => v,
        None => detect_blowup(series, thresholds)?,
    };
    let theory_bounded = matches!(regime.verdict, Some(Verdict::BoundedByTheorem { .. }));
    let (consistency, advice) = match (theory_bounded, series_verdict) {
        (false, _) => (Consistency::NoClaim, None),
        (true, SeriesVerdict::Bounded) => (Consistency::Agreement, None),
        (true, SeriesVerdict::BlowupSuspected(_)) => (
            Consistency::Tension,
            Some("theory guarantees boundedness: refine the grid, lower cfl, or suspect a solver defect".to_string()),
        ),
        (true, SeriesVerdict::Inconclusive) => {
            (Consistency::Unresolved, Some("no plateau yet: extend the horizon T".to_string()))
        }
    };
    let initial_mass = series.samples[0].mass;
    let bound = if model.lambda > 0.0 && model.mu > 0.0 {
        mass_bound(model.lambda, model.mu, model.r, omega_measure, initial_mass).ok()
    } else {
        None
    };
    let max_mass = max_of(&series.samples.iter().map(|s| s.mass).collect::<Vec<_>>());
    Ok(BoundednessReport {
        consistency,
        series_verdict,
        mass_bound: bound,
        mass_margin: bound.map(|m| 1.0 - max_mass / m),
        advice,
    })
}
