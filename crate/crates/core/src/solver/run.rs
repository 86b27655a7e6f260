use std::fmt;

use crate::diagnostics::{detect_blowup, Sample, Thresholds, TimeSeries};

use super::{SimState, SolverError, Stepper};

/// Horizon, recording and abort settings for [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunControl {
    pub t_end: f64,
    pub record_interval: f64,
    pub blowup_threshold: f64,
    /// Exponents of the recorded `L^p` norms.
    pub p_list: Vec<f64>,
    /// Exponent of the recorded `φ` functional.
    pub phi_p: f64,
}

impl RunControl {
    /// Records 500 samples over `[0, t_end]`, threshold `1e6`, `p_list = [2]`,
    /// `phi_p = 2`.
    pub fn new(t_end: f64) -> Self {
        RunControl { t_end, record_interval: t_end / 500.0, blowup_threshold: 1e6, p_list: vec![2.0], phi_p: 2.0 }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::BadControl(m));
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("T must be positive, got {}", self.t_end));
        }
        if !(self.record_interval > 0.0) {
            return bad(format!("record_interval must be positive, got {}", self.record_interval));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!("blowup_threshold must be positive, got {}", self.blowup_threshold));
        }
        if let Some(p) = self.p_list.iter().find(|&&p| !(p >= 1.0)) {
            return bad(format!("L^p exponents must be >= 1, got {p}"));
        }
        if !(self.phi_p > 1.0) {
            return bad(format!("phi exponent must be > 1, got {}", self.phi_p));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupReason {
    Threshold { t: f64, sup_u: f64 },
    DtUnderflow { t: f64, dt: f64 },
}

impl fmt::Display for BlowupReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowupReason::Threshold { t, sup_u } => write!(f, "sup u = {sup_u:e} above threshold at t = {t}"),
            BlowupReason::DtUnderflow { t, dt } => write!(f, "dt = {dt:e} below dt_min at t = {t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunVerdict {
    Completed,
    BlowupSuspected(BlowupReason),
}

impl fmt::Display for RunVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunVerdict::Completed => f.write_str("Completed"),
            RunVerdict::BlowupSuspected(r) => write!(f, "BlowupSuspected({r})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Recorded diagnostics, with the series verdict filled in.
    pub series: TimeSeries,
    pub state: SimState,
    pub verdict: RunVerdict,
}

/// Steps until `t_end`, an abort, or an error.
///
/// A sample is recorded at `t = 0`, at the first step reaching each multiple
/// of `record_interval`, and at the final state; `on_record` sees each
/// recorded state.
pub fn run(
    stepper: &Stepper,
    initial: SimState,
    control: &RunControl,
    mut on_record: impl FnMut(&SimState, &Sample) -> Result<(), SolverError>,
) -> Result<RunOutcome, SolverError> {
    control.validate()?;
    let mut series =
        TimeSeries::new(control.p_list.clone(), control.phi_p).map_err(|e| SolverError::BadControl(e.to_string()))?;
    let mut record = |series: &mut TimeSeries, state: &SimState, dt: f64| -> Result<(), SolverError> {
        let mut sample = Sample::of(state, &control.p_list, control.phi_p);
        sample.dt = dt;
        on_record(state, &sample)?;
        series.push(sample).map_err(|e| SolverError::BadControl(e.to_string()))
    };

    let mut state = initial;
    let start = state.t;
    let ri = control.record_interval;
    record(&mut series, &state, state.dt)?;
    let mut last_recorded = state.t;
    let mut next_record = start + ri;

    let verdict = loop {
        if state.u.sup_abs() > control.blowup_threshold {
            break RunVerdict::BlowupSuspected(BlowupReason::Threshold { t: state.t, sup_u: state.u.sup_abs() });
        }
        if state.t >= control.t_end {
            break RunVerdict::Completed;
        }
        match stepper.advance(&state, Some(control.t_end)) {
            Ok(next) => state = next,
            Err(SolverError::DtUnderflow { dt, .. }) => {
                record(&mut series, &state, dt)?;
                last_recorded = state.t;
                break RunVerdict::BlowupSuspected(BlowupReason::DtUnderflow { t: state.t, dt });
            }
            Err(e) => return Err(e),
        }
        if state.t >= next_record {
            record(&mut series, &state, state.dt)?;
            last_recorded = state.t;
            next_record = start + ri * (((state.t - start) / ri).floor() + 1.0);
        }
    };
    if last_recorded < state.t {
        record(&mut series, &state, state.dt)?;
    }

    let thresholds = Thresholds {
        blowup_threshold: control.blowup_threshold,
        dt_min: stepper.settings().dt_min,
        ..Thresholds::default()
    };
    series.verdict = Some(detect_blowup(&series, &thresholds).map_err(|e| SolverError::BadControl(e.to_string()))?);
    Ok(RunOutcome { series, state, verdict })
}
