//! Executable boundedness hypotheses.
//!
//! Five strict inequalities between the growth exponents decide which
//! boundedness result applies. For `τ = 0` (local or nonlocal) one of
//! A1, A2, A3 suffices; for `τ = 1` (local only) one of A2, A3 is needed
//! together with one of A4, A5. The module also carries the uniform mass
//! bound and the Gagliardo–Nirenberg interpolation exponents used by the
//! a priori estimates, with a scan for the threshold `p̄` past which every
//! exponent relation holds.

use std::fmt;

use thiserror::Error;

use crate::model::{ModelSpec, ValidatedModel, Variant};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("invalid hypothesis parameter `{name}` = {value}")]
    InvalidHypothesisParameter { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("degenerate denominator `{which}` = {value}")]
    DegenerateDenominator { which: &'static str, value: f64 },
    #[error("no p̄ within the scan up to p = {p_max}; `{relation}` still violated (value {value})")]
    NotFoundWithinScan { p_max: f64, relation: Relation, value: f64 },
    #[error("relation `{0}` is undefined for l ≤ 1")]
    RelationUndefined(Relation),
    #[error("classification refuses test-mode model with λ = {lambda}, μ = {mu}")]
    TestModeModel { lambda: f64, mu: f64 },
}

/// One of the five structural assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
    A5,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// `τ = 0`, local and nonlocal: one of A1, A2, A3.
    ParabolicElliptic,
    /// `τ = 1`, local: one of A2, A3 together with one of A4, A5.
    FullyParabolic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// Hypotheses hold. Each witness is a set of assumptions that suffices on
    /// its own (singletons for `τ = 0`, pairs for `τ = 1`).
    BoundedByTheorem {
        theorem: Theorem,
        witnesses: Vec<Vec<Assumption>>,
    },
    NotCovered,
}

impl Verdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Verdict::BoundedByTheorem { .. })
    }

    /// Witness list rendered as `A1|A3` or `A2+A5|A3+A4`; empty when not covered.
    pub fn witness_label(&self) -> String {
        match self {
            Verdict::NotCovered => String::new(),
            Verdict::BoundedByTheorem { witnesses, .. } => witnesses
                .iter()
                .map(|w| w.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("+"))
                .collect::<Vec<_>>()
                .join("|"),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::BoundedByTheorem { .. } => "Bounded",
            Verdict::NotCovered => "NotCovered",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub a4: bool,
    pub a5: bool,
    /// `None` until [`classify`] sets it.
    pub verdict: Option<Verdict>,
    /// Informational pointers only; never asserted.
    pub notes: Vec<String>,
}

impl RegimeReport {
    pub fn holds(&self, a: Assumption) -> bool {
        match a {
            Assumption::A1 => self.a1,
            Assumption::A2 => self.a2,
            Assumption::A3 => self.a3,
            Assumption::A4 => self.a4,
            Assumption::A5 => self.a5,
        }
    }

    /// `a1,a2,a3,a4,a5,verdict,witness`
    pub fn csv_row(&self) -> String {
        let verdict = self.verdict.as_ref();
        format!(
            "{},{},{},{},{},{},{}",
            self.a1,
            self.a2,
            self.a3,
            self.a4,
            self.a5,
            verdict.map(|v| v.to_string()).unwrap_or_default(),
            verdict.map(|v| v.witness_label()).unwrap_or_default()
        )
    }
}

pub const REGIME_CSV_HEADER: &str = "a1,a2,a3,a4,a5,verdict,witness";

/// Exponent data entering the hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub k: f64,
    pub l: f64,
    pub r: f64,
    pub n: u32,
}

impl Exponents {
    pub fn of(spec: &ModelSpec) -> Self {
        Exponents { m1: spec.m1, m2: spec.m2, m3: spec.m3, k: spec.k(), l: spec.l(), r: spec.r, n: spec.n }
    }
}

pub fn check_assumptions(e: &Exponents) -> Result<RegimeReport, TheoryError> {
    let bad = |name, value| Err(TheoryError::InvalidHypothesisParameter { name, value });
    if !(e.k > 0.0) || !e.k.is_finite() {
        return bad("k", e.k);
    }
    if !(e.l > 0.0) || !e.l.is_finite() {
        return bad("l", e.l);
    }
    if !(e.r > 1.0) || !e.r.is_finite() {
        return bad("r", e.r);
    }
    if e.n == 0 {
        return bad("n", 0.0);
    }
    for (name, value) in [("m1", e.m1), ("m2", e.m2), ("m3", e.m3)] {
        if !value.is_finite() {
            return bad(name, value);
        }
    }
    let attract = e.m2 + e.k;
    let repel = e.m3 + e.l;
    let diffusion = e.m1 + 2.0 / e.n as f64;
    Ok(RegimeReport {
        a1: attract < repel,
        a2: attract < e.r,
        a3: attract < diffusion,
        a4: repel < e.r,
        a5: repel < diffusion,
        verdict: None,
        notes: Vec::new(),
    })
}

/// Verdict from exponents alone; the single source of truth for
/// [`classify`] and the command line.
pub fn classify_exponents(variant: Variant, tau: u8, e: &Exponents) -> Result<RegimeReport, TheoryError> {
    if tau > 1 {
        return Err(TheoryError::InvalidHypothesisParameter { name: "tau", value: tau as f64 });
    }
    if variant == Variant::Nonlocal && tau == 1 {
        return Err(TheoryError::InvalidHypothesisParameter { name: "tau", value: 1.0 });
    }
    let mut report = check_assumptions(e)?;
    let witnesses: Vec<Vec<Assumption>> = if tau == 0 {
        [Assumption::A1, Assumption::A2, Assumption::A3]
            .into_iter()
            .filter(|&a| report.holds(a))
            .map(|a| vec![a])
            .collect()
    } else {
        let mut pairs = Vec::new();
        for first in [Assumption::A2, Assumption::A3] {
            for second in [Assumption::A4, Assumption::A5] {
                if report.holds(first) && report.holds(second) {
                    pairs.push(vec![first, second]);
                }
            }
        }
        pairs
    };
    let theorem = if tau == 0 { Theorem::ParabolicElliptic } else { Theorem::FullyParabolic };
    report.verdict =
        Some(if witnesses.is_empty() { Verdict::NotCovered } else { Verdict::BoundedByTheorem { theorem, witnesses } });
    Ok(report)
}

/// Regime of a validated model, with informational notes about known
/// results outside the covered hypotheses.
pub fn classify(model: &ValidatedModel) -> Result<RegimeReport, TheoryError> {
    let spec = model.spec();
    if spec.lambda <= 0.0 || spec.mu <= 0.0 {
        return Err(TheoryError::TestModeModel { lambda: spec.lambda, mu: spec.mu });
    }
    let e = Exponents::of(spec);
    let mut report = classify_exponents(spec.variant, spec.tau, &e)?;

    let attract_strength = spec.chi * spec.attractant.envelope().upper(0.0);
    let repel_strength = spec.xi * spec.repellent.envelope().lower(0.0);
    report.notes.push(format!("attraction-repulsion balance χα - ξγ0 = {}", attract_strength - repel_strength));
    if !report.verdict.as_ref().is_some_and(Verdict::is_bounded) {
        let n = e.n as f64;
        if spec.variant == Variant::Nonlocal && e.k > 2.0 / n && e.k > e.l {
            report.notes.push(
                "nonlocal production with k > 2/n and k > l: unbounded solutions are known without logistic damping"
                    .into(),
            );
        }
        report.notes.push("not covered: no boundedness claim and no blow-up claim".into());
    }
    Ok(report)
}

/// Uniform bound on `∫u`: the larger of the initial mass and
/// `(λ/μ · |Ω|^(r-1))^(1/(r-1))`.
pub fn mass_bound(lambda: f64, mu: f64, r: f64, omega_measure: f64, initial_mass: f64) -> Result<f64, TheoryError> {
    for (name, value) in [("lambda", lambda), ("mu", mu), ("omega_measure", omega_measure)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(TheoryError::NonPositiveParameter { name, value });
        }
    }
    if !(initial_mass >= 0.0) || !initial_mass.is_finite() {
        return Err(TheoryError::NonPositiveParameter { name: "initial_mass", value: initial_mass });
    }
    if !(r > 1.0) {
        return Err(TheoryError::InvalidHypothesisParameter { name: "r", value: r });
    }
    let logistic = (lambda / mu * omega_measure.powf(r - 1.0)).powf(1.0 / (r - 1.0));
    Ok(initial_mass.max(logistic))
}

/// Interpolation relation between exponents; each requires its quantity to
/// lie strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Theta,
    SigmaTheta,
    Theta1,
    Sigma1Theta1,
    /// Defined only for `l > 1`.
    Theta2,
    /// Defined only for `l > 1`.
    Sigma1Theta2,
    Theta4,
    Sigma2Theta4,
    Theta3,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::Theta,
        Relation::SigmaTheta,
        Relation::Theta1,
        Relation::Sigma1Theta1,
        Relation::Theta2,
        Relation::Sigma1Theta2,
        Relation::Theta4,
        Relation::Sigma2Theta4,
        Relation::Theta3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Relation::Theta => "theta",
            Relation::SigmaTheta => "sigma_theta",
            Relation::Theta1 => "theta1",
            Relation::Sigma1Theta1 => "sigma1_theta1",
            Relation::Theta2 => "theta2",
            Relation::Sigma1Theta2 => "sigma1_theta2",
            Relation::Theta4 => "theta4",
            Relation::Sigma2Theta4 => "sigma2_theta4",
            Relation::Theta3 => "theta3",
        }
    }

    pub fn needs_l_above_one(&self) -> bool {
        matches!(self, Relation::Theta2 | Relation::Sigma1Theta2)
    }

    /// Relations defined for repellent exponent `l`.
    pub fn applicable(l: f64) -> Vec<Relation> {
        Relation::ALL.into_iter().filter(|r| l > 1.0 || !r.needs_l_above_one()).collect()
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Relation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| format!("unknown relation `{s}`"))
    }
}

/// Inputs of the interpolation exponents (everything except `p`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnParams {
    pub q: f64,
    pub n: u32,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub k: f64,
    pub l: f64,
}

impl GnParams {
    /// `max{l, m3+l-1} + 1`.
    pub fn default_q(l: f64, m3: f64) -> f64 {
        l.max(m3 + l - 1.0) + 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSet {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    pub sigma: f64,
    pub theta1: f64,
    pub sigma1: f64,
    pub theta2: Option<f64>,
    pub theta3: f64,
    pub theta4: f64,
    pub sigma2: f64,
    flags: [Option<bool>; 9],
}

impl ExponentSet {
    /// Value whose membership in `(0,1)` the relation asserts; `None` when
    /// undefined.
    pub fn quantity(&self, rel: Relation) -> Option<f64> {
        Some(match rel {
            Relation::Theta => self.theta,
            Relation::SigmaTheta => self.sigma * self.theta / 2.0,
            Relation::Theta1 => self.theta1,
            Relation::Sigma1Theta1 => self.sigma1 * self.theta1 / 2.0,
            Relation::Theta2 => self.theta2?,
            Relation::Sigma1Theta2 => self.sigma1 * self.theta2? / 2.0,
            Relation::Theta4 => self.theta4,
            Relation::Sigma2Theta4 => self.sigma2 * self.theta4 / 2.0,
            Relation::Theta3 => self.theta3,
        })
    }

    /// `None` for relations undefined at this `l`.
    pub fn flag(&self, rel: Relation) -> Option<bool> {
        self.flags[rel as usize]
    }

    pub fn all_hold(&self, required: &[Relation]) -> bool {
        required.iter().all(|&r| self.flag(r) == Some(true))
    }

    pub fn csv_header() -> String {
        let mut cols = vec![
            "p",
            "q",
            "theta",
            "sigma",
            "theta1",
            "sigma1",
            "theta2",
            "theta3",
            "theta4",
            "sigma2",
            "sigma_theta_half",
            "sigma1_theta1_half",
            "sigma1_theta2_half",
            "sigma2_theta4_half",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        cols.extend(Relation::ALL.iter().map(|r| format!("{}_ok", r.name())));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let num = |x: f64| format!("{x:.16e}");
        let opt = |x: Option<f64>| x.map(num).unwrap_or_else(|| "NA".into());
        let mut cols = vec![
            num(self.p),
            num(self.q),
            num(self.theta),
            num(self.sigma),
            num(self.theta1),
            num(self.sigma1),
            opt(self.theta2),
            num(self.theta3),
            num(self.theta4),
            num(self.sigma2),
            opt(self.quantity(Relation::SigmaTheta)),
            opt(self.quantity(Relation::Sigma1Theta1)),
            opt(self.quantity(Relation::Sigma1Theta2)),
            opt(self.quantity(Relation::Sigma2Theta4)),
        ];
        cols.extend(Relation::ALL.iter().map(|&r| match self.flag(r) {
            Some(b) => b.to_string(),
            None => "NA".into(),
        }));
        cols.join(",")
    }
}

fn open_unit(x: f64) -> bool {
    0.0 < x && x < 1.0
}

/// Evaluates every interpolation exponent at `p`.
pub fn gn_exponents(p: f64, g: &GnParams) -> Result<ExponentSet, TheoryError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(TheoryError::InvalidHypothesisParameter { name: "p", value: p });
    }
    if !(g.q > 1.0) || !g.q.is_finite() {
        return Err(TheoryError::InvalidHypothesisParameter { name: "q", value: g.q });
    }
    if g.n == 0 {
        return Err(TheoryError::InvalidHypothesisParameter { name: "n", value: 0.0 });
    }
    if !(g.k > 0.0) || !(g.l > 0.0) {
        return Err(TheoryError::InvalidHypothesisParameter { name: "k,l", value: g.k.min(g.l) });
    }
    let n = g.n as f64;
    // exponent of (u+1) whose gradient is controlled
    let half_power = (p + g.m1 - 1.0) / 2.0;
    let attract = p + g.m2 + g.k - 1.0;
    let repel = p + g.m3 + g.l - 1.0;
    let denom = half_power - 0.5 + 1.0 / n;
    for (which, value) in
        [("p+m1-1", 2.0 * half_power), ("p+m2+k-1", attract), ("p+m3+l-1", repel), ("(p+m1-1)/2-1/2+1/n", denom)]
    {
        if !(value > 0.0) {
            return Err(TheoryError::DegenerateDenominator { which, value });
        }
    }
    // θ-type exponent for the target Lebesgue power `s` of (u+1)
    let theta_for = |s: f64| (half_power - half_power / s) / denom;

    let theta = theta_for(attract);
    let sigma = 2.0 * attract / (p + g.m1 - 1.0);
    let theta1 = theta_for(repel);
    let sigma1 = 2.0 * repel / (p + g.m1 - 1.0);
    let theta2 = (g.l > 1.0).then(|| theta_for(g.l));
    let theta3 = theta_for(p);
    let theta4 = theta_for(g.q);
    let sigma2 = 2.0 * (p + g.q) / (p + g.m1 - 1.0);

    let mut set =
        ExponentSet { p, q: g.q, theta, sigma, theta1, sigma1, theta2, theta3, theta4, sigma2, flags: [None; 9] };
    for rel in Relation::ALL {
        set.flags[rel as usize] = set.quantity(rel).map(open_unit);
    }
    Ok(set)
}

/// Grid and verification window of the `p̄` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbarScan {
    pub dp: f64,
    pub p_max: f64,
    /// Width of the forward verification window.
    pub window: f64,
    /// Points sampled in `(p̄, p̄ + window]`.
    pub samples: usize,
}

impl Default for PbarScan {
    fn default() -> Self {
        PbarScan { dp: 0.01, p_max: 1e4, window: 50.0, samples: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbarCertificate {
    pub pbar: f64,
    pub required: Vec<Relation>,
    /// Points in `(p̄, p̄ + window]` at which every required relation was verified.
    pub samples: Vec<f64>,
}

/// Smallest scan point `p̄ = 1 + j·dp` such that the required relations hold
/// at `p̄` and at every sample of the forward window.
///
/// An empty `required` slice means every relation applicable at this `l`.
pub fn find_pbar(g: &GnParams, required: &[Relation], scan: &PbarScan) -> Result<PbarCertificate, TheoryError> {
    let required: Vec<Relation> = if required.is_empty() {
        Relation::applicable(g.l)
    } else {
        if let Some(&r) = required.iter().find(|r| r.needs_l_above_one() && g.l <= 1.0) {
            return Err(TheoryError::RelationUndefined(r));
        }
        required.to_vec()
    };
    if !(scan.dp > 0.0) || !(scan.window > 0.0) || scan.samples == 0 {
        return Err(TheoryError::InvalidHypothesisParameter { name: "scan", value: scan.dp });
    }
    // surface parameter errors (q, n, k, l) before scanning
    if let Err(e @ TheoryError::InvalidHypothesisParameter { .. }) = gn_exponents(2.0, g) {
        return Err(e);
    }

    let holds_at = |p: f64| gn_exponents(p, g).map(|set| set.all_hold(&required)).unwrap_or(false);
    let window: Vec<f64> = (1..=scan.samples).map(|i| scan.window * i as f64 / scan.samples as f64).collect();

    let steps = ((scan.p_max - 1.0) / scan.dp).floor() as u64;
    for j in 1..=steps {
        let pbar = 1.0 + j as f64 * scan.dp;
        if !holds_at(pbar) {
            continue;
        }
        let samples: Vec<f64> = window.iter().map(|w| pbar + w).collect();
        if samples.iter().all(|&p| holds_at(p)) {
            return Ok(PbarCertificate { pbar, required, samples });
        }
    }

    // report the relation that fails at the end of the scan (or the first
    // undefined one)
    let (relation, value) = match gn_exponents(scan.p_max, g) {
        Ok(set) => required
            .iter()
            .find(|&&r| set.flag(r) != Some(true))
            .map(|&r| (r, set.quantity(r).unwrap_or(f64::NAN)))
            .unwrap_or((required[0], f64::NAN)),
        Err(_) => (required[0], f64::NAN),
    };
    Err(TheoryError::NotFoundWithinScan { p_max: scan.p_max, relation, value })
}
