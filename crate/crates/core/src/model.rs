//! Problem data for the local and nonlocal attraction-repulsion systems.
//!
//! The cell density `u` obeys
//!
//! ```text
//! u_t = ∇·((u+1)^(m1-1)∇u - χ u (u+1)^(m2-1)∇v + ξ u (u+1)^(m3-1)∇w) + λu - μu^r
//! ```
//!
//! while the attractant `v` and repellent `w` are either produced locally
//! (`τ v_t = Δv - βv + f(u)`, same for `w` with `δ`, `g`) or through the
//! spatial mean (`0 = Δv - ⟨f(u)⟩ + f(u)` with `∫v = 0`).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("r > 1 required, got r = {0}")]
    RNotGreaterThanOne(f64),
    #[error("production law leaves its envelope at s = {s}: value {value} not in [{lower}, {upper}]")]
    EnvelopeViolated { s: f64, value: f64, lower: f64, upper: f64 },
    #[error("production law evaluated at negative argument {0}")]
    NegativeArgument(f64),
    #[error("tabulated law: {0}")]
    BadTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Attractant,
    Repellent,
}

/// Parameters of the power-law envelope bounding a production rate.
///
/// Attractants satisfy `0 ≤ f(s) ≤ α(s+1)^k`; repellents satisfy
/// `γ0(s+1)^l ≤ g(s) ≤ γ1(s+1)^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Attractant { alpha: f64, k: f64 },
    Repellent { gamma0: f64, gamma1: f64, l: f64 },
}

impl Envelope {
    pub fn role(&self) -> Role {
        match self {
            Envelope::Attractant { .. } => Role::Attractant,
            Envelope::Repellent { .. } => Role::Repellent,
        }
    }

    /// Growth exponent (`k` or `l`).
    pub fn exponent(&self) -> f64 {
        match *self {
            Envelope::Attractant { k, .. } => k,
            Envelope::Repellent { l, .. } => l,
        }
    }

    pub fn lower(&self, s: f64) -> f64 {
        match *self {
            Envelope::Attractant { .. } => 0.0,
            Envelope::Repellent { gamma0, l, .. } => gamma0 * (s + 1.0).powf(l),
        }
    }

    pub fn upper(&self, s: f64) -> f64 {
        match *self {
            Envelope::Attractant { alpha, k } => alpha * (s + 1.0).powf(k),
            Envelope::Repellent { gamma1, l, .. } => gamma1 * (s + 1.0).powf(l),
        }
    }

    pub fn midpoint(&self, s: f64) -> f64 {
        0.5 * (self.lower(s) + self.upper(s))
    }

    fn validate(&self) -> Result<(), ModelError> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::NonPositiveParameter { name, value })
            }
        };
        match *self {
            Envelope::Attractant { alpha, k } => {
                positive("alpha", alpha)?;
                positive("k", k)
            }
            Envelope::Repellent { gamma0, gamma1, l } => {
                positive("gamma0", gamma0)?;
                positive("gamma1", gamma1)?;
                positive("l", l)?;
                if gamma0 > gamma1 {
                    return Err(ModelError::NonPositiveParameter { name: "gamma1 - gamma0", value: gamma1 - gamma0 });
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawKind {
    /// Closed-form power law.
    Prototype,
    /// Samples `(s_i, value_i)`, strictly increasing in `s`, starting at `s = 0`.
    Tabulated(Vec<(f64, f64)>),
}

/// Specification of a production law before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct LawParams {
    pub envelope: Envelope,
    pub kind: LawKind,
}

/// Signal production rate `f` (attractant) or `g` (repellent).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductionLaw {
    envelope: Envelope,
    kind: LawKind,
}

/// Builds a production law after checking positivity and, for tabulated
/// laws, the envelope at every sample.
pub fn make_production_law(role: Role, params: LawParams) -> Result<ProductionLaw, ModelError> {
    let LawParams { envelope, kind } = params;
    if envelope.role() != role {
        return Err(ModelError::BadTable(format!(
            "envelope parameters describe a {:?} law, requested {:?}",
            envelope.role(),
            role
        )));
    }
    envelope.validate()?;
    if let LawKind::Tabulated(samples) = &kind {
        if samples.is_empty() {
            return Err(ModelError::BadTable("no samples".into()));
        }
        if samples[0].0 != 0.0 {
            return Err(ModelError::BadTable("first sample must sit at s = 0".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ModelError::BadTable("sample abscissae must increase strictly".into()));
        }
        for &(s, value) in samples {
            let (lower, upper) = (envelope.lower(s), envelope.upper(s));
            if !(value >= lower && value <= upper) {
                return Err(ModelError::EnvelopeViolated { s, value, lower, upper });
            }
        }
    }
    Ok(ProductionLaw { envelope, kind })
}

impl ProductionLaw {
    pub fn prototype_attractant(alpha: f64, k: f64) -> Result<Self, ModelError> {
        make_production_law(
            Role::Attractant,
            LawParams { envelope: Envelope::Attractant { alpha, k }, kind: LawKind::Prototype },
        )
    }

    pub fn prototype_repellent(gamma0: f64, gamma1: f64, l: f64) -> Result<Self, ModelError> {
        make_production_law(
            Role::Repellent,
            LawParams { envelope: Envelope::Repellent { gamma0, gamma1, l }, kind: LawKind::Prototype },
        )
    }

    pub fn role(&self) -> Role {
        self.envelope.role()
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn eval(&self, s: f64) -> Result<f64, ModelError> {
        if !(s >= 0.0) {
            return Err(ModelError::NegativeArgument(s));
        }
        Ok(self.eval_unchecked(s))
    }

    /// Evaluation for arguments already known to be nonnegative.
    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        match &self.kind {
            LawKind::Prototype => match self.envelope {
                Envelope::Attractant { alpha, k } => alpha * (s + 1.0).powf(k),
                Envelope::Repellent { gamma0, gamma1, l } => {
                    let gamma = if gamma0 == gamma1 { gamma1 } else { 0.5 * (gamma0 + gamma1) };
                    gamma * (s + 1.0).powf(l)
                }
            },
            LawKind::Tabulated(samples) => {
                let idx = samples.partition_point(|&(x, _)| x <= s);
                if idx >= samples.len() {
                    if s == samples[samples.len() - 1].0 {
                        return samples[samples.len() - 1].1;
                    }
                    return self.envelope.midpoint(s);
                }
                // idx >= 1 because samples[0].0 == 0 <= s
                let (s0, f0) = samples[idx - 1];
                let (s1, f1) = samples[idx];
                let t = (s - s0) / (s1 - s0);
                let value = f0 + t * (f1 - f0);
                value.clamp(self.envelope.lower(s), self.envelope.upper(s))
            }
        }
    }
}

pub fn eval_production(law: &ProductionLaw, s: f64) -> Result<f64, ModelError> {
    law.eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Local,
    Nonlocal,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Local => "local",
            Variant::Nonlocal => "nonlocal",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "local" => Ok(Variant::Local),
            "nonlocal" => Ok(Variant::Nonlocal),
            other => Err(format!("unknown variant `{other}` (expected local|nonlocal)")),
        }
    }
}

/// Full parameterization of a chemotaxis system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: Variant,
    /// 0 for parabolic-elliptic-elliptic, 1 for fully parabolic.
    pub tau: u8,
    pub chi: f64,
    pub xi: f64,
    pub lambda: f64,
    pub mu: f64,
    pub r: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub beta: f64,
    pub delta: f64,
    pub attractant: ProductionLaw,
    pub repellent: ProductionLaw,
    /// Spatial dimension.
    pub n: u32,
    /// Admits `λ = 0` or `μ = 0` (conservation checks).
    pub test_mode: bool,
}

impl ModelSpec {
    pub fn k(&self) -> f64 {
        self.attractant.envelope().exponent()
    }

    pub fn l(&self) -> f64 {
        self.repellent.envelope().exponent()
    }

    /// Positive equilibrium `(λ/μ)^(1/(r-1))` of the logistic source.
    pub fn logistic_equilibrium(&self) -> f64 {
        (self.lambda / self.mu).powf(1.0 / (self.r - 1.0))
    }
}

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelIssue {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ModelIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid model: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ModelIssues(pub Vec<ModelIssue>);

/// A [`ModelSpec`] that passed [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedModel(ModelSpec);

impl ValidatedModel {
    pub fn spec(&self) -> &ModelSpec {
        &self.0
    }

    pub fn into_spec(self) -> ModelSpec {
        self.0
    }
}

impl std::ops::Deref for ValidatedModel {
    type Target = ModelSpec;
    fn deref(&self) -> &ModelSpec {
        &self.0
    }
}

pub fn validate_model(spec: ModelSpec) -> Result<ValidatedModel, ModelIssues> {
    let mut issues = Vec::new();
    let mut push = |field: &'static str, message: String| issues.push(ModelIssue { field, message });

    if spec.tau > 1 {
        push("tau", format!("tau must be 0 or 1, got {}", spec.tau));
    }
    if spec.variant == Variant::Nonlocal && spec.tau != 0 {
        push("tau", "nonlocal requires τ=0".into());
    }
    if !(spec.r > 1.0) || !spec.r.is_finite() {
        push("r", format!("r>1 required, got {}", spec.r));
    }
    // χ = ξ = 0 belongs to the conservation test mode as well
    for (field, value) in [("chi", spec.chi), ("xi", spec.xi)] {
        let admissible = value > 0.0 || (spec.test_mode && value == 0.0);
        if !admissible || !value.is_finite() {
            push(field, format!("must be positive, got {value}"));
        }
    }
    for (field, value) in [("lambda", spec.lambda), ("mu", spec.mu)] {
        if !value.is_finite() || value < 0.0 {
            push(field, format!("must be nonnegative, got {value}"));
        } else if value == 0.0 && !spec.test_mode {
            push(field, "zero only admitted with test_mode".into());
        }
    }
    if spec.variant == Variant::Local {
        for (field, value) in [("beta", spec.beta), ("delta", spec.delta)] {
            if !(value > 0.0) || !value.is_finite() {
                push(field, format!("must be positive for the local variant, got {value}"));
            }
        }
    }
    for (field, value) in [("m1", spec.m1), ("m2", spec.m2), ("m3", spec.m3)] {
        if !value.is_finite() {
            push(field, format!("must be finite, got {value}"));
        }
    }
    if spec.n == 0 {
        push("n", "dimension must be a positive integer".into());
    }
    if spec.attractant.role() != Role::Attractant {
        push("attractant", "law has repellent envelope".into());
    }
    if spec.repellent.role() != Role::Repellent {
        push("repellent", "law has attractant envelope".into());
    }
    if issues.is_empty() {
        Ok(ValidatedModel(spec))
    } else {
        Err(ModelIssues(issues))
    }
}

/// Maximizer and maximum of `s ↦ λs - μs^r` on `s ≥ 0`.
pub fn logistic_extremum(lambda: f64, mu: f64, r: f64) -> Result<(f64, f64), ModelError> {
    if !(lambda > 0.0) {
        return Err(ModelError::NonPositiveParameter { name: "lambda", value: lambda });
    }
    if !(mu > 0.0) {
        return Err(ModelError::NonPositiveParameter { name: "mu", value: mu });
    }
    if !(r > 1.0) {
        return Err(ModelError::RNotGreaterThanOne(r));
    }
    let u_max = (lambda / (r * mu)).powf(1.0 / (r - 1.0));
    let peak = lambda * u_max - mu * u_max.powf(r);
    Ok((u_max, peak))
}

/// Rectangular surrogate for the bounded domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub extents: Vec<f64>,
    pub cells: Vec<usize>,
}

impl DomainSpec {
    pub fn new_1d(length: f64, cells: usize) -> Self {
        DomainSpec { extents: vec![length], cells: vec![cells] }
    }

    pub fn new_2d(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        DomainSpec { extents: vec![lx, ly], cells: vec![nx, ny] }
    }

    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn measure(&self) -> f64 {
        self.extents.iter().product()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn spec(variant: Variant, tau: u8) -> ModelSpec {
        ModelSpec {
            variant,
            tau,
            chi: 1.0,
            xi: 1.0,
            lambda: 1.0,
            mu: 1.0,
            r: 2.0,
            m1: 1.0,
            m2: 1.0,
            m3: 1.0,
            beta: 1.0,
            delta: 1.0,
            attractant: ProductionLaw::prototype_attractant(1.0, 1.0).unwrap(),
            repellent: ProductionLaw::prototype_repellent(1.0, 1.0, 2.0).unwrap(),
            n: 2,
            test_mode: false,
        }
    }
}
