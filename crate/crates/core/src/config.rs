//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comment
//! [model]
//! variant = local
//! tau = 0
//! ...
//! [grid]
//! dimension = 2
//! lengths = 1, 2
//! cells = 32, 64
//! ```
//!
//! Sections `[model]`, `[grid]` and `[time]` are required; `[init]`,
//! `[output]` and `[sweep]` are optional.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::model::{validate_model, DomainSpec, ModelIssues, ModelSpec, ProductionLaw, ValidatedModel, Variant};
use crate::solver::{Preset, RunControl, StepSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("missing key `{key}` in [{section}]")]
    MissingKey { section: &'static str, key: &'static str },
    #[error("line {line}: {message}")]
    TypeError { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelIssues),
}

/// `[time]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBlock {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub record_interval: f64,
    pub blowup_threshold: f64,
}

/// `[output]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub dir: PathBuf,
    /// Simulated-time spacing of field snapshots; `None` writes only the
    /// initial and final states.
    pub snapshot_every: Option<f64>,
    pub p_list: Vec<f64>,
    pub phi_p: f64,
}

/// Parameters a sweep may vary.
pub const SWEEPABLE: [&str; 15] =
    ["chi", "xi", "lambda", "mu", "r", "m1", "m2", "m3", "beta", "delta", "alpha", "k", "gamma0", "gamma1", "l"];

/// `param = start:stop:count`, inclusive and evenly spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 }).collect()
    }
}

/// `[sweep]` block.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBlock {
    pub axes: Vec<SweepAxis>,
    pub simulate: bool,
    /// Largest admissible number of grid points.
    pub budget: usize,
}

impl SweepBlock {
    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.count).fold(1usize, |acc, c| acc.saturating_mul(c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ValidatedModel,
    pub domain: DomainSpec,
    pub time: TimeBlock,
    pub init: Preset,
    pub output: OutputBlock,
    pub sweep: Option<SweepBlock>,
}

impl RunSpec {
    pub fn step_settings(&self) -> StepSettings {
        StepSettings { cfl: self.time.cfl, dt_min: self.time.dt_min, dt_max: self.time.dt_max }
    }

    pub fn run_control(&self) -> RunControl {
        RunControl {
            t_end: self.time.t_end,
            record_interval: self.time.record_interval,
            blowup_threshold: self.time.blowup_threshold,
            p_list: self.output.p_list.clone(),
            phi_p: self.output.phi_p,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Section {
    line: usize,
    entries: HashMap<String, Entry>,
    order: Vec<String>,
}

struct Reader {
    sections: HashMap<String, Section>,
}

const SECTIONS: [&str; 6] = ["model", "grid", "time", "init", "output", "sweep"];

fn type_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::TypeError { line, message: message.into() }
}

impl Reader {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: HashMap<String, Section> = HashMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| type_error(line, format!("malformed section header `{content}`")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(ConfigError::UnknownSection { line, name: name.to_string() });
                }
                if sections.contains_key(name) {
                    return Err(type_error(line, format!("section [{name}] repeated")));
                }
                sections.insert(name.to_string(), Section { line, entries: HashMap::new(), order: Vec::new() });
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| type_error(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(type_error(line, "empty key"));
            }
            let section = current
                .as_ref()
                .and_then(|c| sections.get_mut(c))
                .ok_or_else(|| type_error(line, format!("key `{key}` outside any section")))?;
            if let Some(prev) = section.entries.get(key) {
                return Err(type_error(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            section.entries.insert(key.to_string(), Entry { line, value: value.to_string(), used: false });
            section.order.push(key.to_string());
        }
        Ok(Reader { sections })
    }

    fn has(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    fn require(&self, section: &'static str) -> Result<(), ConfigError> {
        if self.has(section) {
            Ok(())
        } else {
            Err(ConfigError::MissingSection(section))
        }
    }

    fn raw(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let entry = self.sections.get_mut(section)?.entries.get_mut(key)?;
        entry.used = true;
        Some((entry.line, entry.value.clone()))
    }

    fn get<T>(
        &mut self,
        section: &'static str,
        key: &'static str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some((line, value)) => parse(&value).map(Some).map_err(|m| type_error(line, format!("{key}: {m}"))),
        }
    }

    fn req<T>(
        &mut self,
        section: &'static str,
        key: &'static str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<T, ConfigError> {
        self.get(section, key, parse)?.ok_or(ConfigError::MissingKey { section, key })
    }

    /// First key nobody asked for, in file order.
    fn unused(&self) -> Option<ConfigError> {
        let mut found: Vec<(usize, &str, &str)> = Vec::new();
        for (name, s) in &self.sections {
            for key in &s.order {
                if !s.entries[key].used {
                    found.push((s.entries[key].line, name, key));
                }
            }
        }
        found.sort();
        found.first().map(|&(line, section, key)| ConfigError::UnknownKey {
            line,
            section: section.to_string(),
            key: key.to_string(),
        })
    }
}

fn real(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("expected a real number, got `{s}`"))
}

fn count(s: &str) -> Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("expected a nonnegative integer, got `{s}`"))
}

fn boolean(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|x| item(x.trim())).collect()
}

fn axis(param: &str, s: &str) -> Result<SweepAxis, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:count, got `{s}`"));
    }
    let count = count(parts[2])?;
    if count == 0 {
        return Err("sweep count must be at least 1".into());
    }
    Ok(SweepAxis { param: param.to_string(), start: real(parts[0])?, stop: real(parts[1])?, count })
}

fn law_error(e: crate::model::ModelError) -> ConfigError {
    ConfigError::Model(ModelIssues(vec![crate::model::ModelIssue { field: "production law", message: e.to_string() }]))
}

fn parse_model(r: &mut Reader, n: u32) -> Result<ModelSpec, ConfigError> {
    let variant = r.req("model", "variant", |s| s.parse::<Variant>())?;
    let tau = r.req("model", "tau", |s| s.parse::<u8>().map_err(|_| format!("expected 0 or 1, got `{s}`")))?;
    let defaulted = variant == Variant::Nonlocal;
    let mut signal = |key: &'static str| -> Result<f64, ConfigError> {
        if defaulted {
            Ok(r.get("model", key, real)?.unwrap_or(1.0))
        } else {
            r.req("model", key, real)
        }
    };
    let beta = signal("beta")?;
    let delta = signal("delta")?;
    let alpha = r.req("model", "alpha", real)?;
    let k = r.req("model", "k", real)?;
    let gamma0 = r.req("model", "gamma0", real)?;
    let gamma1 = r.get("model", "gamma1", real)?.unwrap_or(gamma0);
    let l = r.req("model", "l", real)?;
    Ok(ModelSpec {
        variant,
        tau,
        chi: r.req("model", "chi", real)?,
        xi: r.req("model", "xi", real)?,
        lambda: r.req("model", "lambda", real)?,
        mu: r.req("model", "mu", real)?,
        r: r.req("model", "r", real)?,
        m1: r.req("model", "m1", real)?,
        m2: r.req("model", "m2", real)?,
        m3: r.req("model", "m3", real)?,
        beta,
        delta,
        attractant: ProductionLaw::prototype_attractant(alpha, k).map_err(law_error)?,
        repellent: ProductionLaw::prototype_repellent(gamma0, gamma1, l).map_err(law_error)?,
        n,
        test_mode: r.get("model", "test_mode", boolean)?.unwrap_or(false),
    })
}

fn parse_init(r: &mut Reader, dimension: usize) -> Result<Preset, ConfigError> {
    if !r.has("init") {
        return Ok(Preset::Constant { c: 1.0 });
    }
    let name = r.req("init", "preset", |s| Ok(s.to_string()))?;
    match name.as_str() {
        "constant" => Ok(Preset::Constant { c: r.req("init", "c", real)? }),
        "gaussian" => {
            let center = r.req("init", "center", |s| list(s, real))?;
            if center.len() != dimension {
                let (line, _) = r.raw("init", "center").unwrap_or_default();
                return Err(type_error(line, format!("center needs {dimension} coordinates")));
            }
            Ok(Preset::Gaussian {
                center: [center[0], center.get(1).copied().unwrap_or(0.0)],
                width: r.req("init", "width", real)?,
                amplitude: r.req("init", "amplitude", real)?,
                floor: r.get("init", "floor", real)?.unwrap_or(0.0),
            })
        }
        "perturbed_constant" => Ok(Preset::PerturbedConstant {
            c: r.req("init", "c", real)?,
            amplitude: r.req("init", "amplitude", real)?,
            seed: r.get("init", "seed", |s| s.parse::<u64>().map_err(|_| format!("bad seed `{s}`")))?.unwrap_or(0),
        }),
        "from_file" => Ok(Preset::FromFile(PathBuf::from(r.req("init", "path", |s| Ok(s.to_string()))?))),
        other => {
            let (line, _) = r.raw("init", "preset").unwrap_or_default();
            Err(type_error(
                line,
                format!("unknown preset `{other}` (constant, gaussian, perturbed_constant, from_file)"),
            ))
        }
    }
}

fn parse_sweep(r: &mut Reader) -> Result<Option<SweepBlock>, ConfigError> {
    let Some(section) = r.sections.get("sweep") else {
        return Ok(None);
    };
    let keys: Vec<String> = section.order.clone();
    let mut axes = Vec::new();
    for key in keys {
        if key == "simulate" || key == "budget" {
            continue;
        }
        let (line, value) = r.raw("sweep", &key).expect("key listed in section");
        if !SWEEPABLE.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, section: "sweep".into(), key });
        }
        axes.push(axis(&key, &value).map_err(|m| type_error(line, format!("{key}: {m}")))?);
    }
    if axes.is_empty() {
        return Err(type_error(r.sections["sweep"].line, "[sweep] lists no parameters"));
    }
    Ok(Some(SweepBlock {
        axes,
        simulate: r.get("sweep", "simulate", boolean)?.unwrap_or(false),
        budget: r.get("sweep", "budget", count)?.unwrap_or(10_000),
    }))
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let mut r = Reader::parse(text)?;
    for s in ["model", "grid", "time"] {
        r.require(s)?;
    }

    let dimension = r.req("grid", "dimension", count)?;
    let (dim_line, _) = r.raw("grid", "dimension").unwrap_or_default();
    if !(1..=2).contains(&dimension) {
        return Err(type_error(dim_line, format!("dimension must be 1 or 2, got {dimension}")));
    }
    let extents = r.req("grid", "lengths", |s| list(s, real))?;
    let cells = r.req("grid", "cells", |s| list(s, count))?;
    if extents.len() != dimension || cells.len() != dimension {
        return Err(type_error(dim_line, format!("lengths and cells need {dimension} entries each")));
    }
    let domain = DomainSpec { extents, cells };

    let t_end = r.req("time", "T", real)?;
    let time = TimeBlock {
        t_end,
        cfl: r.get("time", "cfl", real)?.unwrap_or(0.4),
        dt_min: r.get("time", "dt_min", real)?.unwrap_or(1e-12),
        dt_max: r.get("time", "dt_max", real)?.unwrap_or(0.1),
        record_interval: r.get("time", "record_interval", real)?.unwrap_or(t_end / 500.0),
        blowup_threshold: r.get("time", "blowup_threshold", real)?.unwrap_or(1e6),
    };

    let output = OutputBlock {
        dir: r.get("output", "dir", |s| Ok(PathBuf::from(s)))?.unwrap_or_else(|| PathBuf::from("out")),
        snapshot_every: r.get("output", "snapshot_every", real)?,
        p_list: r.get("output", "p_list", |s| list(s, real))?.unwrap_or_else(|| vec![2.0]),
        phi_p: r.get("output", "phi_p", real)?.unwrap_or(2.0),
    };

    let spec = parse_model(&mut r, dimension as u32)?;
    let init = parse_init(&mut r, dimension)?;
    let sweep = parse_sweep(&mut r)?;
    if let Some(e) = r.unused() {
        return Err(e);
    }
    let model = validate_model(spec)?;
    Ok(RunSpec { model, domain, time, init, output, sweep })
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Writes a configuration that [`parse_config`] reads back to `spec`.
///
/// Only prototype production laws are representable.
pub fn render(spec: &RunSpec) -> String {
    let m = spec.model.spec();
    let mut out = String::new();
    let (alpha, k) = match *m.attractant.envelope() {
        crate::model::Envelope::Attractant { alpha, k } => (alpha, k),
        _ => unreachable!("attractant role checked by validation"),
    };
    let (gamma0, gamma1, l) = match *m.repellent.envelope() {
        crate::model::Envelope::Repellent { gamma0, gamma1, l } => (gamma0, gamma1, l),
        _ => unreachable!("repellent role checked by validation"),
    };
    let _ = writeln!(out, "[model]");
    let _ = writeln!(out, "variant = {}\ntau = {}", m.variant, m.tau);
    for (key, value) in [
        ("chi", m.chi),
        ("xi", m.xi),
        ("lambda", m.lambda),
        ("mu", m.mu),
        ("r", m.r),
        ("m1", m.m1),
        ("m2", m.m2),
        ("m3", m.m3),
        ("beta", m.beta),
        ("delta", m.delta),
        ("alpha", alpha),
        ("k", k),
        ("gamma0", gamma0),
        ("gamma1", gamma1),
        ("l", l),
    ] {
        let _ = writeln!(out, "{key} = {value}");
    }
    if m.test_mode {
        let _ = writeln!(out, "test_mode = true");
    }

    let _ = writeln!(out, "\n[grid]");
    let _ = writeln!(out, "dimension = {}", spec.domain.dimension());
    let _ = writeln!(out, "lengths = {}", join(&spec.domain.extents));
    let _ = writeln!(out, "cells = {}", join(&spec.domain.cells));

    let t = &spec.time;
    let _ = writeln!(out, "\n[time]");
    let _ = writeln!(
        out,
        "T = {}\ncfl = {}\ndt_min = {}\ndt_max = {}\nrecord_interval = {}\nblowup_threshold = {}",
        t.t_end, t.cfl, t.dt_min, t.dt_max, t.record_interval, t.blowup_threshold
    );

    let _ = writeln!(out, "\n[init]");
    match &spec.init {
        Preset::Constant { c } => {
            let _ = writeln!(out, "preset = constant\nc = {c}");
        }
        Preset::Gaussian { center, width, amplitude, floor } => {
            let center = &center[..spec.domain.dimension()];
            let _ = writeln!(
                out,
                "preset = gaussian\ncenter = {}\nwidth = {width}\namplitude = {amplitude}\nfloor = {floor}",
                join(center)
            );
        }
        Preset::PerturbedConstant { c, amplitude, seed } => {
            let _ = writeln!(out, "preset = perturbed_constant\nc = {c}\namplitude = {amplitude}\nseed = {seed}");
        }
        Preset::FromFile(path) => {
            let _ = writeln!(out, "preset = from_file\npath = {}", path.display());
        }
    }

    let o = &spec.output;
    let _ = writeln!(out, "\n[output]");
    let _ = writeln!(out, "dir = {}", o.dir.display());
    if let Some(every) = o.snapshot_every {
        let _ = writeln!(out, "snapshot_every = {every}");
    }
    let _ = writeln!(out, "p_list = {}\nphi_p = {}", join(&o.p_list), o.phi_p);

    if let Some(s) = &spec.sweep {
        let _ = writeln!(out, "\n[sweep]");
        for a in &s.axes {
            let _ = writeln!(out, "{} = {}:{}:{}", a.param, a.start, a.stop, a.count);
        }
        let _ = writeln!(out, "simulate = {}\nbudget = {}", s.simulate, s.budget);
    }
    out
}

/// Applies one swept value to a model parameter.
pub fn set_parameter(spec: &mut ModelSpec, param: &str, value: f64) -> Result<(), String> {
    let law = |e: crate::model::ModelError| e.to_string();
    match param {
        "chi" => spec.chi = value,
        "xi" => spec.xi = value,
        "lambda" => spec.lambda = value,
        "mu" => spec.mu = value,
        "r" => spec.r = value,
        "m1" => spec.m1 = value,
        "m2" => spec.m2 = value,
        "m3" => spec.m3 = value,
        "beta" => spec.beta = value,
        "delta" => spec.delta = value,
        "alpha" | "k" => {
            let (mut alpha, mut k) = match *spec.attractant.envelope() {
                crate::model::Envelope::Attractant { alpha, k } => (alpha, k),
                _ => return Err("attractant law has the wrong role".into()),
            };
            if param == "alpha" {
                alpha = value;
            } else {
                k = value;
            }
            spec.attractant = ProductionLaw::prototype_attractant(alpha, k).map_err(law)?;
        }
        "gamma0" | "gamma1" | "l" => {
            let (mut g0, mut g1, mut l) = match *spec.repellent.envelope() {
                crate::model::Envelope::Repellent { gamma0, gamma1, l } => (gamma0, gamma1, l),
                _ => return Err("repellent law has the wrong role".into()),
            };
            match param {
                "gamma0" => g0 = value,
                "gamma1" => g1 = value,
                _ => l = value,
            }
            spec.repellent = ProductionLaw::prototype_repellent(g0, g1, l).map_err(law)?;
        }
        other => return Err(format!("`{other}` cannot be swept")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = "
# minimal
[model]
variant = local
tau = 0
chi = 1
xi = 1
lambda = 1
mu = 1
r = 2
m1 = 1
m2 = 1
m3 = 1
beta = 1
delta = 1
alpha = 1
k = 1
gamma0 = 1
l = 2

[grid]
dimension = 1
lengths = 10
cells = 50

[time]
T = 5
";

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = parse_config(MINIMAL).unwrap();
        assert_eq!(spec.time.cfl, 0.4);
        assert_eq!(spec.time.record_interval, 0.01);
        assert_eq!(spec.time.blowup_threshold, 1e6);
        assert_eq!(spec.time.dt_min, 1e-12);
        assert_eq!(spec.output.p_list, vec![2.0]);
        assert_eq!(spec.init, Preset::Constant { c: 1.0 });
        assert_eq!(spec.model.n, 1);
        assert!(spec.sweep.is_none());
    }

    #[test]
    fn errors_carry_lines() {
        let dup = MINIMAL.replace("xi = 1\n", "xi = 1\nxi = 2\n");
        match parse_config(&dup) {
            Err(ConfigError::TypeError { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
        let unknown = MINIMAL.replace("r = 2\n", "r = 2\nzeta = 4\n");
        assert!(matches!(parse_config(&unknown), Err(ConfigError::UnknownKey { line: 11, .. })));
        let typo = MINIMAL.replace("mu = 1", "mu = one");
        assert!(matches!(parse_config(&typo), Err(ConfigError::TypeError { line: 9, .. })));
        let no_time = MINIMAL.replace("[time]\nT = 5\n", "");
        assert_eq!(parse_config(&no_time), Err(ConfigError::MissingSection("time")));
        let bad_section = format!("{MINIMAL}[plot]\n");
        assert!(matches!(parse_config(&bad_section), Err(ConfigError::UnknownSection { .. })));
    }

    #[test]
    fn semantic_errors_come_from_validation() {
        let text = MINIMAL.replace("variant = local\ntau = 0", "variant = nonlocal\ntau = 1");
        match parse_config(&text) {
            Err(ConfigError::Model(issues)) => {
                assert!(issues.0.iter().any(|i| i.message == "nonlocal requires τ=0"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_block() {
        let text = format!("{MINIMAL}[sweep]\nk = 0.5:3:6\nm1 = 0:1:2\nbudget = 20\n");
        let spec = parse_config(&text).unwrap();
        let sweep = spec.sweep.unwrap();
        assert_eq!(sweep.total_points(), 12);
        assert_eq!(sweep.axes[0].values(), vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]);
        assert!(!sweep.simulate);
        let bad = format!("{MINIMAL}[sweep]\ntau = 0:1:2\n");
        assert!(matches!(parse_config(&bad), Err(ConfigError::UnknownKey { .. })));
        let bad = format!("{MINIMAL}[sweep]\nk = 0.5:3\n");
        assert!(matches!(parse_config(&bad), Err(ConfigError::TypeError { .. })));
    }

    #[test]
    fn gaussian_center_length_checked() {
        let text = format!("{MINIMAL}[init]\npreset = gaussian\ncenter = 1, 2\nwidth = 1\namplitude = 1\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::TypeError { .. })));
    }

    fn arb_preset(dim: usize) -> impl Strategy<Value = Preset> {
        prop_oneof![
            (0.0f64..10.0).prop_map(|c| Preset::Constant { c }),
            (0.0f64..5.0, 0.0f64..5.0, 0.01f64..2.0, 0.0f64..3.0, 0.0f64..1.0).prop_map(move |(x, y, w, a, f)| {
                Preset::Gaussian { center: [x, if dim == 2 { y } else { 0.0 }], width: w, amplitude: a, floor: f }
            }),
            (0.0f64..5.0, 0.0f64..1.0, any::<u64>()).prop_map(|(c, frac, seed)| Preset::PerturbedConstant {
                c,
                amplitude: c * frac,
                seed
            }),
            "[a-z]{1,8}/[a-z]{1,8}\\.txt".prop_map(|p| Preset::FromFile(PathBuf::from(p))),
        ]
    }

    fn arb_spec() -> impl Strategy<Value = RunSpec> {
        let model = (
            prop_oneof![Just((Variant::Local, 0u8)), Just((Variant::Local, 1u8)), Just((Variant::Nonlocal, 0u8))],
            proptest::array::uniform4(0.01f64..10.0),
            1.01f64..4.0,
            proptest::array::uniform3(-2.0f64..3.0),
            proptest::array::uniform2(0.1f64..5.0),
            (0.1f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.0f64..2.0, 0.1f64..3.0),
        );
        (1usize..=2)
            .prop_flat_map(move |dim| {
                (
                    Just(dim),
                    model.clone(),
                    proptest::collection::vec((0.1f64..10.0, 4usize..200), dim),
                    (0.1f64..100.0, 0.05f64..1.0, 1e-14f64..1e-10, 1e-3f64..1.0, 1e-3f64..1.0, 10.0f64..1e8),
                    arb_preset(dim),
                    (proptest::option::of(0.01f64..5.0), proptest::collection::vec(1.0f64..8.0, 1..4), 1.01f64..5.0),
                    proptest::option::of((0.1f64..1.0, 1usize..8, any::<bool>(), 1usize..1000)),
                )
            })
            .prop_map(|(_dim, (vt, pos, r, ms, bd, law), axes, time, init, out, sweep)| {
                let spec = ModelSpec {
                    variant: vt.0,
                    tau: vt.1,
                    chi: pos[0],
                    xi: pos[1],
                    lambda: pos[2],
                    mu: pos[3],
                    r,
                    m1: ms[0],
                    m2: ms[1],
                    m3: ms[2],
                    beta: bd[0],
                    delta: bd[1],
                    attractant: ProductionLaw::prototype_attractant(law.0, law.1).unwrap(),
                    repellent: ProductionLaw::prototype_repellent(law.2, law.2 + law.3, law.4).unwrap(),
                    n: axes.len() as u32,
                    test_mode: false,
                };
                RunSpec {
                    model: validate_model(spec).unwrap(),
                    domain: DomainSpec {
                        extents: axes.iter().map(|a| a.0).collect(),
                        cells: axes.iter().map(|a| a.1).collect(),
                    },
                    time: TimeBlock {
                        t_end: time.0,
                        cfl: time.1,
                        dt_min: time.2,
                        dt_max: time.3,
                        record_interval: time.4,
                        blowup_threshold: time.5,
                    },
                    init,
                    output: OutputBlock {
                        dir: PathBuf::from("runs/out"),
                        snapshot_every: out.0,
                        p_list: out.1,
                        phi_p: out.2,
                    },
                    sweep: sweep.map(|(start, count, simulate, budget)| SweepBlock {
                        axes: vec![SweepAxis { param: "k".into(), start, stop: start + 1.5, count }],
                        simulate,
                        budget,
                    }),
                }
            })
    }

    proptest! {
        #[test]
        fn render_round_trips(spec in arb_spec()) {
            let text = render(&spec);
            prop_assert_eq!(parse_config(&text).unwrap(), spec);
        }
    }
}
