//! Plain-text field snapshots.
//!
//! ```text
//! # t=<time> dim=<d> nx=<nx> [ny=<ny>]
//! x[,y],u,v,w
//! ```
//!
//! with one row per cell in index order and 17 significant digits.

use std::fmt::Write as _;
use std::io::Write;

use super::{SimState, SolverError};

/// Parsed snapshot table.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub nx: usize,
    pub ny: Option<usize>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl Snapshot {
    pub fn cells(&self) -> Vec<usize> {
        std::iter::once(self.nx).chain(self.ny).collect()
    }
}

pub fn render_snapshot(state: &SimState) -> String {
    let grid = state.grid();
    let mut out = format!("# t={:.16e} dim={} nx={}", state.t, grid.dimension(), grid.nx());
    if grid.dimension() == 2 {
        let _ = write!(out, " ny={}", grid.ny());
    }
    out.push('\n');
    let (u, v, w) = (state.u.values(), state.v.values(), state.w.values());
    for (i, [x, y]) in grid.centers().enumerate() {
        let _ = write!(out, "{x:.16e},");
        if grid.dimension() == 2 {
            let _ = write!(out, "{y:.16e},");
        }
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", u[i], v[i], w[i]);
    }
    out
}

pub fn write_snapshot(mut sink: impl Write, state: &SimState) -> Result<(), SolverError> {
    sink.write_all(render_snapshot(state).as_bytes()).map_err(|e| SolverError::Io(e.to_string()))
}

fn format_error(line: usize, msg: impl std::fmt::Display) -> SolverError {
    SolverError::FileFormatError(format!("line {line}: {msg}"))
}

pub fn read_snapshot(text: &str) -> Result<Snapshot, SolverError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| format_error(1, "empty snapshot"))?;
    let header = header.trim().strip_prefix('#').ok_or_else(|| format_error(1, "missing '#' header"))?;
    let (mut t, mut dim, mut nx, mut ny) = (None, None, None, None);
    for token in header.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| format_error(1, format!("bad token '{token}'")))?;
        let bad = || format_error(1, format!("bad value for {key}: '{value}'"));
        let count = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "t" => t = Some(value.parse::<f64>().map_err(|_| bad())?),
            "dim" => dim = Some(count()?),
            "nx" => nx = Some(count()?),
            "ny" => ny = Some(count()?),
            _ => return Err(format_error(1, format!("unknown header key '{key}'"))),
        }
    }
    let missing = |k| format_error(1, format!("header lacks {k}"));
    let (t, dim, nx) =
        (t.ok_or_else(|| missing("t"))?, dim.ok_or_else(|| missing("dim"))?, nx.ok_or_else(|| missing("nx"))?);
    match (dim, ny) {
        (1, None) | (2, Some(_)) => {}
        _ => return Err(format_error(1, format!("dim={dim} inconsistent with ny"))),
    }
    let columns = dim + 3;
    let len = nx * ny.unwrap_or(1);
    let (mut u, mut v, mut w) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
    for (idx, line) in lines {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format_error(idx + 1, e))?;
        if row.len() != columns {
            return Err(format_error(idx + 1, format!("expected {columns} columns, got {}", row.len())));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(format_error(idx + 1, "non-finite value"));
        }
        u.push(row[dim]);
        v.push(row[dim + 1]);
        w.push(row[dim + 2]);
    }
    if u.len() != len {
        return Err(SolverError::FileFormatError(format!("expected {len} rows, got {}", u.len())));
    }
    Ok(Snapshot { t, nx, ny, u, v, w })
}
