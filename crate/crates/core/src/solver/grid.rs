use std::sync::Arc;

use crate::model::DomainSpec;

use super::SolverError;

pub const MIN_CELLS: usize = 4;

/// Uniform cell-centered grid on a 1D interval or 2D rectangle.
///
/// Cells are numbered x-fastest: cell `(i, j)` has index `i + nx * j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    extents: Vec<f64>,
    cells: Vec<usize>,
    spacing: Vec<f64>,
    cell_measure: f64,
    measure: f64,
}

pub fn build_grid(domain: &DomainSpec) -> Result<Grid, SolverError> {
    let dim = domain.dimension();
    if !(1..=2).contains(&dim) || domain.cells.len() != dim {
        return Err(SolverError::BadDomain(format!(
            "need matching 1D or 2D extents and cell counts, got {} extents and {} counts",
            dim,
            domain.cells.len()
        )));
    }
    for (&len, &n) in domain.extents.iter().zip(&domain.cells) {
        if !(len > 0.0) || !len.is_finite() {
            return Err(SolverError::BadDomain(format!("extent must be positive, got {len}")));
        }
        if n < MIN_CELLS {
            return Err(SolverError::TooFewCells(n));
        }
    }
    let spacing: Vec<f64> = domain.extents.iter().zip(&domain.cells).map(|(&l, &n)| l / n as f64).collect();
    Ok(Grid {
        extents: domain.extents.clone(),
        cells: domain.cells.clone(),
        cell_measure: spacing.iter().product(),
        measure: domain.measure(),
        spacing,
    })
}

impl Grid {
    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn nx(&self) -> usize {
        self.cells[0]
    }

    /// 1 for one-dimensional grids.
    pub fn ny(&self) -> usize {
        self.cells.get(1).copied().unwrap_or(1)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// `|Ω|`, the product of the extents.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }

    /// Cell center; the second coordinate is 0 in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.nx(), idx / self.nx());
        let x = (i as f64 + 0.5) * self.spacing[0];
        let y = if self.dimension() == 2 { (j as f64 + 0.5) * self.spacing[1] } else { 0.0 };
        [x, y]
    }

    pub fn centers(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(|i| self.center(i))
    }

    pub fn into_shared(self) -> Arc<Grid> {
        Arc::new(self)
    }
}

/// One value per cell of a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::BadDomain(format!("field has {} values for {} cells", values.len(), grid.len())));
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Field { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = grid.centers().map(f).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&x| f(x)).collect() }
    }

    /// Arithmetic mean over cells (equal to `(1/|Ω|)∫` on a uniform grid).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_examples() {
        let g = build_grid(&DomainSpec::new_1d(PI, 100)).unwrap();
        assert_eq!(g.spacing(0), PI / 100.0);
        assert_eq!(g.measure(), PI);
        let total: f64 = (0..g.len()).map(|_| g.cell_measure()).sum();
        assert!((total - PI).abs() < 1e-14);

        let g = build_grid(&DomainSpec::new_2d(1.0, 2.0, 10, 20)).unwrap();
        assert!((g.cell_measure() - 0.01).abs() < 1e-17);
        assert_eq!(g.measure(), 2.0);
        assert_eq!(g.len(), 200);
        let [x, y] = g.center(g.index(9, 19));
        assert!((x - 0.95).abs() < 1e-15 && (y - 1.95).abs() < 1e-15);

        assert_eq!(build_grid(&DomainSpec::new_1d(1.0, 2)), Err(SolverError::TooFewCells(2)));
        assert!(build_grid(&DomainSpec::new_1d(-1.0, 10)).is_err());
    }

    #[test]
    fn field_length_checked() {
        let g = build_grid(&DomainSpec::new_1d(1.0, 4)).unwrap().into_shared();
        assert!(Field::new(g.clone(), vec![0.0; 3]).is_err());
        let f = Field::new(g, vec![1.0, -3.0, 2.0, 0.0]).unwrap();
        assert_eq!(f.sup_abs(), 3.0);
        assert_eq!(f.mean(), 0.0);
        assert_eq!(f.min(), -3.0);
    }
}
