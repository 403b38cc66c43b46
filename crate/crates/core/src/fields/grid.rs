use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred grid on the periodic box `[−L, L)^n`.
///
/// Cells are stored axis-major: axis 0 varies slowest, the last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n: usize,
    cells: [usize; 3],
    half_width: f64,
}

/// Serialized form of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    pub cells: Vec<usize>,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        let cells = if spec.cells.len() == 1 {
            vec![spec.cells[0]; spec.n]
        } else {
            spec.cells
        };
        Grid::new(spec.n, &cells, spec.half_width)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            n: g.n,
            cells: g.cells[..g.n].to_vec(),
            half_width: g.half_width,
        }
    }
}

pub const MIN_CELLS: usize = 8;

impl Grid {
    pub fn new(n: usize, cells: &[usize], half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::domain(format!("grid dimension must be 1, 2 or 3, got {n}")));
        }
        if cells.len() != n {
            return Err(Error::Dimension(format!(
                "expected {n} cell counts, got {}",
                cells.len()
            )));
        }
        if let Some(&c) = cells.iter().find(|&&c| c < MIN_CELLS) {
            return Err(Error::domain(format!("need at least {MIN_CELLS} cells per axis, got {c}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::domain("half width L must be positive and finite"));
        }
        let mut all = [1; 3];
        all[..n].copy_from_slice(cells);
        Ok(Grid {
            n,
            cells: all,
            half_width,
        })
    }

    /// Same number of cells along every axis.
    pub fn cubic(n: usize, cells: usize, half_width: f64) -> Result<Self> {
        Grid::new(n, &vec![cells; n], half_width)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.n]
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_width / self.cells[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.n).map(|d| self.spacing(d)).fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.n).map(|d| self.spacing(d)).product()
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        let mut rest = idx;
        for d in (0..3).rev() {
            c[d] = rest % self.cells[d];
            rest /= self.cells[d];
        }
        c
    }

    /// Cell centre `x_i = −L + (i + ½)h`; unused axes are 0.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for d in 0..self.n {
            x[d] = -self.half_width + (c[d] as f64 + 0.5) * self.spacing(d);
        }
        x
    }

    /// Periodic neighbour one cell forward along `axis`.
    #[inline]
    pub fn forward(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let n = self.cells[axis];
        if (idx / s) % n + 1 == n {
            idx + s - n * s
        } else {
            idx + s
        }
    }

    /// Periodic neighbour one cell backward along `axis`.
    #[inline]
    pub fn backward(&self, idx: usize, axis: usize) -> usize {
        let s = self.stride(axis);
        let n = self.cells[axis];
        if (idx / s).is_multiple_of(n) {
            idx + (n - 1) * s
        } else {
            idx - s
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::Dimension("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Real value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// `n` components per cell, stored one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid,
    pub comps: Vec<Vec<f64>>,
}

/// `n × n` components per cell, `comps[i * n + j]` holding entry `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub grid: Grid,
    pub dim: usize,
    pub comps: Vec<Vec<f64>>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

impl VectorField {
    pub fn zeros(grid: Grid, ncomp: usize) -> Self {
        VectorField {
            grid,
            comps: vec![vec![0.0; grid.len()]; ncomp],
        }
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn at(&self, idx: usize) -> Vec<f64> {
        self.comps.iter().map(|c| c[idx]).collect()
    }

    /// Euclidean length per cell.
    pub fn magnitude(&self) -> ScalarField {
        let values = (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        VectorField {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }
}

impl TensorField {
    pub fn zeros(grid: Grid, dim: usize) -> Self {
        TensorField {
            grid,
            dim,
            comps: vec![vec![0.0; grid.len()]; dim * dim],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        &self.comps[i * self.dim + j]
    }

    /// Largest `|T_ij − T_ji|` over all cells.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for (a, b) in self.get(i, j).iter().zip(self.get(j, i)) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
        worst
    }
}

/// Samples `f` at cell centres.
pub fn sample<F>(grid: Grid, f: F) -> Result<ScalarField>
where
    F: Fn([f64; 3]) -> f64 + Sync,
{
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| f(grid.position(i)))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("sample at cell {i}")));
    }
    Ok(ScalarField { grid, values })
}

/// Samples a vector-valued `f` with `ncomp` components at cell centres.
pub fn sample_vector<F>(grid: Grid, ncomp: usize, f: F) -> Result<VectorField>
where
    F: Fn([f64; 3]) -> [f64; 3] + Sync,
{
    let mut comps = Vec::with_capacity(ncomp);
    for c in 0..ncomp {
        let field = sample(grid, |x| f(x)[c])?;
        comps.push(field.values);
    }
    Ok(VectorField { grid, comps })
}
