//! Second-order central differences on the periodic grid.
//!
//! `∂f/∂x_d ≈ (f_{i+1} − f_{i−1}) / 2h`. The operators commute, so the
//! discrete `div ∘ curl` vanishes to round-off, and summation by parts
//! holds exactly: `Σ f·D(g) = −Σ D(f)·g`.

use rayon::prelude::*;

use super::grid::{Grid, ScalarField, TensorField, VectorField};
use crate::error::{Error, Result};

/// Values at the periodic neighbour one cell forward (`forward = true`) or
/// backward along `axis`.
pub fn shifted(grid: &Grid, values: &[f64], axis: usize, forward: bool) -> Vec<f64> {
    let s = grid.stride(axis);
    let n = grid.cells()[axis];
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(s * n)
        .zip(values.par_chunks(s * n))
        .for_each(|(dst, src)| {
            for k in 0..n {
                let from = if forward { (k + 1) % n } else { (k + n - 1) % n };
                dst[k * s..(k + 1) * s].copy_from_slice(&src[from * s..(from + 1) * s]);
            }
        });
    out
}

/// Central difference of `values` along `axis`.
pub fn diff(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let inv = 0.5 / grid.spacing(axis);
    let fwd = shifted(grid, values, axis, true);
    let bwd = shifted(grid, values, axis, false);
    fwd.par_iter().zip(&bwd).map(|(f, b)| (f - b) * inv).collect()
}

/// Compact second difference `Σ_d (f_{i+1} − 2f_i + f_{i−1}) / h_d²`.
pub fn compact_laplacian(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; values.len()];
    for d in 0..grid.n() {
        let h = grid.spacing(d);
        let inv = 1.0 / (h * h);
        let fwd = shifted(grid, values, d, true);
        let bwd = shifted(grid, values, d, false);
        acc.par_iter_mut()
            .zip(values)
            .zip(fwd.par_iter().zip(&bwd))
            .for_each(|((a, v), (f, b))| *a += (f - 2.0 * v + b) * inv);
    }
    acc
}

/// `G_ij = ∂u_i/∂x_j`.
pub fn gradient(u: &VectorField) -> Result<TensorField> {
    let n = u.grid.n();
    if u.ncomp() != n {
        return Err(Error::Dimension(format!(
            "gradient needs {n} components, got {}",
            u.ncomp()
        )));
    }
    let mut comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            comps.push(diff(&u.grid, &u.comps[i], j));
        }
    }
    Ok(TensorField {
        grid: u.grid,
        dim: n,
        comps,
    })
}

/// Symmetric part of the gradient, `𝔻_ij = (∂_j u_i + ∂_i u_j)/2`.
pub fn shear_rate(u: &VectorField) -> Result<TensorField> {
    Ok(symmetrize(&gradient(u)?))
}

pub fn symmetrize(g: &TensorField) -> TensorField {
    let n = g.dim;
    let mut comps = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in 0..n {
            comps[i * n + j] = if i == j {
                g.get(i, i).to_vec()
            } else {
                g.get(i, j)
                    .par_iter()
                    .zip(g.get(j, i))
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect()
            };
        }
    }
    TensorField {
        grid: g.grid,
        dim: n,
        comps,
    }
}

pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let grid = v.grid;
    let n = grid.n();
    if v.ncomp() != n {
        return Err(Error::Dimension(format!(
            "divergence needs {n} components, got {}",
            v.ncomp()
        )));
    }
    let mut acc = vec![0.0; grid.len()];
    for d in 0..n {
        let dv = diff(&grid, &v.comps[d], d);
        acc.par_iter_mut().zip(dv).for_each(|(a, b)| *a += b);
    }
    Ok(ScalarField { grid, values: acc })
}

/// Row-wise divergence `(Div T)_i = Σ_j ∂_j T_ij`.
pub fn tensor_divergence(t: &TensorField) -> VectorField {
    let grid = t.grid;
    let n = t.dim;
    let comps = (0..n)
        .map(|i| {
            let mut acc = vec![0.0; grid.len()];
            for j in 0..n {
                let d = diff(&grid, t.get(i, j), j);
                acc.par_iter_mut().zip(d).for_each(|(a, b)| *a += b);
            }
            acc
        })
        .collect();
    VectorField { grid, comps }
}

/// Curl of a three-component field on a 3D grid.
pub fn curl(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid;
    if grid.n() != 3 || v.ncomp() != 3 {
        return Err(Error::Dimension("curl needs a 3D grid and 3 components".into()));
    }
    let d = |c: usize, axis: usize| diff(&grid, &v.comps[c], axis);
    let sub = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> {
        a.into_par_iter().zip(b).map(|(x, y)| x - y).collect()
    };
    Ok(VectorField {
        grid,
        comps: vec![
            sub(d(2, 1), d(1, 2)),
            sub(d(0, 2), d(2, 0)),
            sub(d(1, 0), d(0, 1)),
        ],
    })
}

/// Frobenius length `|T| = sqrt(T:T)` per cell.
pub fn tensor_magnitude(t: &TensorField) -> ScalarField {
    let values = (0..t.grid.len())
        .into_par_iter()
        .map(|i| t.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
        .collect();
    ScalarField {
        grid: t.grid,
        values,
    }
}

/// Cell-wise `A:B`.
pub fn double_dot(a: &TensorField, b: &TensorField) -> ScalarField {
    let values = (0..a.grid.len())
        .into_par_iter()
        .map(|i| a.comps.iter().zip(&b.comps).map(|(x, y)| x[i] * y[i]).sum())
        .collect();
    ScalarField {
        grid: a.grid,
        values,
    }
}

/// Dimensionless divergence measure `h·‖div v‖₂ / ‖v‖₂` (0 for `v = 0`).
pub fn relative_divergence(v: &VectorField) -> Result<f64> {
    let div = divergence(v)?;
    let num = super::reduce::lp_norm(&div, 2.0);
    let den = super::reduce::lp_norm_vector(v, 2.0);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(v.grid.min_spacing() * num / den)
}
