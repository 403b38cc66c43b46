//! Deterministic reductions.
//!
//! Every integral goes through [`pairwise_sum`], whose split points depend
//! only on the slice length. Results are therefore bit-identical for any
//! number of worker threads.

use rayon::prelude::*;

use super::grid::{Grid, ScalarField, VectorField};

const BLOCK: usize = 32;
const PARALLEL_MIN: usize = 1 << 15;

/// Pairwise (tree) sum with fixed split points.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    let (lo, hi) = values.split_at(mid);
    if values.len() >= PARALLEL_MIN {
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        a + b
    } else {
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// `Σ values · hⁿ`.
pub fn integrate(grid: &Grid, values: &[f64]) -> f64 {
    pairwise_sum(values) * grid.cell_volume()
}

/// `∫ f(values)` with `f` applied cell-wise.
pub fn integrate_map<F>(grid: &Grid, values: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let mapped: Vec<f64> = values.par_iter().map(|&v| f(v)).collect();
    integrate(grid, &mapped)
}

/// `(Σ |v|^p hⁿ)^{1/p}` for a scalar field.
pub fn lp_norm(field: &ScalarField, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1");
    integrate_map(&field.grid, &field.values, |v| v.abs().powf(p)).powf(1.0 / p)
}

/// `L^p` norm of the pointwise Euclidean length of a vector field.
pub fn lp_norm_vector(field: &VectorField, p: f64) -> f64 {
    lp_norm(&field.magnitude(), p)
}
