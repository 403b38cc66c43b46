//! Divergence cleaning for `H`.
//!
//! Removes the discrete gradient part of a 3D vector field by an FFT
//! Poisson solve whose symbols are those of the central difference,
//! `i sin(2πk/N)/h`. The result has central divergence zero to round-off
//! and the projection is orthogonal, so it never raises `∫|H|²`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::fields::{Grid, VectorField};

/// Reusable FFT plans for one grid.
pub struct Projector {
    grid: Grid,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
    /// Central-difference symbol per axis and wavenumber index.
    symbols: [Vec<f64>; 3],
}

impl std::fmt::Debug for Projector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Projector").field("grid", &self.grid).finish()
    }
}

impl Projector {
    pub fn new(grid: Grid) -> Result<Self> {
        if grid.n() != 3 {
            return Err(Error::Dimension("divergence cleaning needs a 3D grid".into()));
        }
        let mut planner = FftPlanner::new();
        let cells = grid.cells();
        let forward = [0, 1, 2].map(|d| planner.plan_fft_forward(cells[d]));
        let inverse = [0, 1, 2].map(|d| planner.plan_fft_inverse(cells[d]));
        let symbols = [0, 1, 2].map(|d| {
            let n = cells[d];
            let h = grid.spacing(d);
            (0..n)
                .map(|k| {
                    // sin vanishes exactly at k = 0 and at the Nyquist index.
                    if k == 0 || 2 * k == n {
                        0.0
                    } else {
                        (2.0 * std::f64::consts::PI * k as f64 / n as f64).sin() / h
                    }
                })
                .collect()
        });
        Ok(Projector {
            grid,
            forward,
            inverse,
            symbols,
        })
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let cells = self.grid.cells();
        let (n0, n1, n2) = (cells[0], cells[1], cells[2]);
        // Last axis: contiguous lines.
        data.par_chunks_mut(n2).for_each(|line| plans[2].process(line));
        // Middle axis: lines inside each axis-0 slab.
        data.par_chunks_mut(n1 * n2).for_each(|slab| {
            let mut line = vec![Complex64::new(0.0, 0.0); n1];
            for k in 0..n2 {
                for j in 0..n1 {
                    line[j] = slab[j * n2 + k];
                }
                plans[1].process(&mut line);
                for j in 0..n1 {
                    slab[j * n2 + k] = line[j];
                }
            }
        });
        // First axis: gather columns of stride n1*n2.
        let stride = n1 * n2;
        let columns: Vec<Vec<Complex64>> = (0..stride)
            .into_par_iter()
            .map(|c| {
                let mut line: Vec<Complex64> = (0..n0).map(|i| data[i * stride + c]).collect();
                plans[0].process(&mut line);
                line
            })
            .collect();
        for (c, line) in columns.into_iter().enumerate() {
            for (i, v) in line.into_iter().enumerate() {
                data[i * stride + c] = v;
            }
        }
    }

    /// Returns the divergence-free part of `h`.
    pub fn project(&self, h: &VectorField) -> Result<VectorField> {
        self.grid.check_same(&h.grid)?;
        if h.ncomp() != 3 {
            return Err(Error::Dimension("projection needs three components".into()));
        }
        let len = self.grid.len();
        let mut spectra: Vec<Vec<Complex64>> = h
            .comps
            .iter()
            .map(|c| {
                let mut data: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.transform(&mut data, &self.forward);
                data
            })
            .collect();
        let cells = self.grid.cells();
        let (n1, n2) = (cells[1], cells[2]);
        let sym = &self.symbols;
        let (s0, rest) = spectra.split_at_mut(1);
        let (s1, s2) = rest.split_at_mut(1);
        s0[0]
            .par_iter_mut()
            .zip(s1[0].par_iter_mut())
            .zip(s2[0].par_iter_mut())
            .enumerate()
            .for_each(|(idx, ((a, b), c))| {
                let k = [idx / (n1 * n2), (idx / n2) % n1, idx % n2];
                let s = [sym[0][k[0]], sym[1][k[1]], sym[2][k[2]]];
                let norm2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
                if norm2 == 0.0 {
                    return;
                }
                let dot = (*a * s[0] + *b * s[1] + *c * s[2]) / norm2;
                *a -= dot * s[0];
                *b -= dot * s[1];
                *c -= dot * s[2];
            });
        let scale = 1.0 / len as f64;
        let comps = spectra
            .iter_mut()
            .map(|data| {
                self.transform(data, &self.inverse);
                data.iter().map(|z| z.re * scale).collect()
            })
            .collect();
        Ok(VectorField { grid: self.grid, comps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{curl, divergence, integrate, relative_divergence, sample_vector};

    fn energy(v: &VectorField) -> f64 {
        let e: Vec<f64> = (0..v.grid.len())
            .map(|i| v.comps.iter().map(|c| c[i] * c[i]).sum())
            .collect();
        integrate(&v.grid, &e)
    }

    #[test]
    fn removes_gradient_and_keeps_curl() {
        let grid = Grid::new(3, &[16, 12, 10], 2.0).unwrap();
        let a = sample_vector(grid, 3, |x| {
            let g = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
            [g * x[1], g, 0.5 * g * x[0]]
        })
        .unwrap();
        let solenoidal = curl(&a).unwrap();
        let phi = sample_vector(grid, 1, |x| [(-(x[0] * x[0] + 2.0 * x[1] * x[1] + x[2] * x[2])).exp(), 0.0, 0.0])
            .unwrap();
        let grad: Vec<Vec<f64>> = (0..3).map(|d| crate::fields::diff(&grid, &phi.comps[0], d)).collect();
        let mixed = VectorField {
            grid,
            comps: (0..3)
                .map(|d| solenoidal.comps[d].iter().zip(&grad[d]).map(|(a, b)| a + b).collect())
                .collect(),
        };
        assert!(relative_divergence(&mixed).unwrap() > 1e-3);
        let p = Projector::new(grid).unwrap();
        let clean = p.project(&mixed).unwrap();
        assert!(relative_divergence(&clean).unwrap() < 1e-13);
        for d in 0..3 {
            for (x, y) in clean.comps[d].iter().zip(&solenoidal.comps[d]) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(energy(&clean) <= energy(&mixed));
        let div = divergence(&clean).unwrap();
        assert!(div.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_non_3d_grid() {
        assert!(Projector::new(Grid::cubic(2, 8, 1.0).unwrap()).is_err());
    }
}
