use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, ScalarField, VectorField};
use super::ops::{relative_divergence, shear_rate, tensor_magnitude};
use super::reduce::{integrate, integrate_map};
use crate::error::{Error, Result};
use crate::thresholds::ExponentParams;

/// Tolerance on `h·‖div H‖/‖H‖` accepted for a magnetic field.
pub const DIV_H_TOL: f64 = 1e-8;

/// Density, velocity and optional magnetic field at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub rho: ScalarField,
    pub u: VectorField,
    pub h: Option<VectorField>,
    pub time: f64,
}

impl FluidState {
    pub fn grid(&self) -> Grid {
        self.rho.grid
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.rho.grid;
        grid.check_same(&self.u.grid)?;
        if self.u.ncomp() != grid.n() {
            return Err(Error::Dimension(format!(
                "velocity has {} components on a {}D grid",
                self.u.ncomp(),
                grid.n()
            )));
        }
        if let Some(i) = self.rho.values.iter().position(|&r| r < 0.0) {
            return Err(Error::NegativeDensity(i));
        }
        let finite = self.rho.values.iter().all(|v| v.is_finite())
            && self.u.comps.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("state contains NaN or infinity".into()));
        }
        if let Some(h) = &self.h {
            grid.check_same(&h.grid)?;
            if grid.n() != 3 || h.ncomp() != 3 {
                return Err(Error::Dimension("magnetic field needs a 3D grid".into()));
            }
            let rel = relative_divergence(h)?;
            if rel > DIV_H_TOL {
                return Err(Error::domain(format!(
                    "magnetic field is not divergence free: relative divergence {rel:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn momentum_density(&self) -> VectorField {
        VectorField {
            grid: self.u.grid,
            comps: self
                .u
                .comps
                .iter()
                .map(|c| c.par_iter().zip(&self.rho.values).map(|(u, r)| u * r).collect())
                .collect(),
        }
    }
}

/// Integral quantities at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub m: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "E_k")]
    pub e_k: f64,
    #[serde(rename = "E_i")]
    pub e_i: f64,
    #[serde(rename = "E_m")]
    pub e_m: f64,
    pub total: f64,
    /// `∫|𝔻(u)|^q`.
    #[serde(rename = "D_q")]
    pub d_q: f64,
}

impl EnergyBreakdown {
    pub fn momentum_norm(&self) -> f64 {
        crate::thresholds::momentum_norm(&self.p)
    }
}

/// Mass, momentum, energy components and q-dissipation of `state`.
pub fn functionals(state: &FluidState, params: &ExponentParams) -> Result<EnergyBreakdown> {
    let grid = state.grid();
    let rho = &state.rho.values;
    let m = integrate(&grid, rho);
    let p = state
        .u
        .comps
        .iter()
        .map(|c| {
            let prod: Vec<f64> = c.par_iter().zip(rho).map(|(u, r)| u * r).collect();
            integrate(&grid, &prod)
        })
        .collect();
    let speed2 = speed_squared(&state.u);
    let ke: Vec<f64> = speed2.par_iter().zip(rho).map(|(s, r)| 0.5 * r * s).collect();
    let e_k = integrate(&grid, &ke);
    let (a, gamma) = (params.a, params.gamma);
    let e_i = integrate_map(&grid, rho, |r| a * r.powf(gamma) / (gamma - 1.0));
    let e_m = match &state.h {
        Some(h) => {
            let h2 = speed_squared(h);
            0.5 * integrate(&grid, &h2)
        }
        None => 0.0,
    };
    let d_q = dissipation(&state.u, params.q)?;
    Ok(EnergyBreakdown {
        m,
        p,
        e_k,
        e_i,
        e_m,
        total: e_k + e_i + e_m,
        d_q,
    })
}

/// `∫|𝔻(u)|^q`.
pub fn dissipation(u: &VectorField, q: f64) -> Result<f64> {
    let mag = tensor_magnitude(&shear_rate(u)?);
    Ok(integrate_map(&u.grid, &mag.values, |d| d.powf(q)))
}

pub(crate) fn speed_squared(v: &VectorField) -> Vec<f64> {
    (0..v.grid.len())
        .into_par_iter()
        .map(|i| v.comps.iter().map(|c| c[i] * c[i]).sum())
        .collect()
}

/// Radius of the smallest origin-centred ball holding every cell where
/// `ρ`, `|u|` or `|H|` exceeds `threshold` times its maximum.
pub fn support_radius(state: &FluidState, threshold: f64) -> f64 {
    let grid = state.grid();
    let mut flagged = vec![false; grid.len()];
    let mut mark = |values: &[f64]| {
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            let cut = threshold * max;
            for (f, v) in flagged.iter_mut().zip(values) {
                if *v > cut {
                    *f = true;
                }
            }
        }
    };
    mark(&state.rho.values);
    mark(&speed_squared(&state.u).iter().map(|s| s.sqrt()).collect::<Vec<_>>());
    if let Some(h) = &state.h {
        mark(&speed_squared(h).iter().map(|s| s.sqrt()).collect::<Vec<_>>());
    }
    flagged
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| {
            let x = grid.position(i);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
        })
        .fold(0.0, f64::max)
}
