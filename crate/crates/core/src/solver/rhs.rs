//! Semi-discrete right-hand sides.
//!
//! The inviscid part is written in flux form with a two-point face flux
//!
//! ```text
//! F_ρ = ρ̂ ū_d,   F_m = F_ρ ū + p̄ e_d,   ρ̂ = [p]/[h(ρ)]
//! ```
//!
//! where bars are arithmetic face averages and `h(ρ)` is the enthalpy. With
//! this density mean the discrete kinetic plus internal energy is conserved
//! exactly by the inviscid terms, and mass and momentum telescope. The
//! viscous term is the central divergence of the stress built from the
//! central shear rate, so its energy contribution is exactly `−Σ ℙ:𝔻 hⁿ`.
//! The magnetic terms use central curls; the induction work and the
//! Lorentz work cancel cell by cell in the sum.

use rayon::prelude::*;

use crate::constitutive::{stress_from_shear, ConstitutiveModel, PressureLaw};
use crate::error::{Error, Result};
use crate::fields::{
    compact_laplacian, curl, gradient, ops::shifted, symmetrize, tensor_divergence, FluidState, Grid, ScalarField,
    VectorField,
};

/// Optional terms switched on per run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Terms {
    /// Resistivity `η`.
    pub eta: f64,
    /// Coefficient `σ` of the `−σΔ²u` momentum filter.
    pub hyperdiffusion: f64,
    /// Keep `ρ` and `u` fixed; only `H` evolves.
    pub frozen_velocity: bool,
}

/// Time derivatives of density, momentum and (when present) `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub drho: Vec<f64>,
    pub dmom: Vec<Vec<f64>>,
    pub dh: Option<Vec<Vec<f64>>>,
}

/// Face density `[p]/[h]` for the pressure law; reduces to `ρ` when the two
/// sides agree and to the arithmetic mean without pressure.
#[inline]
pub fn face_density(law: &PressureLaw, left: f64, right: f64) -> f64 {
    face_density_from(
        law,
        left,
        right,
        law.pressure(left),
        law.pressure(right),
        law.enthalpy(left),
        law.enthalpy(right),
    )
}

/// [`face_density`] given the pressures and enthalpies of both sides.
#[inline]
fn face_density_from(law: &PressureLaw, left: f64, right: f64, p_l: f64, p_r: f64, h_l: f64, h_r: f64) -> f64 {
    let mean = 0.5 * (left + right);
    if law.a == 0.0 || mean <= 0.0 {
        return mean;
    }
    let delta = 0.5 * (right - left) / mean;
    if delta.abs() < 1e-3 {
        // Series of the quotient in the relative jump; the next term is O(δ⁶).
        let g = law.gamma;
        let d2 = delta * delta;
        let c2 = (g - 2.0) / 3.0;
        let c4 = -(g - 2.0) * (g - 3.0) * (g + 1.0) / 45.0;
        return mean * (1.0 + d2 * (c2 + d2 * c4));
    }
    (p_r - p_l) / (h_r - h_l)
}

fn inviscid(state: &FluidState, law: &PressureLaw, out: &mut Rhs) {
    let grid = state.grid();
    let n = grid.n();
    let rho = &state.rho.values;
    let u = &state.u.comps;
    let p: Vec<f64> = rho.par_iter().map(|&r| law.pressure(r)).collect();
    let enthalpy: Vec<f64> = if law.a == 0.0 {
        vec![0.0; rho.len()]
    } else {
        let k = law.gamma / (law.gamma - 1.0);
        p.par_iter().zip(rho).map(|(p, r)| if *r > 0.0 { k * p / r } else { 0.0 }).collect()
    };
    for d in 0..n {
        let inv_h = 1.0 / grid.spacing(d);
        let rho_n = shifted(&grid, rho, d, true);
        let p_n = shifted(&grid, &p, d, true);
        let h_n = shifted(&grid, &enthalpy, d, true);
        let ud_n = shifted(&grid, &u[d], d, true);
        // Mass flux through the forward face of each cell.
        let f_rho: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mean = face_density_from(law, rho[i], rho_n[i], p[i], p_n[i], enthalpy[i], h_n[i]);
                mean * 0.5 * (u[d][i] + ud_n[i])
            })
            .collect();
        let apply = |target: &mut [f64], flux: &[f64]| {
            let back = shifted(&grid, flux, d, false);
            target
                .par_iter_mut()
                .zip(flux.par_iter().zip(&back))
                .for_each(|(v, (f, b))| *v -= (f - b) * inv_h);
        };
        apply(&mut out.drho, &f_rho);
        for c in 0..n {
            let uc_n = if c == d { ud_n.clone() } else { shifted(&grid, &u[c], d, true) };
            let f_mom: Vec<f64> = (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let mut f = f_rho[i] * 0.5 * (u[c][i] + uc_n[i]);
                    if c == d {
                        f += 0.5 * (p[i] + p_n[i]);
                    }
                    f
                })
                .collect();
            apply(&mut out.dmom[c], &f_mom);
        }
    }
}

fn add_into(target: &mut [f64], src: &[f64], factor: f64) {
    target.par_iter_mut().zip(src).for_each(|(t, s)| *t += factor * s);
}

fn cross(a: &VectorField, b: &VectorField) -> VectorField {
    let len = a.grid.len();
    let mut comps = vec![vec![0.0; len]; 3];
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        comps[k] = (0..len)
            .into_par_iter()
            .map(|c| a.comps[i][c] * b.comps[j][c] - a.comps[j][c] * b.comps[i][c])
            .collect();
    }
    VectorField { grid: a.grid, comps }
}

/// Full right-hand side with the selected optional terms.
pub fn evaluate(state: &FluidState, model: &ConstitutiveModel, terms: &Terms) -> Result<Rhs> {
    let grid: Grid = state.grid();
    let n = grid.n();
    let len = grid.len();
    let mut out = Rhs {
        drho: vec![0.0; len],
        dmom: vec![vec![0.0; len]; n],
        dh: None,
    };
    if !terms.frozen_velocity {
        inviscid(state, &model.pressure, &mut out);
        let d = symmetrize(&gradient(&state.u)?);
        let stress = stress_from_shear(model, &state.rho, &d);
        let div = tensor_divergence(&stress);
        for c in 0..n {
            add_into(&mut out.dmom[c], &div.comps[c], 1.0);
        }
        if terms.hyperdiffusion > 0.0 {
            for c in 0..n {
                let lap = compact_laplacian(&grid, &state.u.comps[c]);
                let bilap = compact_laplacian(&grid, &lap);
                add_into(&mut out.dmom[c], &bilap, -terms.hyperdiffusion);
            }
        }
    }
    if let Some(h) = &state.h {
        if n != 3 {
            return Err(Error::Dimension("magnetic terms need n = 3".into()));
        }
        let j = curl(h)?;
        if !terms.frozen_velocity {
            let lorentz = cross(&j, h);
            for c in 0..3 {
                add_into(&mut out.dmom[c], &lorentz.comps[c], 1.0);
            }
        }
        let mut dh = curl(&cross(&state.u, h))?.comps;
        if terms.eta > 0.0 {
            let cc = curl(&j)?;
            for c in 0..3 {
                add_into(&mut dh[c], &cc.comps[c], -terms.eta);
            }
        }
        out.dh = Some(dh);
    }
    Ok(out)
}

/// `(∂ρ/∂t, ∂(ρu)/∂t)` of the compressible system without magnetic field.
pub fn rhs_fluid(state: &FluidState, model: &ConstitutiveModel) -> Result<(ScalarField, VectorField)> {
    let fluid = FluidState {
        h: None,
        ..state.clone()
    };
    let r = evaluate(&fluid, model, &Terms::default())?;
    let grid = state.grid();
    Ok((
        ScalarField {
            grid,
            values: r.drho,
        },
        VectorField { grid, comps: r.dmom },
    ))
}

/// `(∂ρ/∂t, ∂(ρu)/∂t, ∂H/∂t)` of the MHD system; no projection is applied.
pub fn rhs_mhd(
    state: &FluidState,
    model: &ConstitutiveModel,
    eta: f64,
) -> Result<(ScalarField, VectorField, VectorField)> {
    let grid = state.grid();
    if grid.n() != 3 {
        return Err(Error::Dimension(format!("MHD needs n = 3, got {}", grid.n())));
    }
    let with_h = match &state.h {
        Some(_) => state.clone(),
        None => FluidState {
            h: Some(VectorField::zeros(grid, 3)),
            ..state.clone()
        },
    };
    let terms = Terms {
        eta,
        ..Terms::default()
    };
    let r = evaluate(&with_h, model, &terms)?;
    Ok((
        ScalarField {
            grid,
            values: r.drho,
        },
        VectorField { grid, comps: r.dmom },
        VectorField {
            grid,
            comps: r.dh.expect("magnetic field present"),
        },
    ))
}
