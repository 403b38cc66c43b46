//! Stress models: Newtonian, power-law and generalized `β₀𝕀 + β𝔻`, the
//! barotropic pressure law `p = Aρ^γ`, and a pointwise coercivity check.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{shear_rate, ScalarField, TensorField, VectorField};

/// Scalar coefficient function of `(ρ, s)`.
pub type Coefficient = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum ModelKind {
    /// `λ (div u) 𝕀 + 2μ 𝔻`.
    Newtonian { lambda: f64, mu: f64 },
    /// `ν (|𝔻|² + ε²)^{(q−2)/2} 𝔻`.
    PowerLaw { nu: f64, q: f64, eps_reg: f64 },
    /// `β₀(ρ, div u) 𝕀 + β(ρ, |𝔻|) 𝔻`.
    Generalized { beta0: Coefficient, beta: Coefficient },
}

impl fmt::Debug for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Newtonian { lambda, mu } => f
                .debug_struct("Newtonian")
                .field("lambda", lambda)
                .field("mu", mu)
                .finish(),
            ModelKind::PowerLaw { nu, q, eps_reg } => f
                .debug_struct("PowerLaw")
                .field("nu", nu)
                .field("q", q)
                .field("eps_reg", eps_reg)
                .finish(),
            ModelKind::Generalized { .. } => f.write_str("Generalized { .. }"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    #[serde(rename = "A")]
    pub a: f64,
    pub gamma: f64,
}

impl PressureLaw {
    #[inline]
    pub fn pressure(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma)
    }

    /// `γAρ^{γ−1}/(γ−1)`, the derivative of the internal energy density.
    #[inline]
    pub fn enthalpy(&self, rho: f64) -> f64 {
        self.gamma * self.a * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * self.a * rho.powf(self.gamma - 1.0)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ConstitutiveModel {
    pub kind: ModelKind,
    pub pressure: PressureLaw,
}

impl ConstitutiveModel {
    pub fn power_law(nu: f64, q: f64, eps_reg: f64, a: f64, gamma: f64) -> Self {
        ConstitutiveModel {
            kind: ModelKind::PowerLaw { nu, q, eps_reg },
            pressure: PressureLaw { a, gamma },
        }
    }

    pub fn newtonian(lambda: f64, mu: f64, a: f64, gamma: f64) -> Self {
        ConstitutiveModel {
            kind: ModelKind::Newtonian { lambda, mu },
            pressure: PressureLaw { a, gamma },
        }
    }

    /// Checks the parameter invariants of the model in dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let PressureLaw { a, gamma } = self.pressure;
        // A = 0 is allowed for pressureless test runs.
        if !(a >= 0.0) {
            return Err(Error::domain("A must be non-negative"));
        }
        if !(gamma > 1.0) {
            return Err(Error::domain("gamma must exceed 1"));
        }
        match &self.kind {
            ModelKind::Newtonian { lambda, mu } => {
                if !(*mu > 0.0) {
                    return Err(Error::domain("mu must be positive"));
                }
                if !(lambda + 2.0 / n as f64 * mu > 0.0) {
                    return Err(Error::domain("lambda + (2/n) mu must be positive"));
                }
            }
            ModelKind::PowerLaw { nu, q, eps_reg } => {
                // ν = 0 gives the inviscid scheme used by some tests.
                if !(*nu >= 0.0) {
                    return Err(Error::domain("nu must be non-negative"));
                }
                if !(*q > 1.0) {
                    return Err(Error::domain("q must exceed 1"));
                }
                if !(*eps_reg >= 0.0) {
                    return Err(Error::domain("eps_reg must be non-negative"));
                }
            }
            ModelKind::Generalized { beta0, beta } => {
                for s in [0.0, 1e-12, 1e-8, 1e-4] {
                    for rho in [0.0, 1.0] {
                        if !beta0(rho, s).is_finite() || !beta(rho, s).is_finite() {
                            return Err(Error::domain(
                                "generalized coefficients must be bounded near zero",
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `(β₀, β)` with `ℙ = β₀𝕀 + β𝔻`, given `ρ`, `tr 𝔻` and `|𝔻|`.
    #[inline]
    pub fn coefficients(&self, rho: f64, trace: f64, norm: f64) -> (f64, f64) {
        match &self.kind {
            ModelKind::Newtonian { lambda, mu } => (lambda * trace, 2.0 * mu),
            ModelKind::PowerLaw { nu, q, eps_reg } => {
                let base = norm * norm + eps_reg * eps_reg;
                let beta = if base == 0.0 {
                    0.0
                } else {
                    nu * base.powf(0.5 * (q - 2.0))
                };
                (0.0, beta)
            }
            ModelKind::Generalized { beta0, beta } => (beta0(rho, trace), beta(rho, norm)),
        }
    }

    /// Effective viscosity used by the explicit time-step limit.
    pub fn effective_viscosity(&self, rho: f64, trace: f64, norm: f64) -> f64 {
        match &self.kind {
            ModelKind::Newtonian { lambda, mu } => (lambda + 2.0 * mu).max(2.0 * mu),
            ModelKind::PowerLaw { .. } => self.coefficients(rho, trace, norm).1,
            ModelKind::Generalized { beta0, beta } => {
                let ds = 1e-6 * (1.0 + trace.abs());
                let slope = (beta0(rho, trace + ds) - beta0(rho, trace - ds)) / (2.0 * ds);
                beta(rho, norm).abs() + slope.abs()
            }
        }
    }

    /// Coercivity pair `(ν, q)` the model satisfies pointwise, when known.
    pub fn coercivity(&self) -> Option<(f64, f64)> {
        match &self.kind {
            ModelKind::PowerLaw { nu, q, .. } => Some((*nu, *q)),
            ModelKind::Newtonian { lambda, mu } if *lambda >= 0.0 => Some((2.0 * mu, 2.0)),
            _ => None,
        }
    }
}

/// `p = Aρ^γ` cell-wise.
pub fn pressure(rho: &ScalarField, a: f64, gamma: f64) -> Result<ScalarField> {
    if let Some(i) = rho.values.iter().position(|&r| r < 0.0) {
        return Err(Error::NegativeDensity(i));
    }
    let law = PressureLaw { a, gamma };
    Ok(ScalarField {
        grid: rho.grid,
        values: rho.values.par_iter().map(|&r| law.pressure(r)).collect(),
    })
}

/// Viscous part `ℙ(ρ, 𝔻)` of the stress.
pub fn viscous_stress(model: &ConstitutiveModel, rho: &ScalarField, u: &VectorField) -> Result<TensorField> {
    rho.grid.check_same(&u.grid)?;
    let d = shear_rate(u)?;
    Ok(stress_from_shear(model, rho, &d))
}

pub(crate) fn stress_from_shear(model: &ConstitutiveModel, rho: &ScalarField, d: &TensorField) -> TensorField {
    let n = d.dim;
    let len = d.grid.len();
    let coeffs: Vec<(f64, f64)> = (0..len)
        .into_par_iter()
        .map(|c| {
            let trace: f64 = (0..n).map(|i| d.get(i, i)[c]).sum();
            let norm = d.comps.iter().map(|x| x[c] * x[c]).sum::<f64>().sqrt();
            model.coefficients(rho.values[c], trace, norm)
        })
        .collect();
    let mut out = TensorField::zeros(d.grid, n);
    for i in 0..n {
        for j in 0..n {
            let src = d.get(i, j);
            out.comps[i * n + j] = coeffs
                .par_iter()
                .zip(src)
                .map(|(&(b0, b), &dij)| if i == j { b0 + b * dij } else { b * dij })
                .collect();
        }
    }
    out
}

/// Full stress `𝕊 = −p𝕀 + ℙ`.
pub fn full_stress(model: &ConstitutiveModel, rho: &ScalarField, u: &VectorField) -> Result<TensorField> {
    let p = pressure(rho, model.pressure.a, model.pressure.gamma)?;
    let mut s = viscous_stress(model, rho, u)?;
    let n = s.dim;
    for i in 0..n {
        s.comps[i * n + i]
            .par_iter_mut()
            .zip(&p.values)
            .for_each(|(sii, pi)| *sii -= pi);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub samples_checked: usize,
    /// Minimum over samples of `β₀ tr𝔹 + β|𝔹|² − ν|𝔹|^q`.
    pub min_slack: f64,
    /// Scale used for the pass threshold `min_slack >= −1e−10·scale`.
    pub scale: f64,
    pub passed: bool,
    pub note: Option<String>,
}

/// Evaluates the pointwise coercivity inequality
/// `β₀(g, tr𝔹) tr𝔹 + β(g, |𝔹|)|𝔹|² >= ν|𝔹|^q` over every pair of a density
/// sample `g` and a symmetric matrix sample `𝔹` (row-major, `dim × dim`).
pub fn coercivity_check(
    model: &ConstitutiveModel,
    g_samples: &[f64],
    b_samples: &[Vec<f64>],
    dim: usize,
    nu: f64,
    q: f64,
) -> Result<CoercivityReport> {
    if g_samples.is_empty() || b_samples.is_empty() {
        return Err(Error::domain("coercivity check needs non-empty sample sets"));
    }
    let mut min_slack = f64::INFINITY;
    let mut scale = 1.0f64;
    for b in b_samples {
        if b.len() != dim * dim {
            return Err(Error::Dimension(format!("matrix sample has {} entries", b.len())));
        }
        for i in 0..dim {
            for j in 0..i {
                if (b[i * dim + j] - b[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::domain("matrix samples must be symmetric"));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| b[i * dim + i]).sum();
        let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        for &g in g_samples {
            let (b0, beta) = model.coefficients(g, trace, norm);
            let lhs = b0 * trace + beta * norm * norm;
            let rhs = nu * norm.powf(q);
            scale = scale.max(lhs.abs()).max(rhs.abs());
            min_slack = min_slack.min(lhs - rhs);
        }
    }
    let note = match &model.kind {
        ModelKind::Newtonian { lambda, .. } if *lambda < 0.0 => {
            Some("lambda < 0: the bulk term can be negative, coercivity with q = 2 may fail".into())
        }
        ModelKind::PowerLaw { q: mq, eps_reg, .. } if *eps_reg > 0.0 && *mq < 2.0 => {
            Some("regularized power law with q < 2 lies below nu|B|^q".into())
        }
        _ => None,
    };
    Ok(CoercivityReport {
        samples_checked: g_samples.len() * b_samples.len(),
        min_slack,
        scale,
        passed: min_slack >= -1e-10 * scale,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, sample_vector, Grid};

    fn interior(g: &Grid, i: usize) -> bool {
        g.coords(i)[..g.n()].iter().all(|&c| c > 0 && c + 1 < g.cells()[0])
    }

    #[test]
    fn pressure_examples() {
        let g = Grid::cubic(1, 8, 1.0).unwrap();
        let one = pressure(&ScalarField::constant(g, 1.0), 1.0, 1.4).unwrap();
        assert!(one.values.iter().all(|&p| p == 1.0));
        let zero = pressure(&ScalarField::zeros(g), 1.0, 1.4).unwrap();
        assert!(zero.values.iter().all(|&p| p == 0.0));
        let two = pressure(&ScalarField::constant(g, 2.0), 1.0, 1.4).unwrap();
        assert!((two.values[0] - 2.639_015_821_545_788_5).abs() < 1e-12);
        let mut neg = ScalarField::zeros(g);
        neg.values[3] = -1e-3;
        assert!(matches!(pressure(&neg, 1.0, 1.4), Err(Error::NegativeDensity(3))));
    }

    #[test]
    fn zero_velocity_gives_zero_stress() {
        let g = Grid::cubic(2, 8, 1.0).unwrap();
        let rho = ScalarField::constant(g, 1.0);
        let u = VectorField::zeros(g, 2);
        let models = [
            ConstitutiveModel::newtonian(0.3, 1.0, 1.0, 1.4),
            ConstitutiveModel::power_law(1.0, 1.5, 0.1, 1.0, 1.4),
            ConstitutiveModel::power_law(1.0, 2.5, 0.0, 1.0, 1.4),
        ];
        for m in &models {
            let p = viscous_stress(m, &rho, &u).unwrap();
            assert!(p.comps.iter().flatten().all(|&v| v == 0.0));
        }
        let s = full_stress(&models[0], &rho, &u).unwrap();
        assert_eq!(s.comps[0][0], -1.0);
        assert_eq!(s.comps[1][0], 0.0);
        assert_eq!(s.comps[3][0], -1.0);
    }

    #[test]
    fn power_law_q2_is_linear() {
        let g = Grid::cubic(2, 16, 2.0).unwrap();
        let rho = ScalarField::constant(g, 1.0);
        let u = sample_vector(g, 2, |x| [x[1].sin(), (0.5 * x[0]).cos(), 0.0]).unwrap();
        let p = viscous_stress(&ConstitutiveModel::power_law(0.7, 2.0, 0.0, 1.0, 1.4), &rho, &u).unwrap();
        let d = shear_rate(&u).unwrap();
        for (pc, dc) in p.comps.iter().zip(&d.comps) {
            for (a, b) in pc.iter().zip(dc) {
                assert!((a - 0.7 * b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn newtonian_plane_strain() {
        let g = Grid::cubic(2, 16, 2.0).unwrap();
        let rho = ScalarField::constant(g, 1.0);
        let u = sample_vector(g, 2, |x| [x[0], -x[1], 0.0]).unwrap();
        let p = viscous_stress(&ConstitutiveModel::newtonian(0.4, 1.5, 1.0, 1.4), &rho, &u).unwrap();
        for i in (0..g.len()).filter(|&i| interior(&g, i)) {
            assert!((p.comps[0][i] - 3.0).abs() < 1e-10);
            assert!(p.comps[1][i].abs() < 1e-10);
            assert!((p.comps[3][i] + 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_stress_is_viscous() {
        let g = Grid::cubic(2, 8, 1.0).unwrap();
        let rho = ScalarField::zeros(g);
        let u = sample_vector(g, 2, |x| [x[1].sin(), x[0].cos(), 0.0]).unwrap();
        let m = ConstitutiveModel::power_law(1.0, 2.5, 0.0, 1.0, 1.4);
        assert_eq!(full_stress(&m, &rho, &u).unwrap(), viscous_stress(&m, &rho, &u).unwrap());
    }

    #[test]
    fn full_stress_composition() {
        let g = Grid::cubic(2, 8, 1.0).unwrap();
        let rho = sample(g, |x| 1.0 + 0.5 * x[0].sin()).unwrap();
        let u = sample_vector(g, 2, |x| [x[1].sin(), x[0].cos(), 0.0]).unwrap();
        let m = ConstitutiveModel::power_law(1.0, 2.5, 0.0, 2.0, 1.4);
        let s = full_stress(&m, &rho, &u).unwrap();
        let p = pressure(&rho, 2.0, 1.4).unwrap();
        let v = viscous_stress(&m, &rho, &u).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for c in 0..g.len() {
                    let expect = v.comps[i * 2 + j][c] - if i == j { p.values[c] } else { 0.0 };
                    assert_eq!(s.comps[i * 2 + j][c], expect);
                }
            }
        }
    }

    fn matrix_samples(dim: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; dim * dim]];
        for k in 0..40 {
            let t = k as f64 * 0.25;
            let mut b = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..=i {
                    let v = t * ((i * 3 + j) as f64 + 0.3 * t).sin();
                    b[i * dim + j] = v;
                    b[j * dim + i] = v;
                }
            }
            out.push(b);
        }
        out
    }

    #[test]
    fn power_law_coercivity_is_equality() {
        let m = ConstitutiveModel::power_law(1.3, 2.5, 0.0, 1.0, 1.4);
        let r = coercivity_check(&m, &[0.0, 0.5, 2.0], &matrix_samples(3), 3, 1.3, 2.5).unwrap();
        assert!(r.passed);
        assert!(r.min_slack.abs() <= 1e-12 * r.scale);
        assert_eq!(r.samples_checked, 3 * 41);
    }

    #[test]
    fn regularized_shear_thinning_fails_coercivity() {
        // (|B|² + ε²)^{(q−2)/2} < |B|^{q−2} for q < 2, so the slack is negative.
        let m = ConstitutiveModel::power_law(1.0, 1.5, 0.1, 1.0, 1.4);
        let samples: Vec<Vec<f64>> = (0..=100)
            .map(|k| {
                let s = k as f64 * 0.1 / 2f64.sqrt();
                vec![s, 0.0, 0.0, s]
            })
            .collect();
        let r = coercivity_check(&m, &[1.0], &samples, 2, 1.0, 1.5).unwrap();
        assert!(!r.passed);
        assert!(r.min_slack < 0.0);
        assert!(r.note.is_some());
    }

    #[test]
    fn zero_matrix_has_zero_slack() {
        let m = ConstitutiveModel::power_law(1.0, 1.5, 0.0, 1.0, 1.4);
        let r = coercivity_check(&m, &[1.0], &[vec![0.0; 4]], 2, 1.0, 1.5).unwrap();
        assert_eq!(r.min_slack, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn newtonian_coercivity() {
        let m = ConstitutiveModel::newtonian(0.5, 1.0, 1.0, 1.4);
        let r = coercivity_check(&m, &[1.0], &matrix_samples(2), 2, 2.0, 2.0).unwrap();
        assert!(r.passed);
        let m = ConstitutiveModel::newtonian(-0.5, 1.0, 1.0, 1.4);
        let r = coercivity_check(&m, &[1.0], &matrix_samples(2), 2, 2.0, 2.0).unwrap();
        assert!(!r.passed);
        assert!(r.note.is_some());
    }
}
