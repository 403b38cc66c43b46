//! Two-sided evaluation of the functional inequalities used in the
//! nonexistence proofs, on discrete fields.
//!
//! Hölder and Jensen hold exactly for the discrete (counting-measure)
//! integrals, so they get an algebraic tolerance. The Sobolev bound and the
//! composite dissipation bound only hold up to discretization error.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    functionals, gradient, integrate, shear_rate, tensor_magnitude, EnergyBreakdown, FluidState, ScalarField,
    VectorField,
};
use crate::fields::reduce::integrate_map;
use crate::thresholds::{
    self, admissibility, density_exponent, internal_energy_exponent, momentum_k1, sobolev_k, velocity_exponent,
    ExponentParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityName {
    Sobolev10,
    Holder11,
    Holder13,
    Jensen14,
    Momentum16,
    DissipationBound,
}

/// Which derivative enters the right-hand side of the Sobolev bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientChoice {
    /// Full velocity gradient `∇u`.
    #[default]
    Full,
    /// Shear rate `𝔻(u)`.
    Symmetric,
}

/// Both sides of one inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: InequalityName,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub tol: f64,
    pub passed: bool,
    pub context: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn new(name: InequalityName, lhs: f64, rhs: f64, tol: f64, context: &[(&str, f64)]) -> Self {
        let slack = rhs - lhs;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        InequalityReport {
            name,
            lhs,
            rhs,
            slack,
            tol,
            passed: slack >= -tol * scale,
            context: context.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    /// Slack divided by `max(|lhs|, |rhs|, 1)`.
    pub fn relative_slack(&self) -> f64 {
        self.slack / self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

fn check_q(n: usize, q: f64) -> Result<()> {
    if n < 2 || !(q > 1.0) || !(q < n as f64) {
        return Err(Error::domain(format!("need n >= 2 and 1 < q < n, got n = {n}, q = {q}")));
    }
    Ok(())
}

/// `∫|u|^{qn/(n−q)}`.
fn velocity_power_integral(u: &VectorField, q: f64) -> f64 {
    let r = velocity_exponent(u.grid.n(), q);
    let mag = u.magnitude();
    integrate_map(&u.grid, &mag.values, |v| v.powf(r))
}

/// `(∫|u|^{qn/(n−q)})^{(n−q)/n} <= K ∫|Gu|^q`.
pub fn verify_sobolev10(u: &VectorField, q: f64, choice: GradientChoice, tol: f64) -> Result<InequalityReport> {
    let n = u.grid.n();
    check_q(n, q)?;
    let k = sobolev_k(n, q)?;
    let nf = n as f64;
    let lhs = velocity_power_integral(u, q).powf((nf - q) / nf);
    let g = match choice {
        GradientChoice::Full => gradient(u)?,
        GradientChoice::Symmetric => shear_rate(u)?,
    };
    let mag = tensor_magnitude(&g);
    let grad_q = integrate_map(&u.grid, &mag.values, |v| v.powf(q));
    Ok(InequalityReport::new(
        InequalityName::Sobolev10,
        lhs,
        k * grad_q,
        tol,
        &[
            ("q", q),
            ("n", nf),
            ("K", k),
            ("symmetric", (choice == GradientChoice::Symmetric) as u8 as f64),
        ],
    ))
}

/// `∫ρ^σ <= (∫ρ)^{(γ−σ)/(γ−1)} (∫ρ^γ)^{(σ−1)/(γ−1)}` for `1 < σ < γ`.
pub fn verify_holder11(rho: &ScalarField, sigma: f64, gamma: f64, tol: f64) -> Result<InequalityReport> {
    if !(sigma > 1.0 && sigma < gamma) {
        return Err(Error::domain(format!("need 1 < sigma < gamma, got sigma = {sigma}, gamma = {gamma}")));
    }
    let g = &rho.grid;
    let lhs = integrate_map(g, &rho.values, |r| r.powf(sigma));
    let mass = integrate(g, &rho.values);
    let high = integrate_map(g, &rho.values, |r| r.powf(gamma));
    let rhs = mass.powf((gamma - sigma) / (gamma - 1.0)) * high.powf((sigma - 1.0) / (gamma - 1.0));
    Ok(InequalityReport::new(
        InequalityName::Holder11,
        lhs,
        rhs,
        tol,
        &[("sigma", sigma), ("gamma", gamma)],
    ))
}

/// `|∫ρu| <= (∫ρ^s)^{1/s} (∫|u|^r)^{1/r}`, `s = qn/(n(q−1)+q)`, `r = qn/(n−q)`.
pub fn verify_holder13(rho: &ScalarField, u: &VectorField, q: f64, tol: f64) -> Result<InequalityReport> {
    rho.grid.check_same(&u.grid)?;
    let n = rho.grid.n();
    check_q(n, q)?;
    let s = density_exponent(n, q);
    let r = velocity_exponent(n, q);
    let lhs = momentum(rho, u);
    let rho_s = integrate_map(&rho.grid, &rho.values, |v| v.powf(s));
    let rhs = rho_s.powf(1.0 / s) * velocity_power_integral(u, q).powf(1.0 / r);
    Ok(InequalityReport::new(
        InequalityName::Holder13,
        lhs,
        rhs,
        tol,
        &[("q", q), ("s", s), ("r", r)],
    ))
}

fn momentum(rho: &ScalarField, u: &VectorField) -> f64 {
    let p: Vec<f64> = u
        .comps
        .iter()
        .map(|c| {
            let prod: Vec<f64> = c.iter().zip(&rho.values).map(|(a, b)| a * b).collect();
            integrate(&rho.grid, &prod)
        })
        .collect();
    thresholds::momentum_norm(&p)
}

/// `((1/m)∫ρ^s)^β <= (1/m)∫ρ^γ` with `β = (γ−1)(n(q−1)+q)/(n−q) >= 1`.
pub fn verify_jensen14(rho: &ScalarField, q: f64, gamma: f64, a: f64, mass: f64, tol: f64) -> Result<InequalityReport> {
    let n = rho.grid.n();
    check_q(n, q)?;
    if !thresholds::condition15(n, gamma, q) {
        return Err(Error::domain(format!(
            "Jensen step needs (γ−1)(n(q−1)+q)/(n−q) >= 1, got {}",
            thresholds::condition15_value(n, gamma, q)
        )));
    }
    if !(mass > 0.0) {
        return Err(Error::domain("total mass must be positive"));
    }
    let s = density_exponent(n, q);
    let beta = thresholds::condition15_value(n, gamma, q);
    let rho_s = integrate_map(&rho.grid, &rho.values, |v| v.powf(s));
    let lhs = (rho_s / mass).powf(beta);
    let rhs = integrate_map(&rho.grid, &rho.values, |v| v.powf(gamma)) / mass;
    Ok(InequalityReport::new(
        InequalityName::Jensen14,
        lhs,
        rhs,
        tol,
        &[("q", q), ("gamma", gamma), ("A", a), ("m", mass), ("beta", beta)],
    ))
}

/// `|P| <= K1 E_i^{(n−q)/(qn(γ−1))} (∫|u|^r)^{(n−q)/(qn)}`.
pub fn verify_momentum16(
    rho: &ScalarField,
    u: &VectorField,
    params: &ExponentParams,
    tol: f64,
) -> Result<InequalityReport> {
    let n = rho.grid.n();
    check_q(n, params.q)?;
    let (q, gamma, a) = (params.q, params.gamma, params.a);
    let mass = integrate(&rho.grid, &rho.values);
    let k1 = momentum_k1(n, gamma, q, mass, a)?;
    let e_i = integrate_map(&rho.grid, &rho.values, |r| a * r.powf(gamma) / (gamma - 1.0));
    let lhs = momentum(rho, u);
    let rhs = k1
        * e_i.powf(internal_energy_exponent(n, gamma, q))
        * velocity_power_integral(u, q).powf(1.0 / velocity_exponent(n, q));
    Ok(InequalityReport::new(
        InequalityName::Momentum16,
        lhs,
        rhs,
        tol,
        &[("q", q), ("gamma", gamma), ("K1", k1), ("E_i", e_i), ("m", mass)],
    ))
}

/// Lower bound `(1/K)(|P| / (K1 E_i^a))^q` on `∫|𝔻|^q` implied by the
/// Sobolev, Hölder and Jensen steps, `a = (n−q)/(qn(γ−1))`.
pub fn dissipation_bound_lhs(params: &ExponentParams, mass: f64, momentum_norm: f64, e_i: f64) -> Result<f64> {
    let (n, gamma, q) = (params.n, params.gamma, params.q);
    let k = sobolev_k(n, q)?;
    let k1 = momentum_k1(n, gamma, q, mass, params.a)?;
    if !(e_i > 0.0) {
        return Err(Error::domain("internal energy must be positive"));
    }
    let denom = k1 * e_i.powf(internal_energy_exponent(n, gamma, q));
    Ok((momentum_norm / denom).powf(q) / k)
}

/// Dissipation bound evaluated from integral quantities alone.
pub fn dissipation_report(params: &ExponentParams, e: &EnergyBreakdown, tol: f64) -> Result<InequalityReport> {
    let report = admissibility(params, &e.p, false);
    // Momentum may vanish: the bound is then trivially 0 <= D_q.
    let hypotheses_ok = report.dimension_ok && report.in_q_range && report.condition15;
    if !hypotheses_ok {
        return Err(Error::domain(format!(
            "dissipation bound needs admissible parameters: {}",
            report.failure_reason().unwrap_or_default()
        )));
    }
    let lhs = dissipation_bound_lhs(params, e.m, e.momentum_norm(), e.e_i)?;
    Ok(InequalityReport::new(
        InequalityName::DissipationBound,
        lhs,
        e.d_q,
        tol,
        &[("q", params.q), ("m", e.m), ("P", e.momentum_norm()), ("E_i", e.e_i)],
    ))
}

/// Checks `(1/K)(|P|/(K1 E_i^a))^q <= ∫|𝔻(u)|^q` on a state.
pub fn dissipation_lower_bound(
    state: &FluidState,
    params: &ExponentParams,
    mass: f64,
    tol: f64,
) -> Result<InequalityReport> {
    let mut e = functionals(state, params)?;
    e.m = mass;
    dissipation_report(params, &e, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, sample_vector, Grid};

    fn gauss(x: [f64; 3], w: f64) -> f64 {
        (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (w * w)).exp()
    }

    #[test]
    fn sobolev_zero_field() {
        let g = Grid::cubic(2, 16, 4.0).unwrap();
        let r = verify_sobolev10(&VectorField::zeros(g, 2), 1.5, GradientChoice::Full, 0.05).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.passed);
    }

    #[test]
    fn sobolev_homogeneity() {
        let g = Grid::cubic(2, 64, 6.0).unwrap();
        let u = sample_vector(g, 2, |x| [gauss(x, 1.0), 0.5 * x[0] * gauss(x, 1.0), 0.0]).unwrap();
        let a = verify_sobolev10(&u, 1.5, GradientChoice::Full, 0.05).unwrap();
        let b = verify_sobolev10(&u.scaled(2.0), 1.5, GradientChoice::Full, 0.05).unwrap();
        let f = 2f64.powf(1.5);
        assert!((b.lhs / a.lhs / f - 1.0).abs() < 1e-10);
        assert!((b.rhs / a.rhs / f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sobolev_rejects_q_out_of_range() {
        let g = Grid::cubic(2, 16, 4.0).unwrap();
        let u = VectorField::zeros(g, 2);
        assert!(verify_sobolev10(&u, 2.0, GradientChoice::Full, 0.05).is_err());
        assert!(verify_sobolev10(&u, 1.0, GradientChoice::Full, 0.05).is_err());
    }

    #[test]
    fn holder11_equality_and_zero() {
        let g = Grid::cubic(2, 16, 1.0).unwrap();
        let r = verify_holder11(&ScalarField::constant(g, 0.7), 1.2, 1.4, 1e-10).unwrap();
        assert!(r.slack.abs() <= 1e-12 * r.lhs.max(1.0));
        let r = verify_holder11(&ScalarField::zeros(g), 1.2, 1.4, 1e-10).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(verify_holder11(&ScalarField::zeros(g), 1.5, 1.4, 1e-10).is_err());
    }

    #[test]
    fn holder13_equality_case() {
        let g = Grid::cubic(3, 16, 2.0).unwrap();
        let inside = |x: [f64; 3]| x[0].abs() < 1.0 && x[1].abs() < 1.0 && x[2].abs() < 1.0;
        let rho = sample(g, |x| if inside(x) { 1.0 } else { 0.0 }).unwrap();
        let u = sample_vector(g, 3, |x| if inside(x) { [0.3, -0.4, 1.2] } else { [0.0; 3] }).unwrap();
        let r = verify_holder13(&rho, &u, 2.5, 1e-10).unwrap();
        assert!(r.passed);
        assert!(r.relative_slack().abs() < 1e-10);
        let r0 = verify_holder13(&rho, &VectorField::zeros(g, 3), 2.5, 1e-10).unwrap();
        assert_eq!(r0.lhs, 0.0);
        assert!(r0.passed);
    }

    #[test]
    fn holder13_scale_covariance() {
        let g = Grid::cubic(3, 16, 3.0).unwrap();
        let rho = sample(g, |x| gauss(x, 1.0)).unwrap();
        let u = sample_vector(g, 3, |x| [gauss(x, 0.8), x[1] * gauss(x, 1.0), 0.0]).unwrap();
        let a = verify_holder13(&rho, &u, 2.5, 1e-10).unwrap();
        let b = verify_holder13(&rho.scaled(3.0), &u, 2.5, 1e-10).unwrap();
        assert!((b.lhs / a.lhs / 3.0 - 1.0).abs() < 1e-12);
        assert!((b.rhs / a.rhs / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jensen_equality_and_condition() {
        let g = Grid::cubic(3, 16, 2.0).unwrap();
        let rho = sample(g, |x| if x[0].abs() < 1.0 && x[1].abs() < 1.0 { 2.0 } else { 0.0 }).unwrap();
        let m = integrate(&g, &rho.values);
        let r = verify_jensen14(&rho, 2.5, 1.4, 1.0, m, 1e-10).unwrap();
        assert!(r.relative_slack().abs() < 1e-10);
        // n = 3, γ = 1.05, q = 1.2 violates the validity condition.
        assert!(verify_jensen14(&rho, 1.2, 1.05, 1.0, m, 1e-10).is_err());
    }

    #[test]
    fn dissipation_bound_zero_momentum() {
        let g = Grid::cubic(3, 16, 4.0).unwrap();
        let rho = sample(g, |x| gauss(x, 1.0)).unwrap();
        let state = FluidState {
            rho: rho.clone(),
            u: VectorField::zeros(g, 3),
            h: None,
            time: 0.0,
        };
        let params = ExponentParams {
            n: 3,
            gamma: 1.4,
            a: 1.0,
            nu: 1.0,
            q: 2.5,
            eta: 0.0,
        };
        let m = integrate(&g, &rho.values);
        let r = dissipation_lower_bound(&state, &params, m, 0.1).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.passed);
    }
}
