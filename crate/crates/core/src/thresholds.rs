//! Closed-form exponents, constants and hypothesis checks for the
//! nonexistence theorems.
//!
//! Everything here is a pure function of its arguments. Interval endpoints
//! are compared exactly: the inputs are user-chosen parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model and theorem parameters `(n, γ, A, ν, q, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub n: usize,
    pub gamma: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub nu: f64,
    pub q: f64,
    #[serde(default)]
    pub eta: f64,
}

impl ExponentParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("dimension n must be at least 1"));
        }
        if !(self.gamma > 1.0) {
            return Err(Error::domain("gamma must exceed 1"));
        }
        if !(self.a > 0.0) {
            return Err(Error::domain("A must be positive"));
        }
        if !(self.nu > 0.0) {
            return Err(Error::domain("nu must be positive"));
        }
        if !(self.q > 1.0) {
            return Err(Error::domain("q must exceed 1"));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::domain("eta must be non-negative"));
        }
        Ok(())
    }
}

fn check_n_gamma(n: usize, gamma: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("n = {n} < 2: threshold exponents need n >= 2")));
    }
    if !(gamma > 1.0) {
        return Err(Error::domain("gamma must exceed 1"));
    }
    Ok(())
}

/// Lower end of the admissible coercivity range, `2nγ / (n(γ−1) + 2γ)`.
pub fn q0(n: usize, gamma: f64) -> Result<f64> {
    check_n_gamma(n, gamma)?;
    let n = n as f64;
    Ok(2.0 * n * gamma / (n * (gamma - 1.0) + 2.0 * gamma))
}

/// Exponent above which the momentum Hölder bound is available, `nγ / ((n+1)(γ−1) + 1)`.
pub fn q1(n: usize, gamma: f64) -> Result<f64> {
    check_n_gamma(n, gamma)?;
    let n = n as f64;
    Ok(n * gamma / ((n + 1.0) * (gamma - 1.0) + 1.0))
}

/// Exponent `2nσ / ((σ−1)n + 2σ)` used to bound the kinetic energy through
/// the `L^σ` norm of the density. Decreasing in σ; `q_σ(n, γ) = q0(n, γ)`.
pub fn q_sigma(n: usize, sigma: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("n = {n} < 2")));
    }
    if !(sigma > 1.0) {
        return Err(Error::domain("sigma must exceed 1"));
    }
    let n = n as f64;
    Ok(2.0 * n * sigma / ((sigma - 1.0) * n + 2.0 * sigma))
}

/// Sobolev-type constant `K = q(n−1) / (2(n−q))`, defined for `1 < q < n`.
pub fn sobolev_k(n: usize, q: f64) -> Result<f64> {
    let nf = n as f64;
    if !(q > 1.0) || !(q < nf) {
        return Err(Error::domain(format!(
            "Sobolev constant needs 1 < q < n, got q = {q}, n = {n}"
        )));
    }
    Ok(q * (nf - 1.0) / (2.0 * (nf - q)))
}

/// Value of `(γ−1)(n(q−1)+q)/(n−q)`; the Jensen step needs it to be `>= 1`.
pub fn condition15_value(n: usize, gamma: f64, q: f64) -> f64 {
    let n = n as f64;
    (gamma - 1.0) * (n * (q - 1.0) + q) / (n - q)
}

pub fn condition15(n: usize, gamma: f64, q: f64) -> bool {
    let n_f = n as f64;
    q < n_f && condition15_value(n, gamma, q) >= 1.0
}

/// Density exponent `qn / (n(q−1)+q)` appearing in the momentum Hölder bound.
pub fn density_exponent(n: usize, q: f64) -> f64 {
    let n = n as f64;
    q * n / (n * (q - 1.0) + q)
}

/// Sobolev target exponent `qn / (n−q)`.
pub fn velocity_exponent(n: usize, q: f64) -> f64 {
    let n = n as f64;
    q * n / (n - q)
}

/// Exponent of the internal energy in the momentum bound,
/// `(n−q) / (qn(γ−1))`.
pub fn internal_energy_exponent(n: usize, gamma: f64, q: f64) -> f64 {
    let n = n as f64;
    (n - q) / (q * n * (gamma - 1.0))
}

/// Exponent of the energy in the decay-rate bound. Raising the momentum
/// bound to the power `q` multiplies the internal-energy exponent by `q`,
/// giving `(n−q) / (n(γ−1))`.
pub fn decay_energy_exponent(n: usize, gamma: f64, q: f64) -> f64 {
    q * internal_energy_exponent(n, gamma, q)
}

/// Constant of the momentum bound
/// `|P| <= K1 · E_i^{(n−q)/(qn(γ−1))} · ‖u‖_{qn/(n−q)}`.
///
/// Combining the Hölder step with the Jensen step,
/// `(∫ρ^s)^{1/s} <= m^{1/s} ((γ−1)/(mA))^{1/(sβ)} E_i^{1/(sβ)}` with
/// `s = qn/(n(q−1)+q)` and `β = (γ−1)(n(q−1)+q)/(n−q)`, so
/// `K1 = m^{(n(q−1)+q)/(qn)} · ((γ−1)/(mA))^{(n−q)/(qn(γ−1))}`.
pub fn momentum_k1(n: usize, gamma: f64, q: f64, mass: f64, a: f64) -> Result<f64> {
    check_n_gamma(n, gamma)?;
    sobolev_k(n, q)?;
    if !(mass > 0.0) {
        return Err(Error::domain("total mass must be positive"));
    }
    if !(a > 0.0) {
        return Err(Error::domain("A must be positive"));
    }
    if !condition15(n, gamma, q) {
        return Err(Error::domain(format!(
            "condition (γ−1)(n(q−1)+q)/(n−q) >= 1 fails: value {}",
            condition15_value(n, gamma, q)
        )));
    }
    let nf = n as f64;
    let mass_exp = (nf * (q - 1.0) + q) / (q * nf);
    let e_exp = internal_energy_exponent(n, gamma, q);
    Ok(mass.powf(mass_exp) * ((gamma - 1.0) / (mass * a)).powf(e_exp))
}

/// Closed-left MHD range endpoint `6γ/(5γ−3)`.
pub fn mhd_lower(gamma: f64) -> f64 {
    6.0 * gamma / (5.0 * gamma - 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub q0: f64,
    pub q1: f64,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    pub mhd_lo: Option<f64>,
}

/// Collects the thresholds for `(n, γ)`. `K` and `K1` are filled when `q`
/// is given and lies where they are defined; `K1` uses the supplied mass
/// and pressure coefficient.
pub fn threshold_set(n: usize, gamma: f64, q: Option<f64>, mass: f64, a: f64) -> Result<ThresholdSet> {
    let q0 = q0(n, gamma)?;
    let q1 = q1(n, gamma)?;
    let k = q.and_then(|q| sobolev_k(n, q).ok());
    let k1 = q.and_then(|q| momentum_k1(n, gamma, q, mass, a).ok());
    Ok(ThresholdSet {
        q0,
        q1,
        k,
        k1,
        mhd_lo: (n == 3).then(|| mhd_lower(gamma)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    Fluid,
    #[serde(rename = "MHD")]
    Mhd,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `q ∈ [q0, n)`.
    pub in_q_range: bool,
    /// `q ∈ (q0, n)`, the fluid theorem's interval.
    pub in_open_q_range: bool,
    /// `n = 3` and `q ∈ [6γ/(5γ−3), 3)`.
    pub in_mhd_range: bool,
    pub condition15: bool,
    pub condition15_value: f64,
    pub momentum_nonzero: bool,
    pub dimension_ok: bool,
    pub theorem_applies: bool,
    pub which_theorem: Theorem,
    /// Theorem the caller asked about.
    pub requested: Theorem,
}

impl AdmissibilityReport {
    /// Names of the hypotheses that fail for the requested theorem.
    pub fn failed_hypotheses(&self) -> Vec<&'static str> {
        let mut failed = Vec::new();
        if !self.dimension_ok {
            failed.push("dimension_ok");
        }
        match self.requested {
            Theorem::Mhd => {
                if !self.in_mhd_range {
                    failed.push("in_mhd_range");
                }
            }
            _ => {
                if !self.in_q_range {
                    failed.push("in_q_range");
                } else if !self.in_open_q_range {
                    failed.push("in_open_q_range");
                }
            }
        }
        if !self.condition15 {
            failed.push("condition15");
        }
        if !self.momentum_nonzero {
            failed.push("momentum_nonzero");
        }
        failed
    }

    /// Human-readable explanation, e.g. `momentum_nonzero = false`.
    pub fn failure_reason(&self) -> Option<String> {
        let failed = self.failed_hypotheses();
        if failed.is_empty() {
            None
        } else {
            Some(
                failed
                    .iter()
                    .map(|h| format!("{h} = false"))
                    .collect::<Vec<_>>()
                    .join(", "),
            )
        }
    }
}

pub fn momentum_norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Evaluates the hypotheses of the fluid theorem (`mhd = false`) or the MHD
/// theorem (`mhd = true`).
pub fn admissibility(params: &ExponentParams, momentum: &[f64], mhd: bool) -> AdmissibilityReport {
    let n = params.n;
    let nf = n as f64;
    let q = params.q;
    let gamma = params.gamma;
    let dimension_ok = if mhd { n == 3 } else { n >= 2 };
    let (in_q_range, in_open_q_range) = match q0(n, gamma) {
        Ok(q0) => (q >= q0 && q < nf, q > q0 && q < nf),
        Err(_) => (false, false),
    };
    let in_mhd_range = n == 3 && gamma > 1.0 && q >= mhd_lower(gamma) && q < 3.0;
    let cond_value = condition15_value(n, gamma, q);
    let cond = condition15(n, gamma, q);
    let momentum_nonzero = momentum_norm(momentum) > 0.0;
    let requested = if mhd { Theorem::Mhd } else { Theorem::Fluid };
    let range_ok = if mhd { in_mhd_range } else { in_open_q_range };
    let theorem_applies = dimension_ok && range_ok && in_q_range && cond && momentum_nonzero;
    AdmissibilityReport {
        in_q_range,
        in_open_q_range,
        in_mhd_range,
        condition15: cond,
        condition15_value: cond_value,
        momentum_nonzero,
        dimension_ok,
        theorem_applies,
        which_theorem: if theorem_applies { requested } else { Theorem::None },
        requested,
    }
}

/// Constants of the energy-decay certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateConstants {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    /// Guaranteed decay rate: `ℰ'(t) <= −C`.
    #[serde(rename = "C")]
    pub c: f64,
    /// `ℰ(0)/C`, the time by which the bound forces negative energy.
    pub t_star: f64,
}

/// `C = ν|P|^q / (K1^q K) · ℰ(0)^{−(n−q)/(n(γ−1))}` and `T* = ℰ(0)/C`.
pub fn certificate_constants(
    params: &ExponentParams,
    mass: f64,
    momentum: &[f64],
    e0: f64,
    mhd: bool,
) -> Result<CertificateConstants> {
    let report = admissibility(params, momentum, mhd);
    if let Some(reason) = report.failure_reason() {
        return Err(Error::domain(format!("hypotheses fail: {reason}")));
    }
    if !(e0 > 0.0) {
        return Err(Error::domain("initial energy must be positive"));
    }
    let (n, gamma, q) = (params.n, params.gamma, params.q);
    let k = sobolev_k(n, q)?;
    let k1 = momentum_k1(n, gamma, q, mass, params.a)?;
    let p = momentum_norm(momentum);
    let c = params.nu * p.powf(q) / (k1.powf(q) * k) * e0.powf(-decay_energy_exponent(n, gamma, q));
    Ok(CertificateConstants {
        k,
        k1,
        c,
        t_star: e0 / c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, gamma: f64, q: f64) -> ExponentParams {
        ExponentParams {
            n,
            gamma,
            a: 1.0,
            nu: 1.0,
            q,
            eta: 0.0,
        }
    }

    #[test]
    fn q0_examples() {
        assert!((q0(3, 1.4).unwrap() - 2.1).abs() < 1e-14);
        assert!((q0(3, 1.4).unwrap() - mhd_lower(1.4)).abs() < 1e-14);
        assert!((q0(2, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        assert!((q0(3, 1e6).unwrap() - 1.2).abs() < 1e-5);
        assert!(q0(1, 1.4).is_err());
        assert!(q0(3, 1.0).is_err());
    }

    #[test]
    fn q1_examples() {
        assert!((q1(3, 1.4).unwrap() - 4.2 / 2.6).abs() < 1e-14);
        assert!((q1(2, 2.0).unwrap() - 1.0).abs() < 1e-15);
        for n in 2..=10 {
            for i in 1..=90 {
                let gamma = 1.0 + 0.1 * i as f64;
                assert!(q1(n, gamma).unwrap() < q0(n, gamma).unwrap());
            }
        }
    }

    #[test]
    fn q_sigma_examples() {
        assert_eq!(q_sigma(3, 1.4).unwrap(), q0(3, 1.4).unwrap());
        assert!((q_sigma(3, 2.0).unwrap() - 12.0 / 7.0).abs() < 1e-14);
        assert!(q_sigma(3, 1.5).unwrap() > q_sigma(3, 2.5).unwrap());
        assert!(q_sigma(3, 1.0).is_err());
    }

    #[test]
    fn sobolev_constant() {
        assert!((sobolev_k(3, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((sobolev_k(2, 1.5).unwrap() - 1.5).abs() < 1e-15);
        assert!(sobolev_k(3, 2.999).unwrap() > 1e3);
        assert!(sobolev_k(3, 3.0).is_err());
        assert!(sobolev_k(3, 1.0).is_err());
    }

    #[test]
    fn k1_normalizing_case_and_exponent() {
        let k1 = momentum_k1(3, 2.0, 2.0, 1.0, 1.0).unwrap();
        assert!((k1 - 1.0).abs() < 1e-15);
        let e = internal_energy_exponent(3, 1.4, 2.2);
        assert!((e - 0.8 / (6.6 * 0.4)).abs() < 1e-14);
        assert!((e - 0.303_030_303_030_303).abs() < 1e-12);
    }

    #[test]
    fn k1_rejects_condition15_failure() {
        // n = 3, γ = 1.05, q = 1.2: value 0.05·2.4/1.8 < 1.
        assert!(!condition15(3, 1.05, 1.2));
        assert!(momentum_k1(3, 1.05, 1.2, 1.0, 1.0).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let p = params(3, 1.4, 2.5);
        let r = admissibility(&p, &[1.0, 0.0, 0.0], false);
        assert!(r.theorem_applies);
        assert_eq!(r.which_theorem, Theorem::Fluid);
        // 0.4 · (3·1.5 + 2.5) / 0.5
        assert!((r.condition15_value - 5.6).abs() < 1e-12);

        let r = admissibility(&p, &[0.0, 0.0, 0.0], false);
        assert!(!r.theorem_applies);
        assert_eq!(r.failure_reason().unwrap(), "momentum_nonzero = false");

        let r = admissibility(&params(3, 1.4, 1.5), &[1.0, 0.0, 0.0], false);
        assert!(!r.in_q_range);
        // 0.4 · 3 / 1.5 = 0.8 < 1 as well.
        assert_eq!(r.failed_hypotheses(), vec!["in_q_range", "condition15"]);
    }

    #[test]
    fn endpoint_q0_fluid_vs_mhd() {
        let q = q0(3, 1.4).unwrap();
        let p = params(3, 1.4, q);
        let fluid = admissibility(&p, &[1.0, 0.0, 0.0], false);
        assert!(fluid.in_q_range && !fluid.in_open_q_range && !fluid.theorem_applies);
        assert_eq!(fluid.failed_hypotheses(), vec!["in_open_q_range"]);
        let mhd = admissibility(&p, &[1.0, 0.0, 0.0], true);
        assert!(mhd.theorem_applies);
        assert_eq!(mhd.which_theorem, Theorem::Mhd);
    }

    #[test]
    fn certificate_normalizing_case() {
        let p = ExponentParams {
            n: 3,
            gamma: 2.0,
            a: 1.0,
            nu: 1.0,
            q: 2.0,
            eta: 0.0,
        };
        let c = certificate_constants(&p, 1.0, &[0.3, 0.4, 0.0], 1.0, false).unwrap();
        assert!((c.c - 0.25 / 2.0).abs() < 1e-15);
        assert_eq!(c.t_star, 1.0 / c.c);
        assert!(certificate_constants(&p, 1.0, &[0.0; 3], 1.0, false).is_err());
    }

    #[test]
    fn certificate_homogeneity() {
        let p = params(3, 1.4, 2.5);
        let base = certificate_constants(&p, 2.0, &[0.5, 0.1, 0.0], 3.0, false).unwrap();
        let doubled = certificate_constants(&p, 2.0, &[1.0, 0.2, 0.0], 3.0, false).unwrap();
        let ratio = doubled.c / base.c;
        assert!((ratio / 2f64.powf(2.5) - 1.0).abs() < 1e-12);
        assert!((base.t_star / doubled.t_star / 2f64.powf(2.5) - 1.0).abs() < 1e-12);
        let e2 = certificate_constants(&p, 2.0, &[0.5, 0.1, 0.0], 6.0, false).unwrap();
        let expected = 2f64.powf(-decay_energy_exponent(3, 1.4, 2.5));
        assert!((e2.c / base.c / expected - 1.0).abs() < 1e-12);
    }
}
