//! Energy-decay certificate and run monitor.
//!
//! The certificate evaluates the hypotheses on the initial state and, when
//! they hold, the guaranteed decay rate `C` and the lifespan bound
//! `T* = ℰ(0)/C`. The monitor replays a recorded time series against every
//! inequality the argument relies on.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::fields::{functionals, integrate, FluidState};
use crate::inequality::{dissipation_bound_lhs, InequalityName, InequalityReport};
use crate::solver::{initial_data, RunStatus, TimeSeries};
use crate::thresholds::{
    admissibility, certificate_constants, momentum_norm, AdmissibilityReport, ExponentParams, Theorem,
};
use crate::tolerances::Tolerances;

/// Version of the certificate and report JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub schema_version: u32,
    /// Content hash of the config the certificate was computed for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    pub params: ExponentParams,
    pub m: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "E0")]
    pub e0: f64,
    /// Internal energy at `t = 0`.
    #[serde(rename = "E_i0")]
    pub e_i0: f64,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    #[serde(rename = "K1")]
    pub k1: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "T_star")]
    pub t_star: Option<f64>,
    pub theorem: Theorem,
    pub hypotheses: AdmissibilityReport,
    /// False when the stress model is not known to satisfy the coercivity
    /// bound with the configured `(ν, q)`.
    pub coercivity_ok: bool,
    /// Which hypotheses fail, e.g. `momentum_nonzero = false`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// `support_margin · L` of the run, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_limit: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl BlowupCertificate {
    pub fn is_issued(&self) -> bool {
        self.c.is_some()
    }
}

/// Momentum below this fraction of `∫ρ|u|` counts as zero: symmetric data
/// cancel only up to summation roundoff.
pub const MOMENTUM_ZERO_REL: f64 = 1e-12;

fn momentum_scale(state: &FluidState) -> f64 {
    let speed = state.u.magnitude();
    let flux: Vec<f64> = speed.values.iter().zip(&state.rho.values).map(|(s, r)| s * r).collect();
    integrate(&state.rho.grid, &flux)
}

/// Certificate for `state0`. Never fails: a failed hypothesis is recorded
/// in the certificate together with its name.
pub fn certify(params: &ExponentParams, state0: &FluidState, is_mhd: bool) -> Result<BlowupCertificate> {
    let e = functionals(state0, params)?;
    let effective_p = if momentum_norm(&e.p) <= MOMENTUM_ZERO_REL * momentum_scale(state0) {
        vec![0.0; e.p.len()]
    } else {
        e.p.clone()
    };
    let hypotheses = admissibility(params, &effective_p, is_mhd);
    let mut cert = BlowupCertificate {
        schema_version: SCHEMA_VERSION,
        config_hash: None,
        params: *params,
        m: e.m,
        p: e.p.clone(),
        e0: e.total,
        e_i0: e.e_i,
        k: None,
        k1: None,
        c: None,
        t_star: None,
        theorem: Theorem::None,
        reason: hypotheses.failure_reason(),
        hypotheses,
        coercivity_ok: true,
        support_limit: None,
        tolerances: Tolerances::default(),
    };
    if cert.hypotheses.theorem_applies {
        let c = certificate_constants(params, e.m, &e.p, e.total, is_mhd)?;
        cert.k = Some(c.k);
        cert.k1 = Some(c.k1);
        cert.c = Some(c.c);
        cert.t_star = Some(c.t_star);
        cert.theorem = cert.hypotheses.which_theorem;
    } else {
        cert.k = crate::thresholds::sobolev_k(params.n, params.q).ok();
        cert.k1 = crate::thresholds::momentum_k1(params.n, params.gamma, params.q, e.m, params.a).ok();
    }
    Ok(cert)
}

/// Certificate for the initial data of `config`, carrying its hash,
/// support limit and tolerances.
pub fn certify_config(config: &SimConfig) -> Result<BlowupCertificate> {
    let (state0, _) = initial_data(config)?;
    let params = config.exponent_params();
    let mut cert = certify(&params, &state0, config.is_mhd())?;
    cert.config_hash = Some(config.content_hash());
    cert.support_limit = Some(config.support_limit()).filter(|l| l.is_finite());
    cert.tolerances = config.tolerances;
    if config.constitutive().coercivity().is_none() {
        cert.coercivity_ok = false;
        cert.c = None;
        cert.t_star = None;
        cert.theorem = Theorem::None;
        let reason = match cert.reason.take() {
            Some(r) => format!("{r}, coercivity_ok = false"),
            None => "coercivity_ok = false".to_string(),
        };
        cert.reason = Some(reason);
    }
    Ok(cert)
}

/// Checks between records `k` and `k + 1`, and on record `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorStep {
    pub index: usize,
    pub t: f64,
    pub energy_monotone: bool,
    /// `(ℰ_{k+1} − ℰ_k)/Δt` minus the allowed bound; `<= 0` passes.
    pub eq12_residual: f64,
    pub residual_ok: bool,
    pub mass_drift: f64,
    pub momentum_drift: f64,
    pub conservation_ok: bool,
    pub support_ok: bool,
    /// `h‖div H‖/‖H‖` within tolerance (always true without `H`).
    pub div_h_ok: bool,
    /// `ν·D_q` against `C_inst = ν·(1/K)(|P|/(K1 E_i^a))^q`, when defined.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dissipation_bound: Option<InequalityReport>,
    /// `ν·D_q / C_inst`; infinite when `C_inst = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_ok: Option<bool>,
    /// `ℰ(t) − (ℰ(0) − C t)` in units of `ℰ(0)`, when a certificate exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_excess: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_ok: Option<bool>,
}

impl MonitorStep {
    /// All checks of this step that apply while the support is inside.
    pub fn passed(&self) -> bool {
        self.energy_monotone
            && self.residual_ok
            && self.conservation_ok
            && self.div_h_ok
            && self.chain_ok.unwrap_or(true)
            && self.line_ok.unwrap_or(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Aggregate of the per-step checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub steps_checked: usize,
    /// Steps taken while the support stayed inside the margin.
    pub steps_in_support: usize,
    pub residual_pass_fraction: f64,
    pub max_residual: f64,
    pub max_energy_increase: f64,
    pub max_mass_drift: f64,
    pub max_momentum_drift: f64,
    pub max_div_h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_chain_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_line_excess: Option<f64>,
    pub clamps: usize,
    /// First failing index per check name.
    pub first_failures: Vec<(String, usize)>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub schema_version: u32,
    pub steps: Vec<MonitorStep>,
    pub summary: MonitorSummary,
    pub notes: Vec<String>,
}

/// Replays `series` against the energy, conservation, dissipation-chain and
/// certified-line checks.
pub fn monitor(series: &TimeSeries, cert: &BlowupCertificate, params: &ExponentParams) -> Result<MonitorReport> {
    if series.is_empty() {
        return Err(Error::domain("time series is empty"));
    }
    if series.breakdowns.len() != series.len() || series.diagnostics.len() != series.len() {
        return Err(Error::Mismatch("time series columns have different lengths".into()));
    }
    if params != &cert.params {
        return Err(Error::Mismatch("parameters differ from the certificate".into()));
    }
    let tol = &cert.tolerances;
    let first = &series.breakdowns[0];
    let e0 = first.total;
    let m0 = first.m;
    let p0 = &first.p;
    let momentum_scale = momentum_norm(p0).max((2.0 * m0 * e0.max(0.0)).sqrt());
    let limit = cert.support_limit.unwrap_or(f64::INFINITY);
    let chain_defined = cert.hypotheses.dimension_ok && cert.hypotheses.in_q_range && cert.hypotheses.condition15;
    let nu = params.nu;

    let mut steps = Vec::with_capacity(series.len().saturating_sub(1));
    for k in 0..series.len() - 1 {
        let (a, b) = (&series.breakdowns[k], &series.breakdowns[k + 1]);
        let (ta, tb) = (series.times[k], series.times[k + 1]);
        let dt = tb - ta;
        if !(dt > 0.0) {
            return Err(Error::Mismatch(format!("times not increasing at record {}", k + 1)));
        }
        let diag_a = &series.diagnostics[k];
        let diag_b = &series.diagnostics[k + 1];
        let energy_monotone = b.total <= a.total + tol.energy_monotone * e0;
        let rate = (b.total - a.total) / dt;
        let bound = -(1.0 - tol.energy_rate_rel) * (nu * a.d_q + params.eta * diag_a.curl_h2) + tol.energy_rate_abs * e0;
        let eq12_residual = rate - bound;
        let mass_drift = ((b.m - m0) / m0).abs();
        let momentum_drift = if momentum_scale > 0.0 {
            momentum_norm(&b.p.iter().zip(p0).map(|(x, y)| x - y).collect::<Vec<_>>()) / momentum_scale
        } else {
            0.0
        };
        let support_ok = diag_b.support_radius <= limit && diag_a.support_radius <= limit;
        let div_h_ok = diag_b.div_h_rel <= crate::fields::DIV_H_TOL;

        let (dissipation_bound, chain_ratio, chain_ok) = if chain_defined && support_ok && b.e_i > 0.0 {
            let lhs = dissipation_bound_lhs(params, b.m, b.momentum_norm(), b.e_i)?;
            let c_inst = nu * lhs;
            let measured = nu * b.d_q;
            let report = InequalityReport::new(
                InequalityName::DissipationBound,
                c_inst,
                measured,
                tol.composite,
                &[("t", tb), ("E_i", b.e_i), ("P", b.momentum_norm())],
            );
            let ratio = if c_inst > 0.0 { measured / c_inst } else { f64::INFINITY };
            (Some(report), Some(ratio), Some(ratio >= tol.chain_ratio))
        } else {
            (None, None, None)
        };
        let (line_excess, line_ok) = match cert.c {
            Some(c) if support_ok => {
                let excess = (b.total - (e0 - c * tb)) / e0;
                (Some(excess), Some(excess <= tol.certified_line))
            }
            _ => (None, None),
        };
        steps.push(MonitorStep {
            index: k + 1,
            t: tb,
            energy_monotone,
            eq12_residual,
            residual_ok: eq12_residual <= 0.0,
            mass_drift,
            momentum_drift,
            conservation_ok: mass_drift <= tol.conservation && momentum_drift <= tol.conservation,
            support_ok,
            div_h_ok,
            dissipation_bound,
            chain_ratio,
            chain_ok,
            line_excess,
            line_ok,
        });
    }

    let inside: Vec<&MonitorStep> = steps.iter().filter(|s| s.support_ok).collect();
    let fold_max = |f: &dyn Fn(&MonitorStep) -> f64| steps.iter().map(f).fold(0.0f64, f64::max);
    let residual_pass_fraction = if inside.is_empty() {
        1.0
    } else {
        inside.iter().filter(|s| s.residual_ok).count() as f64 / inside.len() as f64
    };
    let mut first_failures = Vec::new();
    let checks: [Check; 6] = [
        ("energy_monotone", &|s| s.energy_monotone),
        ("eq12_residual", &|s| s.residual_ok),
        ("conservation", &|s| s.conservation_ok),
        ("div_h", &|s| s.div_h_ok),
        ("dissipation_chain", &|s| s.chain_ok.unwrap_or(true)),
        ("certified_line", &|s| s.line_ok.unwrap_or(true)),
    ];
    for (name, check) in checks {
        if let Some(s) = inside.iter().find(|s| !check(s)) {
            first_failures.push((name.to_string(), s.index));
        }
    }
    let clamps = series.diagnostics.last().map(|d| d.clamps).unwrap_or(0);
    let summary = MonitorSummary {
        steps_checked: steps.len(),
        steps_in_support: inside.len(),
        residual_pass_fraction,
        max_residual: steps.iter().map(|s| s.eq12_residual).fold(f64::NEG_INFINITY, f64::max),
        max_energy_increase: series
            .breakdowns
            .windows(2)
            .map(|w| (w[1].total - w[0].total) / e0)
            .fold(f64::NEG_INFINITY, f64::max),
        max_mass_drift: fold_max(&|s| s.mass_drift),
        max_momentum_drift: fold_max(&|s| s.momentum_drift),
        max_div_h: series.diagnostics.iter().map(|d| d.div_h_rel).fold(0.0, f64::max),
        min_chain_ratio: inside.iter().filter_map(|s| s.chain_ratio).reduce(f64::min),
        max_line_excess: inside.iter().filter_map(|s| s.line_excess).reduce(f64::max),
        clamps,
        verdict: if first_failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        first_failures,
    };
    let mut notes = Vec::new();
    if clamps > 0 {
        notes.push(format!("{clamps} density floor clamps fired: conservation not guaranteed"));
    }
    if inside.len() < steps.len() {
        notes.push(format!(
            "{} of {} steps left the support margin and were not judged",
            steps.len() - inside.len(),
            steps.len()
        ));
    }
    if !chain_defined {
        notes.push("dissipation chain inactive: parameters outside its range".into());
    } else if momentum_norm(p0) == 0.0 {
        notes.push("dissipation chain inactive: zero momentum gives a zero bound".into());
    }
    Ok(MonitorReport {
        schema_version: SCHEMA_VERSION,
        steps,
        summary,
        notes,
    })
}

type Check<'a> = (&'a str, &'a dyn Fn(&MonitorStep) -> bool);

/// Outcome of a certified run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disposition {
    CertifiedConsistent,
    HypothesisFailed,
    DomainExhausted,
    NumericalBreakdown,
    /// A monitored inequality failed while the support stayed inside.
    Inconsistent,
}

impl Disposition {
    pub fn exit_code(self) -> i32 {
        match self {
            Disposition::CertifiedConsistent => 0,
            Disposition::HypothesisFailed => 2,
            Disposition::NumericalBreakdown => 3,
            Disposition::DomainExhausted => 4,
            Disposition::Inconsistent => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Disposition::CertifiedConsistent => "certified-consistent",
            Disposition::HypothesisFailed => "hypothesis-failed",
            Disposition::DomainExhausted => "domain-exhausted",
            Disposition::NumericalBreakdown => "numerical-breakdown",
            Disposition::Inconsistent => "inconsistent",
        }
    }
}

/// Hypotheses first, then how the run ended, then the monitor verdict.
pub fn disposition(cert: &BlowupCertificate, monitor: Option<&MonitorReport>, status: Option<&RunStatus>) -> Disposition {
    if !cert.is_issued() {
        return Disposition::HypothesisFailed;
    }
    match status {
        Some(RunStatus::NumericalBreakdown { .. }) => return Disposition::NumericalBreakdown,
        Some(RunStatus::DomainExhausted { .. }) => return Disposition::DomainExhausted,
        _ => {}
    }
    match monitor {
        Some(m) if m.summary.verdict == Verdict::Fail => Disposition::Inconsistent,
        _ => Disposition::CertifiedConsistent,
    }
}

/// Full report as written by [`write_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub disposition: Disposition,
    pub exit_code: i32,
    pub certificate: BlowupCertificate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_status: Option<RunStatus>,
    pub notes: Vec<String>,
}

pub fn build_report(cert: &BlowupCertificate, monitor: Option<&MonitorReport>, status: Option<&RunStatus>) -> Report {
    let disposition = disposition(cert, monitor, status);
    let mut notes: Vec<String> = monitor.map(|m| m.notes.clone()).unwrap_or_default();
    if let Some(reason) = &cert.reason {
        notes.push(format!("failed hypotheses: {reason}"));
    }
    if let Some(s) = status {
        notes.push(s.describe());
        if let (RunStatus::NumericalBreakdown { t }, Some(t_star)) = (s, cert.t_star) {
            if *t < t_star {
                notes.push(format!("breakdown at t = {t} preceded T* = {t_star}"));
            } else {
                notes.push(format!("breakdown at t = {t} came after T* = {t_star}"));
            }
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        disposition,
        exit_code: disposition.exit_code(),
        certificate: cert.clone(),
        monitor: monitor.map(|m| m.summary.clone()),
        run_status: status.copied(),
        notes,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into())
}

/// Plain-text summary of a report.
pub fn summary_text(report: &Report) -> String {
    let c = &report.certificate;
    let h = &c.hypotheses;
    let mut s = String::new();
    let _ = writeln!(s, "disposition: {} (exit {})", report.disposition.as_str(), report.exit_code);
    let _ = writeln!(
        s,
        "parameters: n = {}, gamma = {}, A = {}, nu = {}, q = {}, eta = {}",
        c.params.n, c.params.gamma, c.params.a, c.params.nu, c.params.q, c.params.eta
    );
    let _ = writeln!(s, "hypotheses ({:?} requested):", h.requested);
    for (name, ok) in [
        ("dimension_ok", h.dimension_ok),
        ("in_q_range", h.in_q_range),
        ("in_open_q_range", h.in_open_q_range),
        ("in_mhd_range", h.in_mhd_range),
        ("condition15", h.condition15),
        ("momentum_nonzero", h.momentum_nonzero),
        ("coercivity_ok", c.coercivity_ok),
    ] {
        let _ = writeln!(s, "  {name:<18} {ok}");
    }
    let _ = writeln!(s, "  condition15 value  {:.6}", h.condition15_value);
    let _ = writeln!(s, "m = {:.6e}, |P| = {:.6e}, E0 = {:.6e}", c.m, momentum_norm(&c.p), c.e0);
    let _ = writeln!(s, "K = {}, K1 = {}, C = {}, T* = {}", opt(c.k), opt(c.k1), opt(c.c), opt(c.t_star));
    if let Some(m) = &report.monitor {
        let _ = writeln!(s, "monitor: {:?} over {} steps ({} inside support)", m.verdict, m.steps_checked, m.steps_in_support);
        let _ = writeln!(s, "  energy-rate residual: max {:.3e}, pass fraction {:.4}", m.max_residual, m.residual_pass_fraction);
        let _ = writeln!(s, "  max energy increase / E0: {:.3e}", m.max_energy_increase);
        let _ = writeln!(s, "  drift: mass {:.3e}, momentum {:.3e}", m.max_mass_drift, m.max_momentum_drift);
        let _ = writeln!(s, "  min nu*D_q / C_inst: {}", opt(m.min_chain_ratio));
        let _ = writeln!(s, "  max excess over certified line / E0: {}", opt(m.max_line_excess));
        let _ = writeln!(s, "  max relative div H: {:.3e}", m.max_div_h);
        for (name, idx) in &m.first_failures {
            let _ = writeln!(s, "  first failure of {name} at record {idx}");
        }
    }
    for note in &report.notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}

/// Writes the report as JSON to `path` and the plain-text summary next to
/// it with extension `txt`.
pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))?;
    let txt = path.with_extension("txt");
    std::fs::write(&txt, summary_text(report)).map_err(|e| Error::io(&txt, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{EnergyBreakdown, Grid, ScalarField, VectorField};
    use crate::solver::Diagnostics;

    fn params() -> ExponentParams {
        ExponentParams {
            n: 3,
            gamma: 1.4,
            a: 1.0,
            nu: 1.0,
            q: 2.5,
            eta: 0.0,
        }
    }

    fn drift_state(u0: f64) -> FluidState {
        let grid = Grid::cubic(3, 16, 4.0).unwrap();
        let rho = crate::fields::sample(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()).unwrap();
        let u = crate::fields::sample_vector(grid, 3, |x| {
            [u0 * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp(), 0.0, 0.0]
        })
        .unwrap();
        FluidState {
            rho,
            u,
            h: None,
            time: 0.0,
        }
    }

    #[test]
    fn certificate_for_drifting_bump() {
        let cert = certify(&params(), &drift_state(0.5), false).unwrap();
        assert!(cert.is_issued());
        assert_eq!(cert.theorem, Theorem::Fluid);
        assert_eq!(cert.t_star.unwrap(), cert.e0 / cert.c.unwrap());
        assert!(cert.reason.is_none());
    }

    #[test]
    fn zero_momentum_names_the_hypothesis() {
        let cert = certify(&params(), &drift_state(0.0), false).unwrap();
        assert!(!cert.is_issued());
        assert_eq!(cert.reason.as_deref(), Some("momentum_nonzero = false"));
        assert_eq!(disposition(&cert, None, None), Disposition::HypothesisFailed);
    }

    #[test]
    fn certificate_uses_initial_energy_not_internal() {
        // C <= ν·lhs(0) because the proof replaces E_i(0) by the larger ℰ(0).
        let p = params();
        let cert = certify(&p, &drift_state(0.5), false).unwrap();
        let lhs = dissipation_bound_lhs(&p, cert.m, momentum_norm(&cert.p), cert.e_i0).unwrap();
        assert!(cert.e_i0 <= cert.e0);
        assert!(cert.c.unwrap() <= p.nu * lhs);
    }

    #[test]
    fn mhd_certificate_matches_fluid_with_magnetic_energy() {
        let p = params();
        let mut state = drift_state(0.5);
        let grid = state.grid();
        let a = crate::fields::sample_vector(grid, 3, |x| {
            [0.0, 0.0, 0.4 * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()]
        })
        .unwrap();
        state.h = Some(crate::fields::curl(&a).unwrap());
        let mhd = certify(&p, &state, true).unwrap();
        let fluid = certify(&p, &drift_state(0.5), false).unwrap();
        let e_m = functionals(&state, &p).unwrap().e_m;
        assert!((mhd.e0 - (fluid.e0 + e_m)).abs() < 1e-12 * mhd.e0);
        let manual = certificate_constants(&p, fluid.m, &fluid.p, fluid.e0 + e_m, false).unwrap();
        assert!((mhd.c.unwrap() / manual.c - 1.0).abs() < 1e-12);
        assert_eq!(mhd.k, fluid.k);
        assert_eq!(mhd.k1, fluid.k1);
        assert_eq!(mhd.theorem, Theorem::Mhd);
    }

    fn steady_series(len: usize) -> TimeSeries {
        let e = EnergyBreakdown {
            m: 2.0,
            p: vec![0.0; 3],
            e_k: 0.0,
            e_i: 5.0,
            e_m: 0.0,
            total: 5.0,
            d_q: 0.0,
        };
        let d = Diagnostics {
            support_radius: 1.0,
            clamps: 0,
            curl_h2: 0.0,
            div_h_rel: 0.0,
        };
        TimeSeries {
            times: (0..len).map(|k| 0.1 * k as f64).collect(),
            breakdowns: vec![e; len],
            diagnostics: vec![d; len],
            violations: Vec::new(),
        }
    }

    #[test]
    fn steady_series_passes_with_inactive_chain() {
        let grid = Grid::cubic(3, 8, 1.0).unwrap();
        let state = FluidState {
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid, 3),
            h: None,
            time: 0.0,
        };
        let cert = certify(&params(), &state, false).unwrap();
        let report = monitor(&steady_series(5), &cert, &params()).unwrap();
        assert_eq!(report.summary.verdict, Verdict::Pass);
        assert_eq!(report.summary.residual_pass_fraction, 1.0);
        assert!(report.steps.iter().all(|s| s.chain_ratio == Some(f64::INFINITY)));
        assert!(report.notes.iter().any(|n| n.contains("zero momentum")));
    }

    #[test]
    fn injected_energy_increase_is_flagged() {
        let grid = Grid::cubic(3, 8, 1.0).unwrap();
        let state = FluidState {
            rho: ScalarField::constant(grid, 1.0),
            u: VectorField::zeros(grid, 3),
            h: None,
            time: 0.0,
        };
        let cert = certify(&params(), &state, false).unwrap();
        let mut series = steady_series(6);
        for b in &mut series.breakdowns[3..] {
            b.total += 1e-6;
        }
        let report = monitor(&series, &cert, &params()).unwrap();
        assert_eq!(report.summary.verdict, Verdict::Fail);
        assert!(!report.steps[2].energy_monotone);
        assert!(report.steps.iter().enumerate().all(|(k, s)| s.energy_monotone == (k != 2)));
        assert!(report.summary.first_failures.contains(&("energy_monotone".to_string(), 3)));
    }

    #[test]
    fn dispositions_follow_priority() {
        let cert = certify(&params(), &drift_state(0.5), false).unwrap();
        let breakdown = RunStatus::NumericalBreakdown { t: 0.1 };
        let exhausted = RunStatus::DomainExhausted { t: 0.2 };
        assert_eq!(disposition(&cert, None, Some(&breakdown)), Disposition::NumericalBreakdown);
        assert_eq!(disposition(&cert, None, Some(&exhausted)), Disposition::DomainExhausted);
        assert_eq!(
            disposition(&cert, None, Some(&RunStatus::Completed { t: 1.0 })),
            Disposition::CertifiedConsistent
        );
        let report = build_report(&cert, None, Some(&breakdown));
        assert!(report.notes.iter().any(|n| n.contains("preceded T*")));
        assert_eq!(report.exit_code, 3);
    }
}
