//! Time stepping: explicit midpoint RK2 with a density floor, divergence
//! cleaning of `H` and run-level stopping rules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::initial::initial_data;
use super::projection::Projector;
use super::rhs::{evaluate, Terms};
use crate::config::SimConfig;
use crate::constitutive::ConstitutiveModel;
use crate::error::{Error, Result};
use crate::fields::{
    curl, functionals, integrate, relative_divergence, shear_rate, speed_squared, support_radius, EnergyBreakdown,
    FluidState, Grid, ScalarField, VectorField,
};
use crate::thresholds::ExponentParams;

/// Everything [`step`] needs besides the state.
#[derive(Debug, Clone)]
pub struct StepSetup {
    pub model: ConstitutiveModel,
    pub terms: Terms,
    /// Absolute density floor applied after each stage.
    pub floor: f64,
}

/// Largest stable step for `state`, scaled by `cfl`.
///
/// Minimum over cells of `h/(|u| + c_s)`, `h²ρ/(2nμ_eff)`, `h²/(2nη)` when
/// `H` is present and `ρh⁴/(8n²σ)` for the hyperdiffusion filter.
pub fn stable_dt(state: &FluidState, model: &ConstitutiveModel, terms: &Terms, floor: f64, cfl: f64) -> Result<f64> {
    let grid = state.grid();
    let n = grid.n();
    let nf = n as f64;
    let h = grid.min_spacing();
    let law = model.pressure;
    let d = shear_rate(&state.u)?;
    let speed2 = speed_squared(&state.u);
    let moving = !terms.frozen_velocity;
    let limit = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let rho = state.rho.values[i].max(floor);
            let mut dt = f64::INFINITY;
            if moving {
                let signal = speed2[i].sqrt() + law.sound_speed(rho);
                if signal > 0.0 {
                    dt = dt.min(h / signal);
                }
                let trace: f64 = (0..n).map(|k| d.get(k, k)[i]).sum();
                let norm = d.comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
                let mu = model.effective_viscosity(rho, trace, norm);
                if mu > 0.0 {
                    dt = dt.min(h * h * rho / (2.0 * nf * mu));
                }
                if terms.hyperdiffusion > 0.0 {
                    dt = dt.min(rho * h.powi(4) / (8.0 * nf * nf * terms.hyperdiffusion));
                }
            }
            dt
        })
        .reduce(|| f64::INFINITY, f64::min);
    let mut dt = limit;
    if state.h.is_some() && terms.eta > 0.0 {
        dt = dt.min(h * h / (2.0 * nf * terms.eta));
    }
    if !dt.is_finite() {
        // Nothing moves: fall back on the sound speed at the floor density.
        let c = law.sound_speed(floor.max(state.rho.max()));
        if c > 0.0 {
            dt = h / c;
        } else {
            return Err(Error::NonFinite("no finite time-step limit: the state is static and pressureless".into()));
        }
    }
    Ok(cfl * dt)
}

/// Conserved variables `(ρ, ρu, H)`.
#[derive(Debug, Clone)]
struct Conserved {
    rho: Vec<f64>,
    mom: Vec<Vec<f64>>,
    h: Option<Vec<Vec<f64>>>,
}

impl Conserved {
    fn from_state(state: &FluidState) -> Self {
        Conserved {
            rho: state.rho.values.clone(),
            mom: state.momentum_density().comps,
            h: state.h.as_ref().map(|h| h.comps.clone()),
        }
    }

    fn to_state(&self, grid: Grid, time: f64) -> FluidState {
        let u = self
            .mom
            .iter()
            .map(|m| m.par_iter().zip(&self.rho).map(|(m, r)| m / r).collect())
            .collect();
        FluidState {
            rho: ScalarField {
                grid,
                values: self.rho.clone(),
            },
            u: VectorField { grid, comps: u },
            h: self.h.as_ref().map(|h| VectorField { grid, comps: h.clone() }),
            time,
        }
    }

    /// `self + dt·rhs`, then the floor. Returns the number of clamped cells.
    fn advance(&self, rhs: &super::rhs::Rhs, dt: f64, floor: f64, frozen: bool) -> (Conserved, usize) {
        let axpy = |a: &[f64], b: &[f64]| -> Vec<f64> { a.par_iter().zip(b).map(|(x, y)| x + dt * y).collect() };
        let (mut rho, mom) = if frozen {
            (self.rho.clone(), self.mom.clone())
        } else {
            (
                axpy(&self.rho, &rhs.drho),
                self.mom.iter().zip(&rhs.dmom).map(|(m, d)| axpy(m, d)).collect(),
            )
        };
        let h = match (&self.h, &rhs.dh) {
            (Some(h), Some(dh)) => Some(h.iter().zip(dh).map(|(a, b)| axpy(a, b)).collect()),
            (h, _) => h.clone(),
        };
        let clamps = rho
            .par_iter_mut()
            .map(|r| {
                // NaN also fails the comparison and is left for the caller to detect.
                if *r < floor {
                    *r = floor;
                    1
                } else {
                    0
                }
            })
            .sum();
        (Conserved { rho, mom, h }, clamps)
    }

    fn is_finite(&self) -> bool {
        self.rho.par_iter().all(|v| v.is_finite())
            && self.mom.iter().all(|c| c.par_iter().all(|v| v.is_finite()))
            && self.h.iter().flatten().all(|c| c.par_iter().all(|v| v.is_finite()))
    }
}

/// One midpoint RK2 step of size `dt`, without divergence cleaning.
/// Returns the new state and the number of floor clamps.
pub fn step(state: &FluidState, setup: &StepSetup, dt: f64) -> Result<(FluidState, usize)> {
    let grid = state.grid();
    let frozen = setup.terms.frozen_velocity;
    let u0 = Conserved::from_state(state);
    let r0 = evaluate(state, &setup.model, &setup.terms)?;
    let (mid, c1) = u0.advance(&r0, 0.5 * dt, setup.floor, frozen);
    let mut mid_state = mid.to_state(grid, state.time + 0.5 * dt);
    if frozen {
        mid_state.u = state.u.clone();
    }
    let r1 = evaluate(&mid_state, &setup.model, &setup.terms)?;
    let (next, c2) = u0.advance(&r1, dt, setup.floor, frozen);
    let mut out = next.to_state(grid, state.time + dt);
    if frozen {
        out.u = state.u.clone();
    }
    if !next.is_finite() {
        return Err(Error::NonFinite(format!("non-finite state at t = {}", state.time + dt)));
    }
    Ok((out, c1 + c2))
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunStatus {
    Completed { t: f64 },
    NumericalBreakdown { t: f64 },
    DomainExhausted { t: f64 },
    StepLimit { t: f64 },
}

impl RunStatus {
    pub fn time(&self) -> f64 {
        match *self {
            RunStatus::Completed { t }
            | RunStatus::NumericalBreakdown { t }
            | RunStatus::DomainExhausted { t }
            | RunStatus::StepLimit { t } => t,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            RunStatus::Completed { t } => format!("completed at t = {t}"),
            RunStatus::NumericalBreakdown { t } => format!("numerical breakdown at t = {t}"),
            RunStatus::DomainExhausted { t } => format!("domain exhausted at t = {t}"),
            RunStatus::StepLimit { t } => format!("step limit reached at t = {t}"),
        }
    }
}

/// Per-record diagnostics beyond the energy breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub support_radius: f64,
    /// Cumulative number of floor clamps up to this record.
    pub clamps: usize,
    /// `∫|curl H|²` (0 without a magnetic field).
    #[serde(rename = "curlH2")]
    pub curl_h2: f64,
    /// `h‖div H‖₂/‖H‖₂` (0 without a magnetic field).
    #[serde(rename = "divH_rel")]
    pub div_h_rel: f64,
}

/// Recorded history of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub breakdowns: Vec<EnergyBreakdown>,
    pub diagnostics: Vec<Diagnostics>,
    /// Monitor events, filled by the certifier.
    #[serde(default)]
    pub violations: Vec<String>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, e: EnergyBreakdown, d: Diagnostics) {
        self.times.push(t);
        self.breakdowns.push(e);
        self.diagnostics.push(d);
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: TimeSeries,
    pub status: RunStatus,
    pub steps: usize,
    pub clamps: usize,
    pub initial: FluidState,
    pub last: FluidState,
}

/// Hyperdiffusion coefficient `σ = κh³` for the configured strength `κ`.
pub fn hyperdiffusion_coefficient(config: &SimConfig) -> f64 {
    config.hyperdiffusion() * config.grid.min_spacing().powi(3)
}

fn record(state: &FluidState, params: &ExponentParams, threshold: f64, clamps: usize) -> Result<(EnergyBreakdown, Diagnostics)> {
    let e = functionals(state, params)?;
    let (curl_h2, div_h_rel) = match &state.h {
        Some(h) => {
            let j = curl(h)?;
            (integrate(&h.grid, &speed_squared(&j)), relative_divergence(h)?)
        }
        None => (0.0, 0.0),
    };
    Ok((
        e,
        Diagnostics {
            support_radius: support_radius(state, threshold),
            clamps,
            curl_h2,
            div_h_rel,
        },
    ))
}

/// Runs `config` from its initial data. `on_snapshot` receives the state at
/// step 0 and every `snapshot_every` steps.
pub fn run_observed<F>(config: &SimConfig, mut on_snapshot: F) -> Result<RunOutput>
where
    F: FnMut(usize, &FluidState) -> Result<()>,
{
    config.validate()?;
    let (state0, floor) = initial_data(config)?;
    let params = config.exponent_params();
    let setup = StepSetup {
        model: config.constitutive(),
        terms: Terms {
            eta: config.eta,
            hyperdiffusion: hyperdiffusion_coefficient(config),
            frozen_velocity: config.frozen_velocity,
        },
        floor,
    };
    let projector = match &state0.h {
        Some(_) => Some(Projector::new(config.grid)?),
        None => None,
    };
    let limit = config.support_limit();
    let threshold = config.support_threshold;

    let mut series = TimeSeries::default();
    let mut state = state0.clone();
    let mut clamps = 0usize;
    let mut steps = 0usize;
    let (e, d) = record(&state, &params, threshold, clamps)?;
    let mut support = d.support_radius;
    series.push(0.0, e, d);
    on_snapshot(0, &state)?;
    let mut recorded_step = 0usize;

    let status = loop {
        if support > limit {
            break RunStatus::DomainExhausted { t: state.time };
        }
        if state.time >= config.t_end {
            break RunStatus::Completed { t: state.time };
        }
        if steps >= config.max_steps {
            break RunStatus::StepLimit { t: state.time };
        }
        let mut dt = match stable_dt(&state, &setup.model, &setup.terms, floor, config.cfl) {
            Ok(dt) if dt > 0.0 && dt.is_finite() => dt,
            _ => break RunStatus::NumericalBreakdown { t: state.time },
        };
        let remaining = config.t_end - state.time;
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        let (mut next, c) = match step(&state, &setup, dt) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) => break RunStatus::NumericalBreakdown { t: state.time },
            Err(e) => return Err(e),
        };
        if last {
            next.time = config.t_end;
        }
        if let (Some(p), Some(h)) = (&projector, &next.h) {
            next.h = Some(p.project(h)?);
        }
        clamps += c;
        steps += 1;
        state = next;
        support = support_radius(&state, threshold);
        let at_end = last || support > limit || steps >= config.max_steps;
        if steps.is_multiple_of(config.output_every) || at_end {
            let (e, d) = record(&state, &params, threshold, clamps)?;
            if !e.total.is_finite() {
                break RunStatus::NumericalBreakdown { t: state.time };
            }
            series.push(state.time, e, d);
            recorded_step = steps;
        }
        if let Some(every) = config.snapshot_every {
            if steps.is_multiple_of(every) {
                on_snapshot(steps, &state)?;
            }
        }
    };
    if recorded_step != steps && matches!(status, RunStatus::NumericalBreakdown { .. }) {
        // Keep the last finite state on record.
        if let Ok((e, d)) = record(&state, &params, threshold, clamps) {
            if e.total.is_finite() && state.time > *series.times.last().unwrap() {
                series.push(state.time, e, d);
            }
        }
    }
    Ok(RunOutput {
        series,
        status,
        steps,
        clamps,
        initial: state0,
        last: state,
    })
}

/// Runs `config` without snapshots.
pub fn run(config: &SimConfig) -> Result<RunOutput> {
    run_observed(config, |_, _| Ok(()))
}
