//! Run configuration: strict JSON parsing, defaults and canonical hashing.
//!
//! Unknown keys are rejected everywhere and every error carries the JSON
//! path of the offending value.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::constitutive::ConstitutiveModel;
use crate::error::{Error, Result};
use crate::fields::Grid;
use crate::thresholds::ExponentParams;
use crate::tolerances::Tolerances;

/// Regularization used for shear-thinning (`q < 2`) power laws when the
/// config does not set `eps_reg`.
pub const DEFAULT_EPS_REG_SHEAR_THINNING: f64 = 1e-3;

/// Default hyperdiffusion coefficient for `q < 2` runs.
pub const DEFAULT_HYPERDIFFUSION_SHEAR_THINNING: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    PowerLaw {
        nu: f64,
        q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps_reg: Option<f64>,
        #[serde(rename = "A")]
        a: f64,
        gamma: f64,
    },
    Newtonian {
        lambda: f64,
        mu: f64,
        #[serde(rename = "A")]
        a: f64,
        gamma: f64,
    },
}

impl ModelSpec {
    pub fn gamma(&self) -> f64 {
        match self {
            ModelSpec::PowerLaw { gamma, .. } | ModelSpec::Newtonian { gamma, .. } => *gamma,
        }
    }

    pub fn pressure_coefficient(&self) -> f64 {
        match self {
            ModelSpec::PowerLaw { a, .. } | ModelSpec::Newtonian { a, .. } => *a,
        }
    }

    /// Coercivity exponent `q` (2 for the Newtonian model).
    pub fn q(&self) -> f64 {
        match self {
            ModelSpec::PowerLaw { q, .. } => *q,
            ModelSpec::Newtonian { .. } => 2.0,
        }
    }

    /// Coercivity constant `ν` (`2μ` for the Newtonian model).
    pub fn nu(&self) -> f64 {
        match self {
            ModelSpec::PowerLaw { nu, .. } => *nu,
            ModelSpec::Newtonian { mu, .. } => 2.0 * mu,
        }
    }

    pub fn eps_reg(&self) -> f64 {
        match self {
            ModelSpec::PowerLaw { eps_reg, q, .. } => eps_reg.unwrap_or(if *q >= 2.0 {
                0.0
            } else {
                DEFAULT_EPS_REG_SHEAR_THINNING
            }),
            ModelSpec::Newtonian { .. } => 0.0,
        }
    }

    pub fn build(&self) -> ConstitutiveModel {
        match *self {
            ModelSpec::PowerLaw { nu, q, a, gamma, .. } => ConstitutiveModel::power_law(nu, q, self.eps_reg(), a, gamma),
            ModelSpec::Newtonian { lambda, mu, a, gamma } => ConstitutiveModel::newtonian(lambda, mu, a, gamma),
        }
    }

    fn fill_defaults(&mut self) {
        let eps = self.eps_reg();
        if let ModelSpec::PowerLaw { eps_reg, .. } = self {
            *eps_reg = Some(eps);
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let gamma = self.gamma();
        if !(gamma > 1.0) {
            return Err(Error::config("model.gamma", "gamma must exceed 1"));
        }
        if !(self.pressure_coefficient() > 0.0) {
            return Err(Error::config("model.A", "A must be positive"));
        }
        match *self {
            ModelSpec::PowerLaw { nu, q, eps_reg, .. } => {
                if !(nu > 0.0) {
                    return Err(Error::config("model.nu", "nu must be positive"));
                }
                if !(q > 1.0) {
                    return Err(Error::config("model.q", "q must exceed 1"));
                }
                if let Some(e) = eps_reg {
                    if !(e >= 0.0) {
                        return Err(Error::config("model.eps_reg", "eps_reg must be non-negative"));
                    }
                }
                if q < 2.0 && self.eps_reg() == 0.0 {
                    return Err(Error::config(
                        "model.eps_reg",
                        "q < 2 needs eps_reg > 0: the viscosity is unbounded at zero shear",
                    ));
                }
            }
            ModelSpec::Newtonian { lambda, mu, .. } => {
                if !(mu > 0.0) {
                    return Err(Error::config("model.mu", "mu must be positive"));
                }
                if !(lambda + 2.0 / n as f64 * mu > 0.0) {
                    return Err(Error::config("model.lambda", "lambda + (2/n) mu must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn one() -> f64 {
    1.0
}

/// Named initial-data generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// Density `background + ρ̄ e^{−|x|²/w²}` moving along `direction` with
    /// speed `U₀ e^{−|x|²/w_u²}`.
    GaussianDrift {
        #[serde(default = "one")]
        rho_bar: f64,
        #[serde(default = "one")]
        width: f64,
        /// Uniform density added to the bump.
        #[serde(default)]
        background: f64,
        u0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// Two bumps at `±separation/2` along `direction` moving towards each
    /// other; total momentum vanishes.
    CollidingBumps {
        #[serde(default = "one")]
        rho_bar: f64,
        #[serde(default = "one")]
        width: f64,
        /// Uniform density added to the bump.
        #[serde(default)]
        background: f64,
        u0: f64,
        separation: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// Gaussian drift plus a magnetic loop `H = curl(0, 0, ψ)` with the
    /// compactly supported potential `ψ = b0·R·(1 − r²/R²)⁴`.
    MhdLoop {
        #[serde(default = "one")]
        rho_bar: f64,
        #[serde(default = "one")]
        width: f64,
        /// Uniform density added to the bump.
        #[serde(default)]
        background: f64,
        u0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
        b0: f64,
        loop_radius: f64,
    },
    /// Fluid at rest with uniform density and `H = (0, 0, a·sin(kx))`,
    /// `k = π·mode/L`.
    ResistiveMode {
        #[serde(default = "one")]
        rho: f64,
        amplitude: f64,
        mode: usize,
    },
    /// Uniform density and velocity.
    Uniform { rho: f64, velocity: Vec<f64> },
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub grid: Grid,
    pub model: ModelSpec,
    #[serde(default)]
    pub eta: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Absolute density floor; defaults to `1e−10 × max ρ(0)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_floor: Option<f64>,
    #[serde(default = "default_margin")]
    pub support_margin: f64,
    /// Relative level defining the support of `ρ`, `|u|`, `|H|`.
    #[serde(default = "default_support_threshold")]
    pub support_threshold: f64,
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    /// Steps between field snapshots; none when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Fourth-order filter strength; defaults to 0 for `q >= 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperdiffusion: Option<f64>,
    /// Hold the velocity and density fixed and evolve only `H`.
    #[serde(default)]
    pub frozen_velocity: bool,
    pub initial_condition: InitialCondition,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_margin() -> f64 {
    0.4
}
fn default_support_threshold() -> f64 {
    1e-3
}
fn default_output_every() -> usize {
    1
}
fn default_max_steps() -> usize {
    1_000_000
}

impl SimConfig {
    pub fn exponent_params(&self) -> ExponentParams {
        ExponentParams {
            n: self.grid.n(),
            gamma: self.model.gamma(),
            a: self.model.pressure_coefficient(),
            nu: self.model.nu(),
            q: self.model.q(),
            eta: self.eta,
        }
    }

    pub fn constitutive(&self) -> ConstitutiveModel {
        self.model.build()
    }

    pub fn is_mhd(&self) -> bool {
        matches!(
            self.initial_condition,
            InitialCondition::MhdLoop { .. } | InitialCondition::ResistiveMode { .. }
        )
    }

    pub fn hyperdiffusion(&self) -> f64 {
        self.hyperdiffusion.unwrap_or(if self.model.q() >= 2.0 {
            0.0
        } else {
            DEFAULT_HYPERDIFFUSION_SHEAR_THINNING
        })
    }

    /// `support_margin · L`, or infinity for data that fill the whole box
    /// (`resistive_mode`, `uniform`), where the gate has no meaning.
    pub fn support_limit(&self) -> f64 {
        match self.initial_condition {
            InitialCondition::ResistiveMode { .. } | InitialCondition::Uniform { .. } => f64::INFINITY,
            _ => self.support_margin * self.grid.half_width(),
        }
    }

    /// Writes resolved defaults into the optional fields.
    pub fn fill_defaults(&mut self) {
        self.model.fill_defaults();
        self.hyperdiffusion = Some(self.hyperdiffusion());
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        self.model.validate(n)?;
        if !(self.eta >= 0.0) {
            return Err(Error::config("eta", "eta must be non-negative"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::config("t_end", "t_end must be positive"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.9) {
            return Err(Error::config("cfl", "cfl must lie in (0, 0.9]"));
        }
        if let Some(f) = self.rho_floor {
            if !(f > 0.0) {
                return Err(Error::config("rho_floor", "rho_floor must be positive"));
            }
        }
        if !(self.support_margin > 0.0 && self.support_margin < 1.0) {
            return Err(Error::config("support_margin", "support_margin must lie in (0, 1)"));
        }
        if !(self.support_threshold > 0.0 && self.support_threshold < 1.0) {
            return Err(Error::config("support_threshold", "support_threshold must lie in (0, 1)"));
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every", "output_every must be at least 1"));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::config("snapshot_every", "snapshot_every must be at least 1"));
        }
        if self.max_steps == 0 {
            return Err(Error::config("max_steps", "max_steps must be at least 1"));
        }
        if let Some(h) = self.hyperdiffusion {
            if !(h >= 0.0) {
                return Err(Error::config("hyperdiffusion", "hyperdiffusion must be non-negative"));
            }
        }
        self.validate_initial_condition(n)
    }

    fn validate_initial_condition(&self, n: usize) -> Result<()> {
        let at = |field: &str| format!("initial_condition.{field}");
        let positive = |v: f64, field: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(at(field), format!("{field} must be positive")))
            }
        };
        let direction = |d: &Option<Vec<f64>>| -> Result<()> {
            if let Some(d) = d {
                if d.len() != n {
                    return Err(Error::config(at("direction"), format!("direction needs {n} components")));
                }
                if d.iter().all(|&x| x == 0.0) || d.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config(at("direction"), "direction must be finite and nonzero"));
                }
            }
            Ok(())
        };
        match &self.initial_condition {
            InitialCondition::GaussianDrift {
                rho_bar,
                width,
                background,
                velocity_width,
                direction: d,
                ..
            } => {
                positive(*rho_bar, "rho_bar")?;
                self.check_background(*rho_bar, *background)?;
                positive(*width, "width")?;
                if let Some(w) = velocity_width {
                    positive(*w, "velocity_width")?;
                }
                direction(d)
            }
            InitialCondition::CollidingBumps {
                rho_bar,
                width,
                background,
                separation,
                velocity_width,
                direction: d,
                ..
            } => {
                positive(*rho_bar, "rho_bar")?;
                self.check_background(*rho_bar, *background)?;
                positive(*width, "width")?;
                positive(*separation, "separation")?;
                if let Some(w) = velocity_width {
                    positive(*w, "velocity_width")?;
                }
                direction(d)
            }
            InitialCondition::MhdLoop {
                rho_bar,
                width,
                background,
                velocity_width,
                direction: d,
                loop_radius,
                ..
            } => {
                if n != 3 {
                    return Err(Error::config("initial_condition.name", "mhd_loop needs n = 3"));
                }
                positive(*rho_bar, "rho_bar")?;
                self.check_background(*rho_bar, *background)?;
                positive(*width, "width")?;
                positive(*loop_radius, "loop_radius")?;
                if let Some(w) = velocity_width {
                    positive(*w, "velocity_width")?;
                }
                direction(d)
            }
            InitialCondition::ResistiveMode { rho, mode, .. } => {
                if n != 3 {
                    return Err(Error::config("initial_condition.name", "resistive_mode needs n = 3"));
                }
                positive(*rho, "rho")?;
                if *mode == 0 {
                    return Err(Error::config(at("mode"), "mode must be at least 1"));
                }
                Ok(())
            }
            InitialCondition::Uniform { rho, velocity } => {
                positive(*rho, "rho")?;
                if velocity.len() != n {
                    return Err(Error::config(at("velocity"), format!("velocity needs {n} components")));
                }
                Ok(())
            }
        }
    }

    /// The support test compares `ρ` with `support_threshold·max ρ`, so a
    /// background at or above that level would flag the whole box.
    fn check_background(&self, rho_bar: f64, background: f64) -> Result<()> {
        if !(background >= 0.0) || !background.is_finite() {
            return Err(Error::config("initial_condition.background", "background must be non-negative"));
        }
        if background >= self.support_threshold * (rho_bar + background) {
            return Err(Error::config(
                "initial_condition.background",
                format!(
                    "background fraction {} must stay below support_threshold {}",
                    background / (rho_bar + background),
                    self.support_threshold
                ),
            ));
        }
        Ok(())
    }

    /// Canonical JSON: resolved defaults, keys sorted.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        // serde_json's default map is ordered by key.
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Parses and validates a config from JSON text.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut config: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;
    config.validate()?;
    config.fill_defaults();
    Ok(config)
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "grid": {"n": 2, "cells": [32, 32], "L": 8.0},
        "model": {"model": "power_law", "nu": 1.0, "q": 2.5, "A": 1.0, "gamma": 1.4},
        "t_end": 0.1,
        "initial_condition": {"name": "gaussian_drift", "u0": 0.5}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.cfl, 0.4);
        assert_eq!(c.support_margin, 0.4);
        assert_eq!(c.model.eps_reg(), 0.0);
        assert!(matches!(c.model, ModelSpec::PowerLaw { eps_reg: Some(e), .. } if e == 0.0));
        assert_eq!(c.hyperdiffusion, Some(0.0));
        assert_eq!(c.exponent_params().q, 2.5);
    }

    #[test]
    fn gamma_one_is_rejected() {
        let text = MINIMAL.replace("\"gamma\": 1.4", "\"gamma\": 1.0");
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("gamma must exceed 1"), "{err}");
        assert!(err.to_string().contains("model.gamma"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("\"q\": 2.5", "\"q\": 2.5, \"eps_rg\": 0.1");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("eps_rg"), "{err}");
        let text = MINIMAL.replace("\"t_end\"", "\"cfll\": 0.3, \"t_end\"");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("cfll"), "{err}");
    }

    #[test]
    fn missing_field_is_reported() {
        let text = MINIMAL.replace("\"t_end\": 0.1,", "");
        let err = parse_config_str(&text).unwrap_err().to_string();
        assert!(err.contains("t_end"), "{err}");
    }

    #[test]
    fn q_equal_n_is_accepted_for_simulation() {
        let text = MINIMAL
            .replace("\"n\": 2, \"cells\": [32, 32]", "\"n\": 3, \"cells\": [16]")
            .replace("\"q\": 2.5", "\"q\": 3.0");
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.grid.cells(), &[16, 16, 16]);
        assert_eq!(c.exponent_params().q, 3.0);
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = parse_config_str(MINIMAL).unwrap();
        let reordered = r#"{
            "initial_condition": {"u0": 0.5, "name": "gaussian_drift"},
            "t_end": 0.1,
            "model": {"gamma": 1.4, "A": 1.0, "q": 2.5, "nu": 1.0, "model": "power_law"},
            "grid": {"L": 8.0, "cells": [32, 32], "n": 2}
        }"#;
        let b = parse_config_str(reordered).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn shear_thinning_defaults() {
        let text = MINIMAL.replace("\"q\": 2.5", "\"q\": 1.5");
        let c = parse_config_str(&text).unwrap();
        assert_eq!(c.model.eps_reg(), DEFAULT_EPS_REG_SHEAR_THINNING);
        assert_eq!(c.hyperdiffusion(), DEFAULT_HYPERDIFFUSION_SHEAR_THINNING);
    }
}
