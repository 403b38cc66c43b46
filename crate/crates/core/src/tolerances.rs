use serde::{Deserialize, Serialize};

/// Pass/fail thresholds for the inequality checks and run monitors.
///
/// Algebraically exact inequalities (Hölder, Jensen) use `algebraic`;
/// discretization-limited ones use `sobolev` and `composite`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub sobolev: f64,
    pub algebraic: f64,
    pub composite: f64,
    /// Multiplicative allowance on `ν·D_q` in the discrete energy-rate check.
    pub energy_rate_rel: f64,
    /// Additive allowance, in units of `ℰ(0)`, in the energy-rate check.
    pub energy_rate_abs: f64,
    /// Allowed energy increase between records, in units of `ℰ(0)`.
    pub energy_monotone: f64,
    /// Relative mass and momentum drift.
    pub conservation: f64,
    /// Allowed excess over the certified line `ℰ(0) − C t`, in units of `ℰ(0)`.
    pub certified_line: f64,
    /// Required ratio `ν·D_q / C_inst` while the support stays inside the box.
    pub chain_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sobolev: 0.05,
            algebraic: 1e-10,
            composite: 0.10,
            energy_rate_rel: 0.05,
            energy_rate_abs: 1e-8,
            energy_monotone: 1e-10,
            conservation: 1e-6,
            certified_line: 0.10,
            chain_ratio: 0.9,
        }
    }
}
