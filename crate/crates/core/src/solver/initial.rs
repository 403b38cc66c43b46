//! Initial-data generators.

use crate::config::{InitialCondition, SimConfig};
use crate::error::{Error, Result};
use crate::fields::{curl, sample, sample_vector, FluidState, Grid, ScalarField, VectorField};

/// Relative default density floor.
pub const DEFAULT_FLOOR_FRACTION: f64 = 1e-10;

fn unit_direction(direction: &Option<Vec<f64>>, n: usize) -> Result<[f64; 3]> {
    let mut e = [0.0; 3];
    match direction {
        None => e[0] = 1.0,
        Some(d) => {
            if d.len() != n {
                return Err(Error::domain(format!("direction needs {n} components")));
            }
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::domain("direction must be finite and nonzero"));
            }
            for (k, v) in d.iter().enumerate() {
                e[k] = v / norm;
            }
        }
    }
    Ok(e)
}

fn dist2(x: [f64; 3], c: [f64; 3]) -> f64 {
    (0..3).map(|d| (x[d] - c[d]) * (x[d] - c[d])).sum()
}

fn gaussian_velocity(grid: Grid, u0: f64, width: f64, e: [f64; 3], centre: [f64; 3]) -> Result<VectorField> {
    sample_vector(grid, grid.n(), |x| {
        let g = u0 * (-dist2(x, centre) / (width * width)).exp();
        [g * e[0], g * e[1], g * e[2]]
    })
}

/// Builds the initial state named in `config`, before the density floor.
pub fn raw_initial_data(config: &SimConfig) -> Result<FluidState> {
    let grid = config.grid;
    let n = grid.n();
    let zero = [0.0; 3];
    let (rho, u, h) = match &config.initial_condition {
        InitialCondition::GaussianDrift {
            rho_bar,
            width,
            background,
            u0,
            velocity_width,
            direction,
        } => {
            let e = unit_direction(direction, n)?;
            let rho = sample(grid, |x| background + rho_bar * (-dist2(x, zero) / (width * width)).exp())?;
            let u = gaussian_velocity(grid, *u0, velocity_width.unwrap_or(*width), e, zero)?;
            (rho, u, None)
        }
        InitialCondition::CollidingBumps {
            rho_bar,
            width,
            background,
            u0,
            separation,
            velocity_width,
            direction,
        } => {
            let e = unit_direction(direction, n)?;
            let c = e.map(|v| 0.5 * separation * v);
            let w2 = width * width;
            let wu = velocity_width.unwrap_or(*width);
            let wu2 = wu * wu;
            let rho = sample(grid, |x| {
                let plus: [f64; 3] = [-c[0], -c[1], -c[2]];
                background + rho_bar * ((-dist2(x, c) / w2).exp() + (-dist2(x, plus) / w2).exp())
            })?;
            // The bump at +c moves along −e, the one at −c along +e.
            let u = sample_vector(grid, n, |x| {
                let minus: [f64; 3] = [-c[0], -c[1], -c[2]];
                let s = u0 * ((-dist2(x, minus) / wu2).exp() - (-dist2(x, c) / wu2).exp());
                [s * e[0], s * e[1], s * e[2]]
            })?;
            (rho, u, None)
        }
        InitialCondition::MhdLoop {
            rho_bar,
            width,
            background,
            u0,
            velocity_width,
            direction,
            b0,
            loop_radius,
        } => {
            if n != 3 {
                return Err(Error::Dimension("mhd_loop needs n = 3".into()));
            }
            let e = unit_direction(direction, n)?;
            let rho = sample(grid, |x| background + rho_bar * (-dist2(x, zero) / (width * width)).exp())?;
            let u = gaussian_velocity(grid, *u0, velocity_width.unwrap_or(*width), e, zero)?;
            let r0 = *loop_radius;
            let potential = sample_vector(grid, 3, |x| {
                let s = dist2(x, zero) / (r0 * r0);
                let psi = if s < 1.0 { b0 * r0 * (1.0 - s).powi(4) } else { 0.0 };
                [0.0, 0.0, psi]
            })?;
            (rho, u, Some(curl(&potential)?))
        }
        InitialCondition::ResistiveMode { rho, amplitude, mode } => {
            if n != 3 {
                return Err(Error::Dimension("resistive_mode needs n = 3".into()));
            }
            let k = resistive_wavenumber(grid, *mode);
            let h = sample_vector(grid, 3, |x| [0.0, 0.0, amplitude * (k * x[0]).sin()])?;
            (ScalarField::constant(grid, *rho), VectorField::zeros(grid, 3), Some(h))
        }
        InitialCondition::Uniform { rho, velocity } => {
            if velocity.len() != n {
                return Err(Error::domain(format!("velocity needs {n} components")));
            }
            let u = VectorField {
                grid,
                comps: velocity.iter().map(|&v| vec![v; grid.len()]).collect(),
            };
            (ScalarField::constant(grid, *rho), u, None)
        }
    };
    Ok(FluidState { rho, u, h, time: 0.0 })
}

/// `k = π·mode/L`, the wavenumber of the `resistive_mode` field.
pub fn resistive_wavenumber(grid: Grid, mode: usize) -> f64 {
    std::f64::consts::PI * mode as f64 / grid.half_width()
}

/// Absolute density floor for a run starting from `rho0`.
pub fn density_floor(config: &SimConfig, rho0: &ScalarField) -> f64 {
    config
        .rho_floor
        .unwrap_or_else(|| DEFAULT_FLOOR_FRACTION * rho0.max())
}

/// Initial state with the density raised to the floor where it falls below.
pub fn initial_data(config: &SimConfig) -> Result<(FluidState, f64)> {
    let mut state = raw_initial_data(config)?;
    let floor = density_floor(config, &state.rho);
    for r in state.rho.values.iter_mut() {
        if *r < floor {
            *r = floor;
        }
    }
    Ok((state, floor))
}
