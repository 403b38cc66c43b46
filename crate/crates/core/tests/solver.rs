//! Convergence and oracle tests for the explicit solver.

use blowcert_core::constitutive::ConstitutiveModel;
use blowcert_core::fields::{sample, sample_vector, FluidState, Grid};
use blowcert_core::solver::{step, StepSetup, Terms};

fn setup(model: ConstitutiveModel) -> StepSetup {
    StepSetup {
        model,
        terms: Terms::default(),
        floor: 1e-12,
    }
}

fn advance(mut state: FluidState, setup: &StepSetup, dt: f64, steps: usize) -> FluidState {
    for _ in 0..steps {
        let (next, clamps) = step(&state, setup, dt).unwrap();
        assert_eq!(clamps, 0);
        state = next;
    }
    state
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn smooth_state(grid: Grid) -> FluidState {
    let rho = sample(grid, |x| 1.0 + 0.2 * x[0].sin() * x[1].cos()).unwrap();
    let u = sample_vector(grid, 2, |x| [0.3 * x[1].sin(), -0.2 * (x[0] + 0.5).cos(), 0.0]).unwrap();
    FluidState {
        rho,
        u,
        h: None,
        time: 0.0,
    }
}

#[test]
fn time_stepping_is_second_order() {
    // Fixed grid; halving dt should cut the error by about four.
    let grid = Grid::cubic(2, 32, std::f64::consts::PI).unwrap();
    let s = setup(ConstitutiveModel::power_law(0.05, 2.5, 0.0, 1.0, 1.4));
    let t = 0.2;
    let coarse = [10usize, 20, 40, 80];
    let states: Vec<FluidState> = coarse
        .iter()
        .map(|&k| advance(smooth_state(grid), &s, t / k as f64, k))
        .collect();
    let d1 = max_diff(&states[0].rho.values, &states[1].rho.values);
    let d2 = max_diff(&states[1].rho.values, &states[2].rho.values);
    let d3 = max_diff(&states[2].rho.values, &states[3].rho.values);
    let order_a = (d1 / d2).log2();
    let order_b = (d2 / d3).log2();
    assert!(order_a >= 1.8 && order_b >= 1.8, "orders {order_a} {order_b}");
}

#[test]
fn pressureless_advection_converges_to_characteristics() {
    // A = 0, ν = 0, constant velocity c: ρ(x, t) = ρ0(x − ct), u ≡ c.
    let c = [0.7, -0.4];
    let t = 0.5;
    let rho0 = |x: [f64; 3]| 1.0 + 0.5 * (x[0]).sin() * (2.0 * x[1]).cos();
    let model = ConstitutiveModel::power_law(0.0, 2.0, 0.0, 0.0, 1.4);
    let s = setup(model);
    let mut errors = Vec::new();
    for cells in [32usize, 64, 128] {
        let grid = Grid::cubic(2, cells, std::f64::consts::PI).unwrap();
        let state = FluidState {
            rho: sample(grid, rho0).unwrap(),
            u: sample_vector(grid, 2, |_| [c[0], c[1], 0.0]).unwrap(),
            h: None,
            time: 0.0,
        };
        let steps = cells;
        let out = advance(state, &s, t / steps as f64, steps);
        let exact = sample(grid, |x| rho0([x[0] - c[0] * t, x[1] - c[1] * t, 0.0])).unwrap();
        errors.push(max_diff(&out.rho.values, &exact.values));
        for d in 0..2 {
            assert!(out.u.comps[d].iter().all(|&v| (v - c[d]).abs() < 1e-13));
        }
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.8, "errors {errors:?}");
    }
}

#[test]
fn newtonian_shear_wave_decays_at_viscous_rate() {
    // u = (a sin(k y), 0), ρ = 1, A = 0: u_t = μ u_yy, so a(t) = a e^{−μ k_h² t}
    // with the central-difference symbol k_h = sin(kh)/h applied twice.
    let mu = 0.1;
    let cells = 64;
    let grid = Grid::cubic(2, cells, std::f64::consts::PI).unwrap();
    let h = grid.spacing(1);
    let amp = 1e-3;
    let state = FluidState {
        rho: sample(grid, |_| 1.0).unwrap(),
        u: sample_vector(grid, 2, |x| [amp * x[1].sin(), 0.0, 0.0]).unwrap(),
        h: None,
        time: 0.0,
    };
    let s = setup(ConstitutiveModel::newtonian(0.0, mu, 0.0, 1.4));
    let (t, steps) = (0.5, 200);
    let out = advance(state, &s, t / steps as f64, steps);
    let kh = h.sin() / h;
    let expected = amp * (-mu * kh * kh * t).exp();
    let measured = sample_vector(grid, 2, |x| [x[1].sin(), 0.0, 0.0]).unwrap();
    // Project onto the mode.
    let num: f64 = out.u.comps[0].iter().zip(&measured.comps[0]).map(|(a, b)| a * b).sum();
    let den: f64 = measured.comps[0].iter().map(|b| b * b).sum();
    let got = num / den;
    assert!((got / expected - 1.0).abs() < 1e-5, "{got} vs {expected}");
}
