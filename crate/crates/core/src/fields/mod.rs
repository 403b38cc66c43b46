//! Periodic-grid fields, central-difference operators and the integral
//! functionals (mass, momentum, energies, dissipation).

mod grid;
pub mod ops;
pub mod reduce;
mod state;

pub use grid::{sample, sample_vector, Grid, GridSpec, ScalarField, TensorField, VectorField, MIN_CELLS};
pub use ops::{
    compact_laplacian, curl, diff, divergence, double_dot, gradient, relative_divergence, shear_rate, symmetrize,
    tensor_divergence, tensor_magnitude,
};
pub use reduce::{integrate, integrate_map, lp_norm, lp_norm_vector, pairwise_sum};
pub use state::{dissipation, functionals, support_radius, EnergyBreakdown, FluidState, DIV_H_TOL};
pub(crate) use state::speed_squared;
