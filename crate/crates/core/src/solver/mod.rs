//! Explicit solver for the compressible non-Newtonian system and its MHD
//! extension on the periodic box.

mod initial;
mod projection;
mod rhs;
mod run;

pub use initial::{density_floor, initial_data, raw_initial_data, resistive_wavenumber, DEFAULT_FLOOR_FRACTION};
pub use projection::Projector;
pub use rhs::{evaluate, face_density, rhs_fluid, rhs_mhd, Rhs, Terms};
pub use run::{
    hyperdiffusion_coefficient, run, run_observed, stable_dt, step, Diagnostics, RunOutput, RunStatus, StepSetup,
    TimeSeries,
};
