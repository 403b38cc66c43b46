//! Simulation and certification toolkit for compressible non-Newtonian
//! barotropic fluids and their resistive MHD extension.
//!
//! The crate evolves the continuity and momentum equations with a power-law
//! (or Newtonian) viscous stress on a periodic box, and checks every
//! functional inequality behind the nonexistence theorems against the
//! computed fields: threshold exponents, Sobolev/Hölder/Jensen bounds, the
//! energy-rate bound and the resulting lifespan certificate.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certifier;
pub mod config;
pub mod constitutive;
pub mod error;
pub mod fields;
pub mod inequality;
pub mod io;
pub mod solver;
pub mod thresholds;
pub mod tolerances;

pub use error::{Error, Result};
