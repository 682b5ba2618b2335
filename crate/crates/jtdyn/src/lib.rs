//! Dynamics of a 2D wave packet near a conical intersection in the linear
//! E×ε Jahn-Teller model, with three mutually validating engines — a full
//! quantum split-operator propagator, a single-trajectory classical
//! spin-orbit integrator, and a truncated-Wigner ensemble — plus a
//! gauge-structure toolkit (Berry phase, field tensor, dual gauge algebra).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grid;
pub mod model;
pub mod propagator;
pub mod semiclassical;
pub mod twa;

pub use error::{Error, Result};
