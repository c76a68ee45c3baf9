//! Numerical machinery for Strichartz-norm maximizers of the mass-critical
//! nonlinear Schrödinger equation in dimensions one and two.

pub mod acceptance;
pub mod constants;
pub mod error;
pub mod gauge;
pub mod gaussian;
pub mod hermite;
pub mod integrate;
pub mod io;
pub mod quadform;
pub mod sim;

pub use error::{Error, Result};
