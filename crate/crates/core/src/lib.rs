//! Ancilla-free measurement of n-time correlation functions.
//!
//! Nested commutators and anticommutators of Heisenberg-picture operators are
//! evaluated as finite differences of circuit expectations with shifted real-
//! and imaginary-time gates. The crate carries its own dense statevector
//! simulator, model Hamiltonians, imaginary-time evolution variants, noise
//! models and the spectral pipeline that turns correlators into spectra.

pub mod config;
pub mod correlators;
pub mod dense;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod models;
pub mod noise;
pub mod oracle;
pub mod pauli;
pub mod qite;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
