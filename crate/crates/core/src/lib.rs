//! Simulation of STIRAP-driven lambda, tripod and two-atom tripod systems,
//! geometric phases computed three independent ways, and the resulting
//! holonomic gate set (one-qubit phase, Hadamard, two-qubit controlled phase).
//!
//! Units: Hamiltonians are stored as H/ħ in angular frequency, times are in
//! units of a reference time T₀ and Rabi frequencies in rad/T₀.
//!
//! Runnable examples live in `examples/`; the `stirap` binary wraps the
//! [`cli`] module for config-driven runs and sweeps.

pub mod cli;
pub mod error;
pub mod gates;
pub mod geomphase;
pub mod propagator;
pub mod pulses;
pub mod qcore;
pub mod systems;

pub use error::{Error, Result};
pub use qcore::{Basis, HermitianOperator, StateVector, C64};
