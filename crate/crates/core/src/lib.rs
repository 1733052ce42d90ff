//! Dissipative Landau-Zener sweeps of a qubit coupled to a damped oscillator.
//!
//! The crate integrates the Bloch-Redfield master equation of the qubit and
//! oscillator in the biorthogonal eigenbasis of the damped-oscillator
//! Liouvillian, cross-checks it against a brute-force Fock-basis solver, and
//! evaluates the closed-form transition probabilities of the model.
//!
//! Units: `hbar = k_B = 1` and the oscillator frequency is 1. The quadrature
//! `X = a + a^dag` and its time derivative `P = i (a^dag - a)` span phase space.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod kernels;
pub mod observables;
pub mod ode;
pub mod params;
pub mod phase_space;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result, Violation};
pub use kernels::{DiffusionCoefficients, EigenbasisSpec};
pub use params::{validate, DxpPolicy, SystemParams, ValidatedParams, Warnings};
pub use scalar::{Cplx, Real};

/// Double-precision parameter set.
pub type Params = SystemParams<f64>;
/// Double-precision eigenbasis constants.
pub type Spec = EigenbasisSpec<f64>;
/// Double-precision diffusion constants.
pub type Diffusion = DiffusionCoefficients<f64>;
/// Double-precision coefficient state.
pub type State = phase_space::CoefficientState<f64>;
/// Double-precision sweep output.
pub type Sweep = phase_space::SweepResult<f64>;
