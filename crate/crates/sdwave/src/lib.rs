//! Spectral-Galerkin solver and inverse source identification for the
//! semilinear strongly damped wave equation on an interval with Dirichlet
//! boundary conditions.
//!
//! The model is
//!
//! ```text
//! u_tt − a²Δu − b(t)Δu_t + φ(x, u) = f₁(x) g(t) + f₂(x, t)
//! ```
//!
//! with the integral overdetermination ∫K(x)u(x,t)dx = E(t) determining the
//! temporal factor g(t). The library reduces the inverse problem to a
//! penalized direct problem (modules [`inverse`], [`solver`]), reconstructs
//! g explicitly from the state, constructs bounded and periodic solutions by
//! sweeping the start time to −∞ ([`longtime`]), and evaluates the energy
//! machinery and sufficient smallness conditions of the underlying theory
//! as runtime diagnostics ([`diagnostics`]). The [`mms`] module manufactures
//! exact solutions for end-to-end verification; [`cli`] exposes the
//! pipeline behind a configuration file.

pub mod basis;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod inverse;
pub mod io;
pub mod longtime;
pub mod mms;
pub mod problem;
pub mod solver;

pub use basis::{build_basis, ModalVector, SpectralBasis};
pub use error::{Error, Result};
pub use inverse::{
    compute_k0, consistency_ode_check, f_alpha, overdetermination_residual, phi_alpha,
    reconstruct_g, ReductionTables,
};
pub use problem::{
    validate, DampingCoefficient, Interval, Nonlinearity, ProblemSpec, ValidationReport,
};
pub use solver::{solve_ivp, GalerkinState, StepperConfig, Trajectory};
