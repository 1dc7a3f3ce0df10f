//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation point {point} lies outside the closed interval [{left}, {right}]")]
    PointOutsideDomain { point: f64, left: f64, right: f64 },

    #[error(
        "degenerate overdetermination: |∫K f1 dx| = {kf1_abs:.3e} is below the \
         tolerance {tol:.3e} (condition (A5) fails)"
    )]
    DegenerateOverdetermination { kf1_abs: f64, tol: f64 },

    #[error(
        "nonlinear iteration did not converge within {max_iters} iterations at t = {t} \
         (residual {residual:.3e}); reduce dt relative to the Lipschitz bound"
    )]
    NonConvergence { t: f64, max_iters: usize, residual: f64 },

    #[error(
        "solution diverged at t = {t}: state norm {norm:.3e} exceeds the guard {guard:.3e}; \
         the problem data likely violate the standing assumptions"
    )]
    Diverged { t: f64, norm: f64, guard: f64 },

    #[error(
        "whole-line sweep did not converge: inter-m differences {diffs:?} stayed above \
         tolerance {tol:.3e}; the smallness conditions are likely violated"
    )]
    SweepNotConverged {
        diffs: Vec<f64>,
        tol: f64,
        report: Box<crate::diagnostics::SmallnessReport>,
    },

    #[error("trajectory window too short: span {span:.6} cannot host a shift of {needed:.6}")]
    WindowTooShort { span: f64, needed: f64 },

    #[error("eta = {eta} is outside the admissible range (0, {bound}] required by {which}")]
    InadmissibleEta { eta: f64, bound: f64, which: &'static str },

    #[error("fewer than {needed} positive samples remain after trimming; cannot fit a decay rate")]
    InsufficientPositiveSamples { needed: usize },

    #[error("manufactured solution violates the Dirichlet boundary at x = {x}, t = {t}: u* = {value:.3e}")]
    BoundaryViolation { x: f64, t: f64, value: f64 },

    #[error("manufactured data self-check failed: equation residual {residual:.3e} at (x, t) = ({x}, {t})")]
    ManufactureInconsistent { residual: f64, x: f64, t: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
