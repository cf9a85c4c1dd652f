use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Several variants carry scientific meaning rather than signalling a bug:
/// [`Error::ShootingDiverged`] means no periodic orbit was found near the guess,
/// and [`Error::FirstOrderNotZero`] means second-order averaging does not apply.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate family: {0}")]
    DegenerateFamily(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} at {nodes} nodes (tolerance {tol:.3e})")]
    QuadratureNotConverged { estimate: f64, nodes: usize, tol: f64 },

    #[error("first-order average does not vanish identically (defect {defect:.3e})")]
    FirstOrderNotZero { defect: f64 },

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:.3e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("integration span {span} exceeds max_time {max_time}")]
    MaxTimeExceeded { span: f64, max_time: f64 },

    #[error("no return to the section within {max_time}")]
    NoReturn { max_time: f64 },

    #[error("flow is tangential to the section (normal velocity {normal_velocity:.3e})")]
    TangentialCrossing { normal_velocity: f64 },

    #[error("shooting diverged after {steps} Newton steps (last residual {residual:.3e})")]
    ShootingDiverged { steps: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
