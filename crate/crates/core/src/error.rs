use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symmetric eigensolver did not converge on a {size}x{size} matrix")]
    EigenNonConvergence { size: usize },

    #[error("lens map undefined at tau = {0} (requires |tau| < pi/2)")]
    LensDomain(f64),

    #[error(
        "cutoff {cutoff} under-resolves the source: relative projection error {residual:.3e} > {tol:.1e}"
    )]
    UnderResolved { cutoff: usize, residual: f64, tol: f64 },

    #[error("tolerance {tol:.1e} needs t_max >= {required:.4e} (got {t_max:.4e})")]
    TailTooLarge { tol: f64, t_max: f64, required: f64 },

    #[error("quadrature did not reach tolerance {tol:.1e} after {levels} refinements (last change {change:.3e})")]
    QuadratureNonConvergence { tol: f64, levels: usize, change: f64 },

    #[error("relative mass drift {drift:.3e} exceeds {limit:.1e} at step {step}")]
    MassDrift { step: usize, drift: f64, limit: f64 },

    #[error("non-finite coefficient produced at step {step}")]
    Overflow { step: usize },

    #[error("spectral leakage {leakage:.3e} (fraction of mass in the top modes) exceeds {limit:.1e}")]
    Leakage { leakage: f64, limit: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NewtonNonConvergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular (pivot {pivot:.3e})")]
    SingularJacobian { pivot: f64 },

    #[error("finite-difference step failed: {0}")]
    FiniteDifference(String),

    #[error("kernel direction {index} gives |Q| = {residual:.3e} > {tol:.1e}")]
    KernelResidual { index: usize, residual: f64, tol: f64 },

    #[error("self-consistency check failed: {0}")]
    SelfConsistency(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
