use thiserror::Error;

/// Errors reported by the scattering routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid parameter or argument outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The plane-wave (standard) transfer matrix does not exist for a
    /// potential with a slower-than-integrable tail; use the oscillating
    /// WKB-carrier convention instead.
    #[error("standard transfer matrix requested for a long-range potential (tail exponent {alpha}); it only exists for integrable tails")]
    LongRangeStandardMatrix { alpha: f64 },

    /// `m22` of the transfer matrix vanished: the requested wavenumber sits
    /// on a spectral singularity and the scattering amplitudes diverge.
    #[error("spectral singularity: |m22| = {abs_m22:.3e} <= 1e-13, amplitudes diverge at this wavenumber")]
    SpectralSingularity { abs_m22: f64 },

    /// The supplied integration window is too small for the requested
    /// tolerance: the neglected tail alone exceeds it.
    #[error("window too small: tail residual bound {residual:.3e} exceeds tolerance {tol:.3e} (window ends at {x_hi})")]
    WindowTooSmall { x_hi: f64, residual: f64, tol: f64 },

    /// The adaptive integrator gave up (step underflow or step budget).
    #[error("ODE integration failed: {0}")]
    OdeFailure(String),

    /// Quadrature failed to converge to the requested tolerance.
    #[error("quadrature failed: {0}")]
    QuadFailure(String),

    /// A precondition on the factorization interval is violated
    /// (|1 - v/2k^2| must stay away from zero on the tail).
    #[error("factorization condition violated: {0}")]
    ConditionViolated(String),

    /// Operation not supported for this potential family.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Two independent evaluation routes disagree beyond their accuracy
    /// budget; the result cannot be trusted.
    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
