use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("field length {got} does not match grid size {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("wavefunction is not normalized (norm deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("packet reaches the grid boundary (amplitude {amplitude:.3e} above {threshold:.1e})")]
    BoundaryLeakage { amplitude: f64, threshold: f64 },

    #[error("phase unwrap failed near x = {x:.4}: grid too coarse for the local phase gradient")]
    PhaseUnwrap { x: f64 },

    #[error("dispersion collapsed to {dq:.3e} at t = {t:.6}")]
    Singularity { t: f64, dq: f64 },

    #[error("non-finite value produced at t = {t:.6}")]
    NonFinite { t: f64 },

    #[error("quadrature did not converge (resolution doubling changed the result by {delta:.3e})")]
    QuadratureNotConverged { delta: f64 },

    #[error("imaginary-time relaxation did not converge (last energy change {delta:.3e})")]
    RelaxationNotConverged { delta: f64 },

    #[error("time {t:.6} lies outside the recorded span [{start:.6}, {end:.6}]")]
    OutOfTimeSpan { t: f64, start: f64, end: f64 },

    #[error("{fraction:.4} of sample paths escaped the profile support")]
    ExcessiveExclusion { fraction: f64 },

    #[error("matrix exponential failed: {0}")]
    MatrixExponential(String),

    #[error("no trajectory sample matches frame time {t:.9}")]
    TimeGridMismatch { t: f64 },

    #[error("profile is invalid: {0}")]
    InvalidProfile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
