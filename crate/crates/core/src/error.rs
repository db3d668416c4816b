use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pump-atom detuning Delta_a is zero; adiabatic elimination is singular")]
    SingularDetuning,

    #[error("rescale factor must be positive, got {0}")]
    InvalidScale(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("photon number {x} is not a self-consistent root (|a_s|^2 = {a_sq})")]
    InconsistentRoot { x: f64, a_sq: f64 },

    #[error("Routh-Hurwitz criterion undefined at zero effective detuning")]
    CriterionUndefined,

    #[error("spectrum prefactor undefined at zero effective detuning")]
    UndefinedPrefactor,

    #[error("mechanical susceptibility diverges at omega = {0}")]
    DivergentSusceptibility(f64),

    #[error("drift matrix is not Hurwitz (max Re lambda = {0}); no steady state")]
    NoSteadyState(f64),

    #[error("singular linear system")]
    Singular,

    #[error("eigenvalue iteration failed to converge")]
    NoConvergence,

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("time step {dt} exceeds the stability bound {max}")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("empty table")]
    EmptyTable,
}

pub type Result<T> = std::result::Result<T, Error>;
