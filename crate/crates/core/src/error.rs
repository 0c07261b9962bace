use thiserror::Error;

/// Errors surfaced by the solvers and observable extractors.
///
/// Numerical failure modes carry enough context (frequency, residual,
/// iteration count) to diagnose grid or tolerance problems without rerunning.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("frequency grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("singular matrix while solving Dyson equation at omega = {omega}: {context}")]
    SingularMatrix { omega: f64, context: String },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}, tol {tol:.3e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("consistency violation: {0}")]
    ConsistencyViolation(String),

    #[error("unphysical population n = {value:.6e} at band {band}, site {site}")]
    UnphysicalPopulation { band: usize, site: usize, value: f64 },

    #[error("photon cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("time step too large: {0}")]
    StepTooLarge(String),

    #[error("spectral peaks not resolved: {0}")]
    PeaksNotResolved(String),

    #[error("no spatial transfer detected within the evolved horizon (off-site weight stayed below {threshold})")]
    NoTransferDetected { threshold: f64 },

    #[error("inverted band populations: N1 - N2 = {delta:.6e} < 0")]
    InvertedPopulations { delta: f64 },

    #[error("correlation horizon insufficient: |C| decayed to {final_fraction:.3e} of its peak by tau = {t_final}, need < {required:.1e}")]
    InsufficientHorizon {
        t_final: f64,
        final_fraction: f64,
        required: f64,
    },

    #[error("steady state is not unique: {0}")]
    DegenerateNullSpace(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
}
