use thiserror::Error;

/// Errors raised by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("only defined symbolically: {0}")]
    SymbolicOnly(String),

    #[error("series did not converge within {terms} terms (z = {z})")]
    SeriesNonConvergence { terms: usize, z: f64 },

    #[error("series lost too much precision (cancellation ratio {ratio:e})")]
    SeriesCancellation { ratio: f64 },

    #[error("Laplace inversion failed at t = {t}: {reason}")]
    Inversion { t: f64, reason: String },

    #[error("quadrature did not converge (estimated error {error:e}, tolerance {tolerance:e})")]
    Quadrature { error: f64, tolerance: f64 },

    #[error("ill-posed Volterra system at node {node} (t = {t}): condition number {condition:e}")]
    IllPosed { node: usize, t: f64, condition: f64 },

    #[error("unrepresentable singular structure: {0}")]
    Unrepresentable(String),

    #[error(
        "the similarity ansatz does not apply to the Riemann-Liouville problem at nu = {nu} < 1/2"
    )]
    AnsatzExcluded { nu: f64 },

    #[error("no sign change of the root function on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("several roots bracketed: {0:?}")]
    AmbiguousRoot(Vec<(f64, f64)>),

    #[error("Newton iteration failed at step {step} (t = {t}): residuals {residuals:?}")]
    NewtonFailure {
        step: usize,
        t: f64,
        residuals: [f64; 2],
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
