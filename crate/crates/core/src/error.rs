use thiserror::Error;

/// Errors produced by the library.
///
/// Two broad classes matter to callers: problems with the requested
/// configuration (bad parameters, malformed text specs, geometry mismatches)
/// and genuine numerical failures (loss of positive definiteness,
/// non-convergent series, spectra outside their guaranteed range).
/// [`Error::is_config`] distinguishes them so a front end can map each class
/// to its own exit code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("matrix is not positive definite: smallest eigenvalue {lambda_min:e} is below 1e-10")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("matrix is not symmetric: largest asymmetry {residual:e} exceeds 1e-12")]
    NotSymmetric { residual: f64 },

    #[error("matrix violates its declared band structure: entry at distance {distance} (> {half_width}) is {value:e}")]
    BandViolation {
        distance: usize,
        half_width: usize,
        value: f64,
    },

    #[error(
        "reduced spectrum eigenvalue {value} fell below 1 - 1e-8; \
         this indicates eigensolver trouble, not physics"
    )]
    SpectrumBelowOne { value: f64 },

    #[error("factorization of a reduced matrix failed; the reduction lost positive definiteness")]
    ReductionFactorization,

    #[error("tail series did not converge within {cap} terms (ratio q = {q})")]
    SeriesNotConverged { q: f64, cap: usize },

    #[error("zeta series diverges: exponent {s} is not > 1")]
    ZetaDiverges { s: f64 },

    #[error("no crossing temperature found below T = {t_max:e}")]
    NoCrossing { t_max: f64 },

    #[error("computed value for {0} is not finite")]
    NonFinite(String),

    #[error("integer overflow while computing {0}")]
    Overflow(String),
}

impl Error {
    /// True for errors caused by the requested configuration rather than by
    /// numerics. Front ends use this to pick exit codes.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
