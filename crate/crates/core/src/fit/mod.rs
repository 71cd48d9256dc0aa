//! Log-polynomial models of hull points: fitting, goodness of fit, 95%
//! coefficient bounds, degree selection and cross-codec comparison.

use thiserror::Error;

mod compare;
mod poly;
mod sweep;

pub use compare::{common_bitrate_grid, compare_codec_models, pearson, ModelComparison};
pub use poly::{
    confidence_bounds, evaluate_model, fit_model, goodness_of_fit, horner, normalize_abscissa,
    polyfit, r_squared, residuals, t_quantile_975, FitOptions, PolyModel, MAX_DEGREE, MIN_DEGREE,
};
pub use sweep::{degree_sweep, select_degree, DegreeSweep, DegreeSweepRow, SWEEP_MIN_POINTS};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FitError {
    #[error("degree {0} outside the supported range 1..=8")]
    Degree(u32),
    #[error("{n} points leave no residual degrees of freedom for {p} coefficients")]
    DegreesOfFreedom { n: usize, p: usize },
    #[error("ill-conditioned fit: {0}")]
    Conditioning(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("range error: {0}")]
    Range(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T, E = FitError> = std::result::Result<T, E>;
