//! Deterministic statistics used by the WIGI indicator reports: correlation,
//! contingency testing, linear and exponential fitting, and logistic regression.
//!
//! All routines are pure functions over slices; identical inputs give
//! bit-identical outputs.

mod chi2;
mod correlation;
mod error;
mod expfit;
mod logistic;
mod ols;
pub mod special;

pub use chi2::{chi_squared, ChiSquareResult};
pub use correlation::{average_ranks, pearson, spearman, CorrelationResult};
pub use error::StatsError;
pub use expfit::{fit_exponential, solve_parity_year, ExpFit, ExpParams};
pub use logistic::{
    design_matrix, log_likelihood, logistic_fit, score, Coefficient, LogitFit, LogitOptions,
};
pub use ols::{ols, OlsFit};
