use thiserror::Error;

use crate::heis::HPoint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("field evaluation produced a non-finite jet at {at:?}")]
    NonFinite { at: HPoint },

    #[error("degenerate Levi form: |f| = {modulus} >= 1 at {at:?}")]
    DegenerateLevi { modulus: f64, at: HPoint },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("quadrature failed at node {index} ({at:?}): value {value}")]
    Quadrature { index: usize, at: HPoint, value: f64 },

    #[error("{solver} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("contraction diverged: factors {factors:?}")]
    Divergence { factors: Vec<f64> },

    #[error("singular Gram matrix (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit needs at least {needed} points, got {got}")]
    FitDegenerate { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
