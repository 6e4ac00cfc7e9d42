use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what}: no convergence after {iterations} iterations (partial estimate {estimate:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("{what}: quadrature failed on {panels} panels (estimate {estimate:e}, error bound {error:e})")]
    Quadrature {
        what: &'static str,
        panels: usize,
        estimate: f64,
        error: f64,
    },

    #[error("rate {rate:e} bit/s exceeds the CPU feasibility bound {max_rate:e} bit/s")]
    Infeasible { rate: f64, max_rate: f64 },

    #[error("no intersection: {0}")]
    NoIntersection(String),

    #[error("inversion truncated before the integrand decayed (partial value {partial:e}, tail bound {tail_bound:e})")]
    Truncation { partial: f64, tail_bound: f64 },

    #[error("{what}: value {value:e} left [0, 1] by {residual:e}")]
    Residual {
        what: &'static str,
        value: f64,
        residual: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
