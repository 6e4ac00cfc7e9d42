pub mod compute;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod mimo;
pub mod montecarlo;
pub mod propagation;
pub mod quad;
pub mod scenario;
pub mod specfun;
pub mod tradeoff;
pub mod units;

pub use error::{Error, Result};
pub use scenario::NetworkScenario;
