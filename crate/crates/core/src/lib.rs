//! Exponential–generalized truncated logarithmic (EGTL) lifetime
//! distributions.
//!
//! The crate evaluates the family (density, distribution, hazard, moments,
//! quantiles, sampling), estimates its parameters by direct maximum
//! likelihood, EM, the method of moments and posterior means, compares
//! estimators by Monte Carlo, and tests fits with the Kolmogorov–Smirnov
//! statistic against gamma and Weibull baselines.

pub mod distribution;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod io;
pub mod quadrature;
pub mod roots;
pub mod series;
pub mod simulation;
pub mod special;

pub use distribution::{a_norm, EgtlParams, YTransform};
pub use error::{EgtlError, Result};
pub use estimation::{Dataset, FitResult, Method};
pub use series::SeriesControl;
