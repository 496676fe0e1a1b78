//! Simulation and verification toolkit for a Hawkes-driven tick price model.
//!
//! Upward and downward one-tick price moves are the two components of a
//! bi-dimensional, nearly critical Hawkes process. After rescaling, the price
//! behaves like a Heston model when the excitation kernels are light tailed and
//! like a rough Heston model when they are heavy tailed. Both limits carry a
//! leverage correlation `(1 - beta) / sqrt(2 (1 + beta^2))` generated by the
//! bid/ask liquidity asymmetry `beta`.
//!
//! Layout:
//!
//! - [`kernel`]: kernel families, the structured kernel matrix, spectral data,
//!   scaling sequences and the Wiener-Hopf resolvent.
//! - [`hawkes`]: exact thinning simulation and the observables built on it.
//! - [`special`]: Mittag-Leffler functions, fractional operators, fBm.
//! - [`limit`]: Heston / rough Heston parameter maps and path schemes.
//! - [`estimators`]: realized variance, leverage, brackets, Hurst, KS.
//! - [`experiment`]: config-driven Monte Carlo runs used by the CLI.

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod hawkes;
pub mod kernel;
pub mod limit;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use path::PathGrid;
