//! Mittag-Leffler functions, fractional calculus on grids and exact fBm.

mod fbm;
mod fractional;
mod mittag_leffler;

pub use fbm::{fbm_covariance, simulate_fbm, FbmGenerator, MAX_FBM_POINTS};
pub use fractional::{fractional_derivative, fractional_integral, fractional_integral_singular};
pub use mittag_leffler::{ml_cdf, ml_cdf_grid, ml_density, mittag_leffler, rgamma, MittagLefflerParams};
