//! Heston and rough Heston limits: parameter maps from the tick model and
//! path schemes.

mod params;
mod schemes;

pub use params::{
    heston_params_from_micro, leverage_rho, price_scale, rough_params_from_micro, GenericRoughCirParams,
    HestonParams, RoughHestonParams,
};
pub use schemes::{
    rough_heston_with, simulate_cir, simulate_heston, simulate_rough_cir, simulate_rough_heston, CirParams, LimitPaths,
    RoughCirForm, RoughCirScheme, TimeGrid,
};
