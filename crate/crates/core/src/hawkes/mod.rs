//! Exact simulation of the two-sided tick process and the observables built
//! from its paths.

mod observables;
mod simulate;
mod state;
mod stream;

pub use observables::{
    brownian_jumps, compensator_martingale, embedded_brownians, heavy_price_factor, microscopic_price,
    rescale_heavy, rescale_light, rescaled_intensity, Brackets, EmbeddedBrownians, HeavyPrice, RescaledIntensity,
    RESCALED_POINTS,
};
pub use simulate::{
    effective_spec, expected_event_count, simulate, simulate_scaled, simulate_with, KernelMode, SimEvent,
    SimSummary, SimulationOptions,
};
pub use state::IntensityState;
pub use stream::{EventStream, Mark};
