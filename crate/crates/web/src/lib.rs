//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every function returns a flat `Float64Array`; layouts are given per function.

use hawkes_scaling::hawkes::{microscopic_price, rescale_light, simulate, Brackets};
use hawkes_scaling::kernel::{build_kernel_matrix, eigen_structure, AsymptoticSequence, KernelFunction, KernelMatrixSpec};
use hawkes_scaling::limit::{heston_params_from_micro, leverage_rho, simulate_heston, HestonParams, TimeGrid};
use hawkes_scaling::rng::SeedRecord;
use hawkes_scaling::special::{ml_cdf_grid, ml_density, MittagLefflerParams};
use hawkes_scaling::Result;
use wasm_bindgen::prelude::*;

fn js(e: hawkes_scaling::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn light_spec(w1: f64, beta: f64) -> Result<KernelMatrixSpec> {
    build_kernel_matrix(KernelFunction::exponential(w1, 1.0)?, KernelFunction::exponential((1.0 - w1) / beta, 1.0)?, beta)
}

fn heston(w1: f64, beta: f64, lambda: f64, mu: f64) -> Result<(KernelMatrixSpec, AsymptoticSequence, HestonParams)> {
    let spec = light_spec(w1, beta)?;
    let seq = AsymptoticSequence::Light { lambda, mu };
    let p = heston_params_from_micro(&spec, &seq, &eigen_structure(&spec, &seq)?)?;
    Ok((spec, seq, p))
}

/// Mittag-Leffler law with parameters `(alpha, lambda)` on `points` times in `(0, t_max]`.
/// Layout: `[t, density, cdf]` repeated.
#[wasm_bindgen]
pub fn ml_table(alpha: f64, lambda: f64, t_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    let p = MittagLefflerParams::density(alpha, lambda).map_err(js)?;
    let times: Vec<f64> = (1..=points).map(|k| t_max * k as f64 / points as f64).collect();
    let cdf = ml_cdf_grid(&p, &times).map_err(js)?;
    let mut out = Vec::with_capacity(3 * points);
    for (t, f) in times.iter().zip(cdf) {
        out.extend([*t, ml_density(&p, *t).map_err(js)?, f]);
    }
    Ok(out)
}

/// Heston parameters implied by the exponential micro model.
/// Layout: `[kappa, theta, xi, rho, price_scale]`.
#[wasm_bindgen]
pub fn heston_params(w1: f64, beta: f64, lambda: f64, mu: f64) -> std::result::Result<Vec<f64>, JsError> {
    let (_, _, p) = heston(w1, beta, lambda, mu).map_err(js)?;
    Ok(vec![p.kappa, p.theta, p.xi, p.rho, p.price_scale])
}

/// One Heston path on `[0, 1]`. Layout: `[t, price, variance]` repeated.
#[wasm_bindgen]
pub fn heston_path(w1: f64, beta: f64, lambda: f64, mu: f64, steps: usize, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    let (_, _, p) = heston(w1, beta, lambda, mu).map_err(js)?;
    let paths = simulate_heston(&p, TimeGrid::new(steps, 1.0).map_err(js)?, SeedRecord::new(seed, 0)).map_err(js)?;
    let mut out = Vec::with_capacity(3 * paths.price.len());
    for ((t, x), v) in paths.price.times().iter().zip(paths.price.values()).zip(paths.variance.values()) {
        out.extend([*t, *x, *v]);
    }
    Ok(out)
}

/// Simulates the nearly critical tick model over `horizon` and returns
/// `[ww, bb, wb, rho, events]` followed by the rescaled price as `[t, price]` pairs.
#[wasm_bindgen]
pub fn micro_path(w1: f64, beta: f64, lambda: f64, mu: f64, horizon: f64, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    let spec = light_spec(w1, beta).map_err(js)?;
    let seq = AsymptoticSequence::Light { lambda, mu };
    let stream = simulate(&spec, &seq, horizon, SeedRecord::new(seed, 0)).map_err(js)?;
    let b = Brackets::from_stream(&stream, beta);
    let price = rescale_light(&microscopic_price(&stream), horizon);
    let mut out = vec![b.ww, b.bb, b.wb, leverage_rho(beta), stream.len() as f64];
    for (t, x) in price.times().iter().zip(price.values()) {
        out.extend([*t, *x]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts() {
        assert_eq!(ml_table(0.7, 1.0, 2.0, 10).unwrap().len(), 30);
        let p = heston_params(0.4, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(p[1], 4.0);
        assert_eq!(heston_path(0.4, 3.0, 1.0, 1.0, 200, 1).unwrap().len(), 3 * 201);
        let m = micro_path(0.4, 3.0, 1.0, 1.0, 100.0, 2).unwrap();
        assert!(m[4] > 0.0 && (m.len() - 5) % 2 == 0);
    }
}
