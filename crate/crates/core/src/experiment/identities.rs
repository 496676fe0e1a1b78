//! Deterministic identities checked alongside the Monte Carlo rows.

use crate::kernel::resolvent::{solve_renewal, wiener_hopf_residual};
use crate::quadrature::GaussLegendre;
use crate::special::{fractional_integral_singular, mittag_leffler, ml_cdf_grid, MittagLefflerParams};
use crate::{Error, PathGrid, Result};

/// `max_z |∫_0^∞ f(s) e^{-zs} ds - lambda / (lambda + z^alpha)|` for the
/// Mittag-Leffler density `f`.
///
/// In `u = s^alpha` the integral is `(lambda/alpha) ∫ E_{alpha,alpha}(-lambda u) exp(-z u^(1/alpha)) du`;
/// it is evaluated by composite Gauss-Legendre on dyadic panels, with the
/// Mittag-Leffler values shared across `z`.
pub fn ml_laplace_residual(alpha: f64, lambda: f64, zs: &[f64]) -> Result<f64> {
    MittagLefflerParams::density(alpha, lambda)?;
    let z_min = zs.iter().copied().fold(f64::INFINITY, f64::min);
    if !(z_min > 0.0) {
        return Err(Error::invalid("z", "Laplace arguments must be positive"));
    }
    let u_max = (45.0 / z_min).powf(alpha) * 2.0;
    let mut edges = vec![0.0, 1.0 / 256.0];
    while *edges.last().expect("nonempty") < u_max {
        let next = edges.last().expect("nonempty") * 2.0;
        edges.push(next);
    }
    let gl = GaussLegendre::new(24);
    let mut nodes = Vec::new();
    for w in edges.windows(2) {
        let mut err = None;
        gl.integrate(w[0], w[1], |u| {
            match mittag_leffler(alpha, alpha, -lambda * u) {
                Ok(e) => nodes.push((u, e)),
                Err(x) => {
                    err.get_or_insert(x);
                }
            }
            0.0
        });
        if let Some(x) = err {
            return Err(x);
        }
    }
    // the same rule again, now weighting the cached values
    let mut worst: f64 = 0.0;
    for &z in zs {
        let mut k = 0;
        let mut total = 0.0;
        for w in edges.windows(2) {
            total += gl.integrate(w[0], w[1], |u| {
                let (_, e) = nodes[k];
                k += 1;
                e * (-z * u.powf(1.0 / alpha)).exp()
            });
        }
        let value = lambda / alpha * total;
        worst = worst.max((value - lambda / (lambda + z.powf(alpha))).abs());
    }
    Ok(worst)
}

/// `sup_t |I^{1-alpha} f(t) - lambda (1 - F(t))|` on the grid `h, 2h, .., 1`.
pub fn fractional_identity_residual(alpha: f64, lambda: f64, h: f64) -> Result<f64> {
    let p = MittagLefflerParams::density(alpha, lambda)?;
    let n = (1.0 / h).round() as usize + 1;
    let mut err = None;
    let g = PathGrid::uniform(n, 1.0, |t| match mittag_leffler(alpha, alpha, -lambda * t.powf(alpha)) {
        Ok(e) => lambda * e,
        Err(x) => {
            err.get_or_insert(x);
            0.0
        }
    });
    if let Some(x) = err {
        return Err(x);
    }
    let lhs = fractional_integral_singular(&g, 1.0 - alpha, alpha - 1.0, alpha)?;
    let cdf = ml_cdf_grid(&p, g.times())?;
    Ok(lhs.values().iter().zip(&cdf).skip(1).map(|(l, f)| (l - lambda * (1.0 - f)).abs()).fold(0.0, f64::max))
}

/// For `phi(x) = e^{-x}` and `a = 0.9` the resolvent is `a e^{-(1-a) x}`.
/// Returns the sup error against that and the discrete Wiener-Hopf residual.
pub fn exponential_resolvent_residuals(h: f64, horizon: f64) -> Result<(f64, f64)> {
    let a = 0.9;
    let n = (horizon / h).round() as usize + 1;
    let phi: Vec<f64> = (0..n).map(|k| (-(k as f64) * h).exp()).collect();
    let psi = solve_renewal(&phi, a, h)?;
    let err = psi
        .iter()
        .enumerate()
        .map(|(k, p)| (p - a * (-(1.0 - a) * k as f64 * h).exp()).abs())
        .fold(0.0, f64::max);
    Ok((err, wiener_hopf_residual(&phi, &psi, a, h)))
}
