use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};

/// Parameters of `E_{alpha, beta}` and of the density `f^{alpha, lambda}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MittagLefflerParams {
    pub alpha: f64,
    pub beta_ml: f64,
    pub lambda_ml: f64,
}

impl MittagLefflerParams {
    /// Density parameters `(alpha, lambda)`; `beta_ml` is set to `alpha`.
    pub fn density(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1)")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda_ml", format!("{lambda} must be positive")));
        }
        Ok(Self { alpha, beta_ml: alpha, lambda_ml: lambda })
    }
}

/// `1 / Gamma(x)`, exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Largest `|z|^(1/alpha)` for which the alternating series is summed directly.
/// The biggest term is then about `e^6` and at most three digits cancel.
const SERIES_SWITCH: f64 = 6.0;

/// `E_{alpha, beta}(z) = sum_n z^n / Gamma(alpha n + beta)` for real `z`.
pub fn mittag_leffler(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("{alpha} must be positive")));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid("beta_ml", format!("{beta} must be positive")));
    }
    if z.is_nan() {
        return Err(Error::invalid("z", "NaN argument"));
    }
    if z == 0.0 {
        return Ok(rgamma(beta));
    }
    if alpha == 1.0 && beta == 1.0 {
        return if z > 709.78 {
            Err(Error::Overflow { log10_magnitude: z / std::f64::consts::LN_10 })
        } else {
            Ok(z.exp())
        };
    }
    if z > 0.0 {
        return positive_series(alpha, beta, z);
    }
    if z.abs().powf(1.0 / alpha) <= SERIES_SWITCH || alpha > 1.0 {
        return alternating_series(alpha, beta, z);
    }
    if alpha == 1.0 {
        return unit_alpha_negative(beta, z);
    }
    negative_large(alpha, beta, z)
}

/// Series with all-positive terms, summed in log space.
fn positive_series(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    let lz = z.ln();
    let log_term = |n: usize| n as f64 * lz - ln_gamma(alpha * n as f64 + beta);
    let peak = (z.powf(1.0 / alpha) / alpha).ceil() as usize;
    let cap = 2 * peak + 400;
    let mut log_max = f64::NEG_INFINITY;
    let mut logs = Vec::with_capacity(cap);
    for n in 0..cap {
        let l = log_term(n);
        logs.push(l);
        log_max = log_max.max(l);
        if n > peak && l < log_max - 40.0 {
            break;
        }
    }
    let scaled: f64 = logs.iter().map(|l| (l - log_max).exp()).sum();
    let log_value = log_max + scaled.ln();
    if log_value > 709.78 {
        return Err(Error::Overflow { log10_magnitude: log_value / std::f64::consts::LN_10 });
    }
    Ok(log_value.exp())
}

/// Compensated (Neumaier) summation of the alternating series.
fn alternating_series(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    let lz = z.abs().ln();
    let peak = (z.abs().powf(1.0 / alpha) / alpha).ceil() as usize;
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut biggest = 0.0f64;
    let mut n = 0usize;
    loop {
        let arg = alpha * n as f64 + beta;
        let mag = (n as f64 * lz - ln_gamma(arg)).exp();
        let term = if n % 2 == 1 { -mag } else { mag };
        biggest = biggest.max(mag);
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        if n > peak && mag <= 1e-17 * (sum + comp).abs().max(1e-300) {
            break;
        }
        n += 1;
        if n > 5000 {
            return Err(Error::Accuracy(format!("series for E_{{{alpha},{beta}}}({z}) did not converge")));
        }
    }
    let value = sum + comp;
    let lost = biggest * f64::EPSILON * (n as f64).sqrt() / value.abs().max(1e-300);
    if lost > 1e-10 {
        return Err(Error::Accuracy(format!(
            "cancellation in the series for E_{{{alpha},{beta}}}({z}), relative error ~{lost:.1e}"
        )));
    }
    Ok(value)
}

/// Large negative argument with `alpha < 1`.
///
/// For `beta < 1 + alpha` the function is the real integral
/// `(1/pi) ∫_0^∞ u^(alpha-beta) e^-u N(u) / D(u) du` with
/// `N = u^alpha sin(pi(1-beta)) - z sin(pi(1-beta+alpha))` and
/// `D = u^(2 alpha) - 2 u^alpha z cos(pi alpha) + z^2`. Larger `beta` is brought
/// into that range with `E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z`.
fn negative_large(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if beta >= 1.0 + alpha {
        let lower = negative_large(alpha, beta - alpha, z)?;
        return Ok((lower - rgamma(beta - alpha)) / z);
    }
    let s1 = (PI * (1.0 - beta)).sin();
    let s2 = (PI * (1.0 - beta + alpha)).sin();
    let c = (PI * alpha).cos();
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let ua = u.powf(alpha);
        let num = ua * s1 - z * s2;
        let den = ua * ua - 2.0 * ua * z * c + z * z;
        u.powf(alpha - beta) * (-u).exp() * num / den
    };
    let tol = Tolerance { abs: 1e-18, rel: 1e-13, max_intervals: 4000 };
    let mut total = 0.0;
    for w in [0.0, 1.0, 8.0, 40.0, 750.0].windows(2) {
        total += integrate(integrand, w[0], w[1], tol)?;
    }
    Ok(total / PI)
}

/// `E_{1,beta}(z)` for large negative `z`, from
/// `E_{1,beta}(z) = (1/Gamma(beta)) ∫_0^1 exp(z (1 - w^(1/(beta-1)))) dw` when
/// `beta > 1` and `E_{1,beta}(z) = 1/Gamma(beta) + z E_{1,beta+1}(z)` otherwise.
fn unit_alpha_negative(beta: f64, z: f64) -> Result<f64> {
    if beta <= 1.0 {
        return Ok(rgamma(beta) + z * unit_alpha_negative(beta + 1.0, z)?);
    }
    let e = 1.0 / (beta - 1.0);
    let tol = Tolerance { abs: 1e-300, rel: 1e-13, max_intervals: 4000 };
    let v = integrate(|w| (z * (1.0 - w.powf(e))).exp(), 0.0, 1.0, tol)?;
    Ok(v * rgamma(beta))
}

/// Density `f(t) = lambda t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha)`.
pub fn ml_density(p: &MittagLefflerParams, t: f64) -> Result<f64> {
    let MittagLefflerParams { alpha, lambda_ml: lambda, .. } = MittagLefflerParams::density(p.alpha, p.lambda_ml)?;
    if t <= 0.0 {
        return Err(Error::invalid("t", "the density is singular at t = 0 and undefined below"));
    }
    Ok(lambda * t.powf(alpha - 1.0) * mittag_leffler(alpha, alpha, -lambda * t.powf(alpha))?)
}

/// `lambda E_{alpha,alpha}(-lambda u)`, the density written in `u = t^alpha`
/// without the singular factor.
fn density_core(alpha: f64, lambda: f64, u: f64) -> Result<f64> {
    Ok(lambda * mittag_leffler(alpha, alpha, -lambda * u)?)
}

fn cdf_piece(alpha: f64, lambda: f64, u0: f64, u1: f64) -> Result<f64> {
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_intervals: 2000 };
    let mut err = None;
    let v = integrate(
        |u| match density_core(alpha, lambda, u) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        u0,
        u1,
        tol,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(v / alpha),
    }
}

/// `F(t) = ∫_0^t f`, by quadrature after the substitution `u = s^alpha`.
pub fn ml_cdf(p: &MittagLefflerParams, t: f64) -> Result<f64> {
    let MittagLefflerParams { alpha, lambda_ml: lambda, .. } = MittagLefflerParams::density(p.alpha, p.lambda_ml)?;
    if t < 0.0 {
        return Err(Error::invalid("t", "negative time"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(cdf_piece(alpha, lambda, 0.0, t.powf(alpha))?.min(1.0))
}

/// `F` at every point of a sorted list, integrating only between neighbours.
pub fn ml_cdf_grid(p: &MittagLefflerParams, times: &[f64]) -> Result<Vec<f64>> {
    let MittagLefflerParams { alpha, lambda_ml: lambda, .. } = MittagLefflerParams::density(p.alpha, p.lambda_ml)?;
    if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times", "must be sorted and nonnegative"));
    }
    let mut out = Vec::with_capacity(times.len());
    let (mut acc, mut prev) = (0.0, 0.0);
    for &t in times {
        let u = t.powf(alpha);
        acc += cdf_piece(alpha, lambda, prev, u)?;
        prev = u;
        out.push(acc.min(1.0));
    }
    Ok(out)
}
