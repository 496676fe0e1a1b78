//! Riemann-Liouville fractional integrals and derivatives on uniform grids.

use statrs::function::gamma::gamma;

use crate::path::PathGrid;
use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// Product-integration weights for piecewise-linear data:
/// `I^r f(t_n) = h^r / Gamma(r + 2) * sum_j a_{j,n} f_j`.
fn linear_weights(r: f64, n: usize) -> Vec<f64> {
    // w[k] = a_{n-k, n} for 1 <= k <= n - 1, w[0] = a_{n,n} = 1
    let p = r + 1.0;
    (0..n.max(1))
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                let k = k as f64;
                (k + 1.0).powf(p) + (k - 1.0).powf(p) - 2.0 * k.powf(p)
            }
        })
        .collect()
}

fn check_order(name: &'static str, r: f64, lo_open: bool) -> Result<()> {
    let ok = if lo_open { r > 0.0 && r <= 1.0 } else { (0.0..1.0).contains(&r) };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("order {r} out of range")))
    }
}

/// `I^r f` for `r` in `(0, 1]`, exact when `f` is piecewise linear on the grid.
pub fn fractional_integral(samples: &PathGrid, r: f64) -> Result<PathGrid> {
    check_order("r", r, true)?;
    let h = samples.uniform_step()?;
    let f = samples.values();
    let scale = h.powf(r) / gamma(r + 2.0);
    let n_max = f.len() - 1;
    let w = linear_weights(r, n_max + 1);
    let mut out = vec![0.0; f.len()];
    for n in 1..=n_max {
        let nf = n as f64;
        let first = (nf - 1.0).powf(r + 1.0) - (nf - 1.0 - r) * nf.powf(r);
        let mut acc = first * f[0] + f[n];
        for j in 1..n {
            acc += w[n - j] * f[j];
        }
        out[n] = scale * acc;
    }
    PathGrid::new(samples.times().to_vec(), out)
}

/// `D^r f = d/dt I^(1-r) f` for `r` in `[0, 1)`, with a first-order difference.
pub fn fractional_derivative(samples: &PathGrid, r: f64) -> Result<PathGrid> {
    check_order("r", r, false)?;
    let h = samples.uniform_step()?;
    let integral = fractional_integral(samples, 1.0 - r)?;
    let j = integral.values();
    let mut d: Vec<f64> = Vec::with_capacity(j.len());
    for n in 0..j.len() {
        let k = n.max(1);
        d.push((j[k] - j[k - 1]) / h);
    }
    PathGrid::new(samples.times().to_vec(), d)
}

/// `I^r f` for data of the form `f(s) = s^sigma g(s)` on a uniform grid starting
/// at 0, with `sigma > -1`.
///
/// `samples` holds `g`, including its limit at `s = 0`. `g` is interpolated
/// piecewise quadratically in the variable `u = s^kappa` (choose `kappa` so that
/// `g` is smooth in `u`; `kappa = 1` for ordinary data). The weight factors
/// `(t - s)^(r - 1)` and `s^sigma` are removed by substitution on the cells
/// adjacent to the singular points.
pub fn fractional_integral_singular(samples: &PathGrid, r: f64, sigma: f64, kappa: f64) -> Result<PathGrid> {
    check_order("r", r, true)?;
    if !(sigma > -1.0) {
        return Err(Error::invalid("sigma", format!("{sigma} must exceed -1")));
    }
    if !(kappa > 0.0) {
        return Err(Error::invalid("kappa", format!("{kappa} must be positive")));
    }
    let h = samples.uniform_step()?;
    if samples.times()[0].abs() > 1e-12 * h {
        return Err(Error::invalid("samples", "grid must start at 0"));
    }
    let g = samples.values();
    let n_pts = g.len();
    if n_pts < 3 {
        return Err(Error::invalid("samples", "need at least three samples"));
    }
    let times = samples.times();
    let u: Vec<f64> = times.iter().map(|t| t.max(0.0).powf(kappa)).collect();
    // quadratic through nodes (i, i+1, i+2) clamped to the grid
    let interp = |cell: usize, s: f64| -> f64 {
        let i = cell.min(n_pts - 3);
        let x = s.max(0.0).powf(kappa);
        let (x0, x1, x2) = (u[i], u[i + 1], u[i + 2]);
        g[i] * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
            + g[i + 1] * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
            + g[i + 2] * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1))
    };
    let gl = GaussLegendre::new(12);
    let ginv = 1.0 / gamma(r);
    let mut out = vec![0.0; n_pts];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let t = times[n];
        let mut acc = 0.0;
        for cell in 0..n {
            let (a, b) = (times[cell], times[cell + 1]);
            let at_zero = cell == 0;
            let at_t = cell + 1 == n;
            acc += match (at_zero, at_t) {
                (false, false) => gl.integrate(a, b, |s| (t - s).powf(r - 1.0) * s.powf(sigma) * interp(cell, s)),
                (true, false) => left_singular(&gl, r, sigma, t, a, b, |s| interp(cell, s)),
                (false, true) => right_singular(&gl, r, sigma, t, a, |s| interp(cell, s)),
                (true, true) => {
                    let m = 0.5 * (a + b);
                    left_singular(&gl, r, sigma, t, a, m, |s| interp(cell, s))
                        + right_singular(&gl, r, sigma, t, m, |s| interp(cell, s))
                }
            };
        }
        *slot = ginv * acc;
    }
    PathGrid::new(times.to_vec(), out)
}

/// `∫_0^b (t-s)^(r-1) s^sigma q(s) ds` with `w = s^(sigma+1)`.
fn left_singular(gl: &GaussLegendre, r: f64, sigma: f64, t: f64, a: f64, b: f64, q: impl Fn(f64) -> f64) -> f64 {
    debug_assert!(a == 0.0);
    let p = sigma + 1.0;
    gl.integrate(0.0, b.powf(p), |w| {
        let s = w.powf(1.0 / p);
        (t - s).powf(r - 1.0) * q(s)
    }) / p
}

/// `∫_a^t (t-s)^(r-1) s^sigma q(s) ds` with `v = (t-s)^r`.
fn right_singular(gl: &GaussLegendre, r: f64, sigma: f64, t: f64, a: f64, q: impl Fn(f64) -> f64) -> f64 {
    gl.integrate(0.0, (t - a).powf(r), |v| {
        let s = t - v.powf(1.0 / r);
        s.powf(sigma) * q(s)
    }) / r
}
