use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::params::{GenericRoughCirParams, HestonParams, RoughHestonParams};
use crate::path::uniform_times;
use crate::rng::SeedRecord;
use crate::quadrature::GaussLegendre;
use crate::special::{mittag_leffler, ml_cdf_grid, MittagLefflerParams};
use crate::{Error, PathGrid, Result};

/// `steps` equal steps on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub steps: usize,
    pub horizon: f64,
}

impl TimeGrid {
    pub fn new(steps: usize, horizon: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::invalid("steps", "need at least one step"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", format!("{horizon} must be positive")));
        }
        Ok(Self { steps, horizon })
    }

    /// Grid with step at most `h` covering `[0, horizon]`.
    pub fn with_step(h: f64, horizon: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::invalid("h", format!("{h} must be positive")));
        }
        Self::new(((horizon / h) - 1e-9).ceil().max(1.0) as usize, horizon)
    }

    /// `2^12` steps on `[0, 1]`.
    pub fn rough_default() -> Self {
        Self::new(1 << 12, 1.0).expect("valid")
    }

    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_times(self.steps + 1, self.horizon)
    }
}

/// `dX = kappa (theta - X) dt + xi sqrt(X) dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    pub kappa: f64,
    pub theta: f64,
    pub xi: f64,
    pub x0: f64,
}

impl From<&HestonParams> for CirParams {
    fn from(p: &HestonParams) -> Self {
        Self { kappa: p.kappa, theta: p.theta, xi: p.xi, x0: p.x0 }
    }
}

/// A price path together with its variance path on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPaths {
    pub price: PathGrid,
    pub variance: PathGrid,
}

fn gaussian_increments<R: Rng>(rng: &mut R, n: usize, h: f64) -> Vec<f64> {
    let s = h.sqrt();
    (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn check_fine(h: f64) -> Result<()> {
    if h > 1e-2 {
        Err(Error::invalid("h", format!("step {h} exceeds 1e-2")))
    } else {
        Ok(())
    }
}

/// Full-truncation Euler driven by the given Brownian increments; returns the
/// untruncated state at every node.
fn cir_states(p: &CirParams, h: f64, db: &[f64]) -> Vec<f64> {
    let mut x = p.x0;
    let mut out = Vec::with_capacity(db.len() + 1);
    out.push(x);
    for &d in db {
        let xp = x.max(0.0);
        x += p.kappa * (p.theta - xp) * h + p.xi * xp.sqrt() * d;
        out.push(x);
    }
    out
}

/// Full-truncation Euler for the CIR process; the output is `max(X, 0)`.
pub fn simulate_cir(p: &CirParams, h: f64, horizon: f64, seed: SeedRecord) -> Result<PathGrid> {
    check_fine(h)?;
    let grid = TimeGrid::with_step(h, horizon)?;
    let db = gaussian_increments(&mut seed.rng(), grid.steps, grid.step());
    let x = cir_states(p, grid.step(), &db);
    PathGrid::new(grid.times(), x.into_iter().map(|v| v.max(0.0)).collect())
}

/// Heston with `W = rho B + sqrt(1 - rho^2) B_perp`, `B` driving the variance.
pub fn simulate_heston(p: &HestonParams, grid: TimeGrid, seed: SeedRecord) -> Result<LimitPaths> {
    let h = grid.step();
    check_fine(h)?;
    if !(p.rho.abs() <= 1.0) {
        return Err(Error::invalid("rho", format!("{} is outside [-1, 1]", p.rho)));
    }
    let mut rng = seed.rng();
    let db = gaussian_increments(&mut rng, grid.steps, h);
    let dperp = gaussian_increments(&mut rng, grid.steps, h);
    let x = cir_states(&p.into(), h, &db);
    let rc = (1.0 - p.rho * p.rho).sqrt();
    let mut price = Vec::with_capacity(grid.steps + 1);
    let mut acc = 0.0;
    price.push(0.0);
    for k in 0..grid.steps {
        acc += p.price_scale * x[k].max(0.0).sqrt() * (p.rho * db[k] + rc * dperp[k]);
        price.push(acc);
    }
    let times = grid.times();
    Ok(LimitPaths {
        price: PathGrid::new(times.clone(), price)?,
        variance: PathGrid::new(times, x.into_iter().map(|v| v.max(0.0)).collect())?,
    })
}

/// Which of the two equivalent rough CIR equations is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoughCirForm {
    /// `V = I^alpha[lambda (theta - V)] + lambda nu I^alpha[sqrt(V) dB]`.
    Fractional,
    /// `V = theta F(t) + nu ∫ f(t - s) sqrt(V) dB`.
    MittagLeffler,
}

/// Volterra Euler scheme
///
/// ```text
/// V_n = base_n + sum_{m=1..n} (a_{n-m+1} d_m + b_{n-m+1} s_m dB_m)
/// ```
///
/// with drift integrand `d_m` and diffusion coefficient `s_m` frozen at
/// `t_{m-1}`. `a_j` is the kernel mass of the `j`-th cell back from `t_n`;
/// `b_j = sqrt(∫_cell K^2 / h)` matches the variance of the stochastic
/// convolution on that cell, which cell means underestimate near the
/// singularity. Only the square root sees the positive part of `V`; the drift
/// uses `V` itself, as the Mittag-Leffler form does implicitly.
#[derive(Debug, Clone)]
pub struct RoughCirScheme {
    params: GenericRoughCirParams,
    form: RoughCirForm,
    grid: TimeGrid,
    base: Vec<f64>,
    drift_w: Vec<f64>,
    noise_w: Vec<f64>,
}

/// `∫ f^2` of the Mittag-Leffler density over each grid cell, in `u = t^(2 alpha - 1)`
/// where the integrand `lambda^2 E_{alpha,alpha}(-lambda t^alpha)^2 / (2 alpha - 1)` is smooth.
fn ml_square_masses(alpha: f64, lambda: f64, times: &[f64]) -> Result<Vec<f64>> {
    let e = 2.0 * alpha - 1.0;
    let gl = GaussLegendre::new(8);
    let mut out = Vec::with_capacity(times.len().saturating_sub(1));
    let mut err = None;
    for w in times.windows(2) {
        let v = gl.integrate(w[0].powf(e), w[1].powf(e), |u| {
            let z = -lambda * u.powf(alpha / e);
            match mittag_leffler(alpha, alpha, z) {
                Ok(m) => m * m,
                Err(x) => {
                    err.get_or_insert(x);
                    0.0
                }
            }
        });
        if let Some(x) = err.take() {
            return Err(x);
        }
        out.push(lambda * lambda / e * v);
    }
    Ok(out)
}

impl RoughCirScheme {
    pub fn new(params: GenericRoughCirParams, form: RoughCirForm, grid: TimeGrid) -> Result<Self> {
        params.validate()?;
        let n = grid.steps;
        let h = grid.step();
        let a = params.alpha;
        let e = 2.0 * a - 1.0;
        let (base, drift_w, noise_w) = match form {
            RoughCirForm::Fractional => {
                let c = h.powf(a) / gamma(a + 1.0);
                let drift = (1..=n).map(|j| c * ((j as f64).powf(a) - ((j - 1) as f64).powf(a))).collect();
                let c2 = h.powf(e) / (e * gamma(a).powi(2) * h);
                let noise = (1..=n).map(|j| (c2 * ((j as f64).powf(e) - ((j - 1) as f64).powf(e))).sqrt()).collect();
                (vec![0.0; n + 1], drift, noise)
            }
            RoughCirForm::MittagLeffler => {
                let times = grid.times();
                let f = ml_cdf_grid(&MittagLefflerParams::density(a, params.lambda_g)?, &times)?;
                let noise = ml_square_masses(a, params.lambda_g, &times)?.into_iter().map(|m| (m / h).sqrt()).collect();
                (f.iter().map(|v| params.theta_g * v).collect(), Vec::new(), noise)
            }
        };
        Ok(Self { params, form, grid, base, drift_w, noise_w })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn form(&self) -> RoughCirForm {
        self.form
    }

    /// Runs the scheme on given Brownian increments (one per step); values
    /// are `max(V, 0)`.
    pub fn run(&self, db: &[f64]) -> Result<PathGrid> {
        let n = self.grid.steps;
        if db.len() != n {
            return Err(Error::invalid("db", format!("{} increments for {n} steps", db.len())));
        }
        let GenericRoughCirParams { lambda_g: l, theta_g: th, nu_g: nu, .. } = self.params;
        let (drifts, sigma) = match self.form {
            RoughCirForm::Fractional => (true, l * nu),
            RoughCirForm::MittagLeffler => (false, nu),
        };
        let mut d = Vec::with_capacity(if drifts { n } else { 0 });
        let mut s = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n + 1);
        v.push(self.base[0]);
        for k in 1..=n {
            let prev = v[k - 1];
            s.push(sigma * prev.max(0.0).sqrt() * db[k - 1]);
            let mut acc = self.base[k];
            // index 0 of the weights pairs with the newest term
            for (w, sm) in self.noise_w[..k].iter().zip(s.iter().rev()) {
                acc += w * sm;
            }
            if drifts {
                d.push(l * (th - prev));
                for (w, dm) in self.drift_w[..k].iter().zip(d.iter().rev()) {
                    acc += w * dm;
                }
            }
            v.push(acc);
        }
        PathGrid::new(self.grid.times(), v.into_iter().map(|x| x.max(0.0)).collect())
    }

    pub fn simulate(&self, seed: SeedRecord) -> Result<PathGrid> {
        let db = gaussian_increments(&mut seed.rng(), self.grid.steps, self.grid.step());
        self.run(&db)
    }
}

pub fn simulate_rough_cir(
    params: GenericRoughCirParams,
    form: RoughCirForm,
    grid: TimeGrid,
    seed: SeedRecord,
) -> Result<PathGrid> {
    RoughCirScheme::new(params, form, grid)?.simulate(seed)
}

/// Rough Heston with `B = (B1 + beta B2) / sqrt(1 + beta^2)` driving the variance
/// and `W = (B1 - B2) / sqrt(2)` driving the price.
pub fn simulate_rough_heston(p: &RoughHestonParams, grid: TimeGrid, seed: SeedRecord) -> Result<LimitPaths> {
    let scheme = RoughCirScheme::new(p.variance(), RoughCirForm::Fractional, grid)?;
    rough_heston_with(&scheme, p, seed)
}

/// Same as [`simulate_rough_heston`] reusing a prepared variance scheme.
pub fn rough_heston_with(scheme: &RoughCirScheme, p: &RoughHestonParams, seed: SeedRecord) -> Result<LimitPaths> {
    let grid = scheme.grid();
    let h = grid.step();
    let mut rng = seed.rng();
    let b1 = gaussian_increments(&mut rng, grid.steps, h);
    let b2 = gaussian_increments(&mut rng, grid.steps, h);
    let nb = (1.0 + p.beta * p.beta).sqrt();
    let db: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| (x + p.beta * y) / nb).collect();
    let variance = scheme.run(&db)?;
    let mut price = Vec::with_capacity(grid.steps + 1);
    let mut acc = 0.0;
    price.push(0.0);
    for k in 0..grid.steps {
        acc += p.price_scale * variance.values()[k].sqrt() * (b1[k] - b2[k]) / std::f64::consts::SQRT_2;
        price.push(acc);
    }
    Ok(LimitPaths { price: PathGrid::new(grid.times(), price)?, variance })
}
