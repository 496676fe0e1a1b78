//! Exact fractional Brownian motion on a uniform grid of `[0, 1]`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::path::{uniform_times, PathGrid};
use crate::rng::SeedRecord;
use crate::{Error, Result};

/// Largest grid the dense factorisation accepts.
pub const MAX_FBM_POINTS: usize = 1 << 14;

/// `Cov(X_s, X_t) = (s^2H + t^2H - |t - s|^2H) / 2`.
pub fn fbm_covariance(h: f64, s: f64, t: f64) -> f64 {
    let e = 2.0 * h;
    0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e))
}

/// Cholesky factor of the fBm covariance, reusable across samples.
#[derive(Debug, Clone)]
pub struct FbmGenerator {
    hurst: f64,
    times: Vec<f64>,
    factor: DMatrix<f64>,
}

impl FbmGenerator {
    /// Grid `t_k = k / (n - 1)`, `k = 0..n`, with `X_0 = 0`.
    pub fn new(hurst: f64, n: usize) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid("hurst", format!("{hurst} is outside (0, 1)")));
        }
        if !(2..=MAX_FBM_POINTS).contains(&n) {
            return Err(Error::invalid("n", format!("{n} points (need 2..={MAX_FBM_POINTS})")));
        }
        let times = uniform_times(n, 1.0);
        let m = n - 1;
        let cov = DMatrix::from_fn(m, m, |i, j| fbm_covariance(hurst, times[i + 1], times[j + 1]));
        let factor = match cov.clone().cholesky() {
            Some(c) => c.unpack(),
            None => {
                let jitter = 1e-12 * cov.diagonal().max();
                let bumped = cov + DMatrix::identity(m, m) * jitter;
                bumped
                    .cholesky()
                    .ok_or_else(|| Error::Cholesky(format!("fBm covariance (H = {hurst}, n = {n}) not positive definite after jitter {jitter:.1e}")))?
                    .unpack()
            }
        };
        Ok(Self { hurst, times, factor })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PathGrid {
        let m = self.times.len() - 1;
        let z = DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let x = &self.factor * z;
        let values = std::iter::once(0.0).chain(x.iter().copied()).collect();
        PathGrid::new(self.times.clone(), values).expect("grid is sorted")
    }
}

/// One fBm path with `n` points on `[0, 1]`.
pub fn simulate_fbm(hurst: f64, n: usize, seed: SeedRecord) -> Result<PathGrid> {
    Ok(FbmGenerator::new(hurst, n)?.sample(&mut seed.rng()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_case_has_independent_increments() {
        let g = FbmGenerator::new(0.5, 101).unwrap();
        let mut rng = SeedRecord::new(3, 0).rng();
        let mut sq = 0.0;
        let mut count = 0.0;
        for _ in 0..200 {
            let p = g.sample(&mut rng);
            for w in p.values().windows(2) {
                sq += (w[1] - w[0]).powi(2);
                count += 1.0;
            }
        }
        let dt = 0.01;
        let mean = sq / count;
        // Var of (dX)^2 is 2 dt^2
        let se = (2.0f64).sqrt() * dt / count.sqrt();
        assert!((mean - dt).abs() < 4.0 * se, "{mean}");
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(FbmGenerator::new(1.0, 10).is_err());
        assert!(FbmGenerator::new(0.3, 1).is_err());
        assert!(FbmGenerator::new(0.3, MAX_FBM_POINTS + 1).is_err());
    }

    #[test]
    fn seeded_paths_are_reproducible() {
        let a = simulate_fbm(0.1, 64, SeedRecord::new(1, 2)).unwrap();
        let b = simulate_fbm(0.1, 64, SeedRecord::new(1, 2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values()[0], 0.0);
    }
}
