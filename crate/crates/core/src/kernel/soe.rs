//! Sum-of-exponentials approximation of power-law kernels.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::function::{log_grid, ExpComponent, KernelFunction, KernelShape};
use super::matrix::KernelMatrixSpec;
use crate::{Error, Result};

/// A fitted mixture and its measured sup error on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoeFit {
    pub kernel: KernelFunction,
    pub sup_error: f64,
    pub horizon: f64,
}

/// Nonnegative least squares `min |A x - b|, x >= 0` (Lawson-Hanson).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm() * b.norm().max(1.0);
    for _outer in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        if w[j] <= tol {
            break;
        }
        passive[j] = true;
        for _inner in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&idx);
            let s_p = sub
                .svd(true, true)
                .solve(b, 1e-14)
                .map_err(|e| Error::Accuracy(format!("least squares failed: {e}")))?;
            if s_p.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = s_p[k];
                }
                break;
            }
            let mut step = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if s_p[k] <= 0.0 {
                    step = step.min(x[j] / (x[j] - s_p[k]));
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += step * (s_p[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    Ok(x)
}

fn fit_terms(alpha: f64, horizon: f64, terms: usize) -> Result<Vec<ExpComponent>> {
    let rates: Vec<f64> = log_grid(0.1 / horizon, 50.0 * (1.0 + alpha), terms).collect();
    let xs: Vec<f64> = std::iter::once(0.0).chain(log_grid(1e-3, horizon, 12 * terms)).collect();
    let g = |x: f64| alpha * (1.0 + x).powf(-(1.0 + alpha));
    let a = DMatrix::from_fn(xs.len(), terms, |i, j| rates[j] * (-rates[j] * xs[i]).exp() / g(xs[i]));
    let b = DVector::from_element(xs.len(), 1.0);
    let c = nnls(&a, &b)?;
    let mass: f64 = c.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Accuracy("sum-of-exponentials fit collapsed".into()));
    }
    Ok(rates
        .iter()
        .zip(c.iter())
        .filter(|(_, &c)| c > 0.0)
        .map(|(&rate, &c)| ExpComponent { coefficient: c / mass, rate })
        .collect())
}

/// Largest absolute difference between two kernels on a dense grid of `[0, horizon]`.
pub fn sup_difference(a: &KernelFunction, b: &KernelFunction, horizon: f64) -> f64 {
    std::iter::once(0.0)
        .chain(log_grid(1e-4, horizon, 4000))
        .chain((0..=2000).map(|i| horizon * i as f64 / 2000.0))
        .map(|x| (a.eval(x) - b.eval(x)).abs())
        .fold(0.0, f64::max)
}

impl KernelFunction {
    /// Exponential-mixture approximation with the same L1 norm. Exponential
    /// kernels are returned unchanged. Adds terms until the sup error on
    /// `[0, horizon]` is at most `tolerance`.
    pub fn sum_of_exponentials(&self, horizon: f64, tolerance: f64) -> Result<SoeFit> {
        let alpha = match self.shape {
            KernelShape::ExponentialMixture { .. } => {
                return Ok(SoeFit { kernel: self.clone(), sup_error: 0.0, horizon })
            }
            KernelShape::ShiftedPowerLaw { alpha } => alpha,
        };
        let mut best: Option<SoeFit> = None;
        for terms in (8..=64).step_by(8) {
            let kernel = KernelFunction::exponential_mixture(self.weight, fit_terms(alpha, horizon, terms)?)?;
            let sup_error = sup_difference(&kernel, self, horizon);
            let fit = SoeFit { kernel, sup_error, horizon };
            if sup_error <= tolerance {
                return Ok(fit);
            }
            if best.as_ref().is_none_or(|b| sup_error < b.sup_error) {
                best = Some(fit);
            }
        }
        let best = best.expect("at least one fit");
        Err(Error::Accuracy(format!(
            "sum-of-exponentials sup error {:.3e} above tolerance {tolerance:.3e}",
            best.sup_error
        )))
    }
}

impl KernelMatrixSpec {
    /// Replaces both kernels by sum-of-exponential fits; returns the spec and
    /// the larger of the two certified sup errors.
    pub fn with_sum_of_exponentials(&self, horizon: f64, tolerance: f64) -> Result<(KernelMatrixSpec, f64)> {
        let f1 = self.phi1.sum_of_exponentials(horizon, tolerance)?;
        let f2 = self.phi2.sum_of_exponentials(horizon, tolerance)?;
        let err = f1.sup_error.max(f2.sup_error);
        Ok((KernelMatrixSpec { phi1: f1.kernel, phi2: f2.kernel, beta: self.beta }, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_recovers_nonnegative_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let b = DVector::from_vec(vec![-1.0, 2.0, 1.0]);
        let x = nnls(&a, &b).unwrap();
        assert_eq!(x[0], 0.0);
        assert!(x[1] > 0.0);
    }

    #[test]
    fn power_law_fit_is_accurate_and_mass_preserving() {
        let k = KernelFunction::power_law(0.4, 0.6).unwrap();
        let fit = k.sum_of_exponentials(500.0, 1e-3).unwrap();
        assert!(fit.sup_error <= 1e-3);
        assert!((fit.kernel.weight - 0.4).abs() < 1e-15);
        assert!(fit.kernel.validate().is_ok());
        assert!(fit.kernel.is_non_increasing());
    }

    #[test]
    fn exponential_passes_through() {
        let k = KernelFunction::exponential(0.4, 1.0).unwrap();
        let fit = k.sum_of_exponentials(100.0, 1e-9).unwrap();
        assert_eq!(fit.kernel, k);
    }
}
