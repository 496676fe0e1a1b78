use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate, Tolerance};
use crate::{Error, Result};

/// One term `coefficient * rate * exp(-rate x)` of an exponential mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpComponent {
    pub coefficient: f64,
    pub rate: f64,
}

/// Shape of a kernel, normalised to unit mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "kebab-case")]
pub enum KernelShape {
    /// `sum_i c_i r_i exp(-r_i x)` with `sum_i c_i = 1`.
    ExponentialMixture { components: Vec<ExpComponent> },
    /// `alpha (1 + x)^-(1 + alpha)`.
    ShiftedPowerLaw { alpha: f64 },
}

/// A nonnegative excitation kernel `weight * shape(x)`; `weight` is its L1 norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFunction {
    #[serde(flatten)]
    pub shape: KernelShape,
    pub weight: f64,
}

impl KernelFunction {
    pub fn exponential(weight: f64, rate: f64) -> Result<Self> {
        Self::exponential_mixture(weight, vec![ExpComponent { coefficient: 1.0, rate }])
    }

    pub fn exponential_mixture(weight: f64, components: Vec<ExpComponent>) -> Result<Self> {
        let k = Self { shape: KernelShape::ExponentialMixture { components }, weight };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(weight: f64, alpha: f64) -> Result<Self> {
        let k = Self { shape: KernelShape::ShiftedPowerLaw { alpha }, weight };
        k.validate()?;
        Ok(k)
    }

    /// Checks the structural invariants: nonnegative weight, positive rates,
    /// unit mixture mass, pointwise nonnegativity, positive tail exponent.
    pub fn validate(&self) -> Result<()> {
        if !(self.weight >= 0.0) || !self.weight.is_finite() {
            return Err(Error::invalid("weight", format!("{} is not a finite nonnegative number", self.weight)));
        }
        match &self.shape {
            KernelShape::ExponentialMixture { components } => {
                if components.is_empty() {
                    return Err(Error::invalid("components", "empty exponential mixture"));
                }
                if let Some(c) = components.iter().find(|c| !(c.rate > 0.0) || !c.rate.is_finite()) {
                    return Err(Error::invalid("rate", format!("{} must be positive", c.rate)));
                }
                let mass: f64 = components.iter().map(|c| c.coefficient).sum();
                if (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("components", format!("coefficients sum to {mass}, expected 1")));
                }
                // a mixture with negative coefficients must still be a nonnegative function
                if components.iter().any(|c| c.coefficient < 0.0) {
                    let slowest = components
                        .iter()
                        .min_by(|a, b| a.rate.total_cmp(&b.rate))
                        .expect("non-empty");
                    if slowest.coefficient <= 0.0 || log_grid(1e-6, 1e6, 400).any(|x| self.eval(x) < 0.0) || self.eval(0.0) < 0.0 {
                        return Err(Error::invalid("components", "mixture takes negative values"));
                    }
                }
            }
            KernelShape::ShiftedPowerLaw { alpha } => {
                if !alpha.is_finite() {
                    return Err(Error::invalid("alpha", "must be finite"));
                }
                if *alpha <= 0.0 {
                    return Err(Error::Divergent(format!("power-law tail exponent {alpha} <= 0 has infinite mass")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        self.weight
            * match &self.shape {
                KernelShape::ExponentialMixture { components } => {
                    components.iter().map(|c| c.coefficient * c.rate * (-c.rate * x).exp()).sum()
                }
                KernelShape::ShiftedPowerLaw { alpha } => alpha * (1.0 + x).powf(-(1.0 + alpha)),
            }
    }

    /// `∫_x^∞ k(s) ds` in closed form.
    pub fn tail(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.weight
            * match &self.shape {
                KernelShape::ExponentialMixture { components } => {
                    components.iter().map(|c| c.coefficient * (-c.rate * x).exp()).sum()
                }
                KernelShape::ShiftedPowerLaw { alpha } => (1.0 + x).powf(-alpha),
            }
    }

    /// `∫_0^x k(s) ds` in closed form.
    pub fn cumulative(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        self.weight
            * match &self.shape {
                KernelShape::ExponentialMixture { components } => {
                    components.iter().map(|c| -c.coefficient * (-c.rate * x).exp_m1()).sum()
                }
                KernelShape::ShiftedPowerLaw { alpha } => -(-alpha * x.ln_1p()).exp_m1(),
            }
    }

    /// `∫ x k(x) dx`, infinite for power laws with exponent `<= 1`.
    pub fn first_moment(&self) -> f64 {
        self.weight
            * match &self.shape {
                KernelShape::ExponentialMixture { components } => {
                    components.iter().map(|c| c.coefficient / c.rate).sum()
                }
                KernelShape::ShiftedPowerLaw { alpha } if *alpha > 1.0 => 1.0 / (alpha - 1.0),
                KernelShape::ShiftedPowerLaw { .. } => f64::INFINITY,
            }
    }

    /// True when the kernel is non-increasing on `[0, ∞)`.
    pub fn is_non_increasing(&self) -> bool {
        match &self.shape {
            KernelShape::ExponentialMixture { components } => {
                components.iter().all(|c| c.coefficient >= 0.0)
                    || log_grid(1e-8, 1e4, 2000)
                        .collect::<Vec<_>>()
                        .windows(2)
                        .all(|w| self.eval(w[1]) <= self.eval(w[0]) * (1.0 + 1e-12))
            }
            KernelShape::ShiftedPowerLaw { .. } => true,
        }
    }

    pub fn power_law_alpha(&self) -> Option<f64> {
        match self.shape {
            KernelShape::ShiftedPowerLaw { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { shape: self.shape.clone(), weight: self.weight * factor }
    }
}

/// L1 norm of a kernel from its closed form.
pub fn l1_norm(k: &KernelFunction) -> Result<f64> {
    k.validate()?;
    Ok(match &k.shape {
        KernelShape::ExponentialMixture { components } => {
            k.weight * components.iter().map(|c| c.coefficient).sum::<f64>()
        }
        KernelShape::ShiftedPowerLaw { .. } => k.weight,
    })
}

/// L1 norm by adaptive quadrature, used to cross-check the closed forms.
pub fn l1_norm_quadrature(k: &KernelFunction) -> Result<f64> {
    k.validate()?;
    let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 20_000 };
    // [0, 1] directly, then x = 1 / u on [1, ∞) mapped to u in (0, 1]
    let head = integrate(|x| k.eval(x), 0.0, 1.0, tol)?;
    let tail = integrate(
        |u| if u <= 0.0 { 0.0 } else { k.eval(1.0 / u) / (u * u) },
        0.0,
        1.0,
        tol,
    )?;
    Ok(head + tail)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// A signed linear combination `sum_i s_i k_i(x)` of kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedKernel {
    pub terms: Vec<(f64, KernelFunction)>,
}

impl CombinedKernel {
    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(s, k)| s * k.eval(x)).sum()
    }

    /// `∫ f` (signed integral, not the absolute L1 norm).
    pub fn integral(&self) -> f64 {
        self.terms.iter().map(|(s, k)| s * k.weight).sum()
    }

    pub fn tail(&self, x: f64) -> f64 {
        self.terms.iter().map(|(s, k)| s * k.tail(x)).sum()
    }

    pub fn first_moment(&self) -> f64 {
        self.terms.iter().map(|(s, k)| s * k.first_moment()).sum()
    }

    pub fn is_non_increasing(&self) -> bool {
        if self.terms.iter().all(|(s, k)| *s >= 0.0 && k.is_non_increasing()) {
            return true;
        }
        let xs: Vec<f64> = std::iter::once(0.0).chain(log_grid(1e-8, 1e4, 2000)).collect();
        xs.windows(2).all(|w| self.eval(w[1]) <= self.eval(w[0]) + 1e-12 * self.eval(w[0]).abs())
    }
}
