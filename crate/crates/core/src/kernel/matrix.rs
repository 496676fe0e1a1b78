use serde::{Deserialize, Serialize};

use super::function::{l1_norm, CombinedKernel, KernelFunction};
use super::sequence::AsymptoticSequence;
use crate::{Error, Result};

/// Tolerance on `|phi1|_1 + beta |phi2|_1 = 1` when building a spec.
pub const CRITICALITY_TOLERANCE: f64 = 1e-6;

/// The structured kernel matrix
///
/// ```text
/// phi = [[phi1,        beta phi2             ],
///        [phi2,        phi1 + (beta - 1) phi2]]
/// ```
///
/// Row `i` holds the kernels feeding intensity `i` (0 = up, 1 = down) from
/// past up (column 0) and down (column 1) jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrixSpec {
    pub phi1: KernelFunction,
    pub phi2: KernelFunction,
    pub beta: f64,
}

/// Checks criticality and returns the structured spec.
pub fn build_kernel_matrix(phi1: KernelFunction, phi2: KernelFunction, beta: f64) -> Result<KernelMatrixSpec> {
    let spec = KernelMatrixSpec { phi1, phi2, beta };
    spec.check()?;
    Ok(spec)
}

impl KernelMatrixSpec {
    /// `|phi1|_1 + beta |phi2|_1`, the spectral radius of `∫ phi`.
    pub fn total_norm(&self) -> Result<f64> {
        Ok(l1_norm(&self.phi1)? + self.beta * l1_norm(&self.phi2)?)
    }

    pub fn criticality_residual(&self) -> Result<f64> {
        Ok(1.0 - self.total_norm()?)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.beta >= 1.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta", format!("{} must be a finite number >= 1", self.beta)));
        }
        let total = self.total_norm()?;
        let residual = 1.0 - total;
        if residual.abs() > CRITICALITY_TOLERANCE {
            return Err(Error::Criticality { total, residual });
        }
        Ok(())
    }

    /// The four kernels `[[phi11, phi12], [phi21, phi22]]` at lag `x`.
    pub fn eval(&self, x: f64) -> [[f64; 2]; 2] {
        let a = self.phi1.eval(x);
        let b = self.phi2.eval(x);
        [[a, self.beta * b], [b, a + (self.beta - 1.0) * b]]
    }

    /// Matrix of L1 norms.
    pub fn norm_matrix(&self) -> Result<[[f64; 2]; 2]> {
        let a = l1_norm(&self.phi1)?;
        let b = l1_norm(&self.phi2)?;
        Ok([[a, self.beta * b], [b, a + (self.beta - 1.0) * b]])
    }

    /// Spectral radius of the norm matrix, computed from the 2x2 eigenvalues.
    pub fn spectral_radius(&self) -> Result<f64> {
        let m = self.norm_matrix()?;
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        Ok((0.5 * tr + disc).abs().max((0.5 * tr - disc).abs()))
    }

    pub fn lambda1(&self) -> CombinedKernel {
        CombinedKernel { terms: vec![(1.0, self.phi1.clone()), (self.beta, self.phi2.clone())] }
    }

    pub fn lambda2(&self) -> CombinedKernel {
        CombinedKernel { terms: vec![(1.0, self.phi1.clone()), (-1.0, self.phi2.clone())] }
    }

    /// `|phi1|_1 - |phi2|_1`, the mass of `lambda2`.
    pub fn lambda2_norm(&self) -> Result<f64> {
        Ok(l1_norm(&self.phi1)? - l1_norm(&self.phi2)?)
    }

    pub fn uses_power_law(&self) -> bool {
        self.phi1.power_law_alpha().is_some() || self.phi2.power_law_alpha().is_some()
    }
}

/// Heavy-tail constants: `alpha x^alpha ∫_x^∞ lambda1 -> c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub alpha: f64,
    pub c: f64,
}

/// Eigen-structure of the kernel matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// `phi1 + beta phi2`
    pub lambda1: CombinedKernel,
    /// `phi1 - phi2`, possibly signed
    pub lambda2: CombinedKernel,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    /// `∫ x lambda1(x) dx` (light regime).
    pub m: Option<f64>,
    /// Tail constants (heavy regime).
    pub tail: Option<TailConstants>,
    /// `v1 / |v1|`.
    pub e1: [f64; 2],
}

pub fn eigen_structure(spec: &KernelMatrixSpec, seq: &AsymptoticSequence) -> Result<SpectralData> {
    spec.check()?;
    let beta = spec.beta;
    let lambda1 = spec.lambda1();
    let norm = (1.0 + beta * beta).sqrt();
    let mut out = SpectralData {
        lambda2: spec.lambda2(),
        v1: [1.0, beta],
        v2: [1.0, -1.0],
        m: None,
        tail: None,
        e1: [1.0 / norm, beta / norm],
        lambda1,
    };
    match seq {
        AsymptoticSequence::Light { .. } => {
            let m = out.lambda1.first_moment();
            if !m.is_finite() {
                return Err(Error::Divergent("first moment of lambda1 is infinite in the light regime".into()));
            }
            out.m = Some(m);
        }
        AsymptoticSequence::Heavy { alpha, .. } => {
            out.tail = Some(TailConstants { alpha: *alpha, c: tail_constant(&out.lambda1, *alpha)? });
        }
    }
    Ok(out)
}

/// `lim alpha x^alpha ∫_x^∞ k` from the closed-form tails of each term.
fn tail_constant(k: &CombinedKernel, alpha: f64) -> Result<f64> {
    let mut c = 0.0;
    for (s, term) in &k.terms {
        if term.weight == 0.0 || *s == 0.0 {
            continue;
        }
        match term.power_law_alpha() {
            Some(a) if (a - alpha).abs() <= 1e-12 => c += alpha * s * term.weight,
            Some(a) if a < alpha => {
                return Err(Error::TailUndefined(format!("a power-law term with exponent {a} < {alpha}")))
            }
            _ => {}
        }
    }
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::TailUndefined(format!("lambda1 without an x^-{alpha} tail")))
    }
}

/// Outcome of [`validate_assumptions`]. Purely advisory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub criticality_total: f64,
    pub criticality_residual: f64,
    pub criticality_ok: bool,
    pub lambda1_non_increasing: bool,
    /// Light regime only.
    pub first_moment: Option<f64>,
    pub first_moment_finite: Option<bool>,
    /// Heavy regime only: `alpha x^alpha ∫_x^∞ lambda1` at the probe points.
    pub tail_probe: Option<Vec<(f64, f64)>>,
    pub tail_drift: Option<f64>,
    pub tail_ok: Option<bool>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.criticality_ok
            && self.lambda1_non_increasing
            && self.first_moment_finite.unwrap_or(true)
            && self.tail_ok.unwrap_or(true)
    }
}

/// Probe points for the tail limit.
const TAIL_PROBES: [f64; 3] = [1e4, 1e5, 1e6];

pub fn validate_assumptions(spec: &KernelMatrixSpec, seq: &AsymptoticSequence) -> AssumptionReport {
    let total = spec.phi1.weight + spec.beta * spec.phi2.weight;
    let residual = 1.0 - total;
    let lambda1 = spec.lambda1();
    let mut report = AssumptionReport {
        criticality_total: total,
        criticality_residual: residual,
        criticality_ok: residual.abs() <= CRITICALITY_TOLERANCE
            && spec.phi1.validate().is_ok()
            && spec.phi2.validate().is_ok()
            && spec.beta >= 1.0,
        lambda1_non_increasing: lambda1.is_non_increasing(),
        first_moment: None,
        first_moment_finite: None,
        tail_probe: None,
        tail_drift: None,
        tail_ok: None,
    };
    match seq {
        AsymptoticSequence::Light { .. } => {
            let m = lambda1.first_moment();
            report.first_moment = Some(m);
            report.first_moment_finite = Some(m.is_finite());
        }
        AsymptoticSequence::Heavy { alpha, .. } => {
            let probe: Vec<(f64, f64)> =
                TAIL_PROBES.iter().map(|&x| (x, alpha * x.powf(*alpha) * lambda1.tail(x))).collect();
            let last = probe[probe.len() - 1].1;
            let drift = probe.iter().map(|p| (p.1 - last).abs()).fold(0.0, f64::max) / last.abs();
            report.tail_ok = Some(last > 1e-12 && drift < 0.01);
            report.tail_drift = Some(drift);
            report.tail_probe = Some(probe);
        }
    }
    report
}
