//! Discrete solution of the renewal equation `psi = a phi + a phi * psi`.
//!
//! The trapezoidal convolution makes `psi_n` appear on both sides only through
//! the `phi_0 psi_n` end term, so the discrete system is solved exactly by
//! marching forward in `n` with one small linear solve per node.

use super::matrix::KernelMatrixSpec;
use crate::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

/// Minimal algebra needed by the marching solver.
pub trait Block: Copy {
    fn zero() -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn scale(self, s: f64) -> Self;
    /// Solves `(I - c A) x = b`.
    fn solve_shifted(a: Self, c: f64, b: Self) -> Result<Self>;
    fn max_abs(self) -> f64;
}

impl Block for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn solve_shifted(a: Self, c: f64, b: Self) -> Result<Self> {
        let d = 1.0 - c * a;
        if d.abs() < 1e-300 {
            return Err(Error::Accuracy("singular trapezoid end term".into()));
        }
        Ok(b / d)
    }
    fn max_abs(self) -> f64 {
        self.abs()
    }
}

impl Block for Mat2 {
    fn zero() -> Self {
        [[0.0; 2]; 2]
    }
    fn add(self, o: Self) -> Self {
        [[self[0][0] + o[0][0], self[0][1] + o[0][1]], [self[1][0] + o[1][0], self[1][1] + o[1][1]]]
    }
    fn sub(self, o: Self) -> Self {
        self.add(o.scale(-1.0))
    }
    fn mul(self, o: Self) -> Self {
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = self[i][0] * o[0][j] + self[i][1] * o[1][j];
            }
        }
        r
    }
    fn scale(self, s: f64) -> Self {
        [[self[0][0] * s, self[0][1] * s], [self[1][0] * s, self[1][1] * s]]
    }
    fn solve_shifted(a: Self, c: f64, b: Self) -> Result<Self> {
        let m = [[1.0 - c * a[0][0], -c * a[0][1]], [-c * a[1][0], 1.0 - c * a[1][1]]];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::Accuracy("singular trapezoid end term".into()));
        }
        let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
        Ok(inv.mul(b))
    }
    fn max_abs(self) -> f64 {
        self.iter().flatten().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

/// Solves `psi = a phi + a phi * psi` on the grid `x_n = n h`, `n < len(phi)`,
/// given the kernel samples `phi[n] = phi(n h)`.
pub fn solve_renewal<B: Block>(phi: &[B], a_t: f64, h: f64) -> Result<Vec<B>> {
    if !(a_t < 1.0) {
        return Err(Error::ResolventDiverges { a_t });
    }
    if !(h > 0.0) {
        return Err(Error::invalid("h", "grid step must be positive"));
    }
    let n = phi.len();
    let mut psi: Vec<B> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(psi);
    }
    if a_t == 0.0 {
        return Ok(vec![B::zero(); n]);
    }
    psi.push(phi[0].scale(a_t));
    for k in 1..n {
        let mut acc = phi[k].mul(psi[0]).scale(0.5);
        for j in 1..k {
            acc = acc.add(phi[k - j].mul(psi[j]));
        }
        let rhs = phi[k].scale(a_t).add(acc.scale(a_t * h));
        psi.push(B::solve_shifted(phi[0], 0.5 * a_t * h, rhs)?);
    }
    Ok(psi)
}

/// Trapezoidal `(f * g)(x_n)` on a uniform grid.
pub fn trapezoid_convolution<B: Block>(f: &[B], g: &[B], h: f64) -> Vec<B> {
    let n = f.len().min(g.len());
    (0..n)
        .map(|k| {
            if k == 0 {
                return B::zero();
            }
            let mut acc = f[k].mul(g[0]).add(f[0].mul(g[k])).scale(0.5);
            for j in 1..k {
                acc = acc.add(f[k - j].mul(g[j]));
            }
            acc.scale(h)
        })
        .collect()
}

/// `max_n |(psi * phi_T)(x_n) - (psi(x_n) - phi_T(x_n))|` with `phi_T = a phi`.
pub fn wiener_hopf_residual<B: Block>(phi: &[B], psi: &[B], a_t: f64, h: f64) -> f64 {
    let phi_t: Vec<B> = phi.iter().map(|p| p.scale(a_t)).collect();
    let conv = trapezoid_convolution(psi, &phi_t, h);
    conv.iter()
        .zip(psi.iter().zip(&phi_t))
        .map(|(c, (p, f))| c.sub(p.sub(*f)).max_abs())
        .fold(0.0, f64::max)
}

/// Matrix resolvent of `a_T phi` on `n` nodes spaced by `h`.
pub fn resolvent_psi(spec: &KernelMatrixSpec, a_t: f64, h: f64, n: usize) -> Result<Vec<Mat2>> {
    if !(a_t < 1.0) {
        return Err(Error::ResolventDiverges { a_t });
    }
    let phi: Vec<Mat2> = (0..n).map(|k| spec.eval(k as f64 * h)).collect();
    solve_renewal(&phi, a_t, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel_matrix, KernelFunction};

    #[test]
    fn zero_level_gives_zero() {
        let phi = vec![1.0; 10];
        assert!(solve_renewal(&phi, 0.0, 0.1).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_critical_level() {
        assert!(matches!(solve_renewal(&[1.0], 1.0, 0.1), Err(Error::ResolventDiverges { .. })));
    }

    #[test]
    fn scalar_exponential_closed_form() {
        let (a, c, g, h) = (0.9, 1.0, 1.0, 1e-3);
        let n = 5001;
        let phi: Vec<f64> = (0..n).map(|k| c * g * (-g * k as f64 * h).exp()).collect();
        let psi = solve_renewal(&phi, a, h).unwrap();
        let err = psi
            .iter()
            .enumerate()
            .map(|(k, p)| (p - a * c * g * (-g * (1.0 - a * c) * k as f64 * h).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        assert!(wiener_hopf_residual(&phi, &psi, a, h) < 1e-8);
    }

    #[test]
    fn matrix_resolvent_diagonalises_along_v1() {
        let spec = build_kernel_matrix(
            KernelFunction::exponential(0.4, 1.0).unwrap(),
            KernelFunction::exponential(0.2, 1.0).unwrap(),
            3.0,
        )
        .unwrap();
        let (a, h) = (0.8, 1e-2);
        let psi = resolvent_psi(&spec, a, h, 400).unwrap();
        // lambda1 = e^{-x}, so v1^T psi = a e^{-(1-a)x} v1^T up to O(h^2)
        for (k, p) in psi.iter().enumerate() {
            let x = k as f64 * h;
            let exact = a * (-(1.0 - a) * x).exp();
            let row0 = p[0][0] + 3.0 * p[1][0];
            let row1 = p[0][1] + 3.0 * p[1][1];
            assert!((row0 - exact).abs() < 1e-4, "{k} {row0} {exact}");
            assert!((row1 - 3.0 * exact).abs() < 3e-4);
        }
    }
}
