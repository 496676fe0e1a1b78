//! Realized variance, leverage, brackets, Hurst exponent and KS tests.

use serde::{Deserialize, Serialize};

use crate::{Error, PathGrid, Result};

/// Two-sided 95% normal quantile used for reported intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A point estimate with its standard error; intervals are `point ± z stderr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub point: f64,
    pub stderr: f64,
    pub n: usize,
}

impl EstimateWithCI {
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.point - z * self.stderr, self.point + z * self.stderr)
    }

    /// Mean and standard error of the mean.
    pub fn mean_of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { point: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { point: mean, stderr, n }
    }
}

/// JSON record emitted for every estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRecord {
    pub estimator: String,
    pub params: serde_json::Value,
    pub point: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed_manifest: serde_json::Value,
}

impl EstimatorRecord {
    pub fn new(estimator: &str, params: serde_json::Value, e: EstimateWithCI, seed_manifest: serde_json::Value) -> Self {
        Self { estimator: estimator.into(), params, point: e.point, stderr: e.stderr, n: e.n, seed_manifest }
    }
}

fn window_points(path: &PathGrid, window: f64) -> Result<usize> {
    let h = path.uniform_step()?;
    if !(window > 0.0) {
        return Err(Error::Estimator(format!("window {window} must be positive")));
    }
    let p = (window / h).round() as usize;
    if p == 0 || p >= path.len() {
        return Err(Error::Estimator(format!("window {window} does not fit a grid of step {h} and {} points", path.len())));
    }
    Ok(p)
}

/// Sum of squared increments over consecutive windows of length `window`,
/// indexed by window start.
pub fn realized_variance(path: &PathGrid, window: f64) -> Result<PathGrid> {
    let p = window_points(path, window)?;
    let (t, v) = (path.times(), path.values());
    let n = (path.len() - 1) / p;
    let mut times = Vec::with_capacity(n);
    let mut rv = Vec::with_capacity(n);
    for k in 0..n {
        let s = k * p;
        times.push(t[s]);
        rv.push((s..s + p).map(|i| (v[i + 1] - v[i]).powi(2)).sum());
    }
    PathGrid::new(times, rv)
}

/// Pearson correlation with the delta-method standard error `(1 - r^2) / sqrt(n - 3)`.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<EstimateWithCI> {
    let n = x.len();
    if n != y.len() || n < 4 {
        return Err(Error::Estimator(format!("correlation needs two samples of equal length >= 4, got {n} and {}", y.len())));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Estimator("correlation of a constant sample".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(EstimateWithCI { point: r, stderr: (1.0 - r * r) / ((n - 3) as f64).sqrt(), n })
}

/// Window returns paired with the change of realized variance from that
/// window to the next.
pub fn leverage_pairs(price: &PathGrid, window: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let p = window_points(price, window)?;
    let rv = realized_variance(price, window)?;
    let v = price.values();
    let r = rv.values();
    let mut returns = Vec::new();
    let mut dvol = Vec::new();
    for k in 0..r.len().saturating_sub(1) {
        returns.push(v[(k + 1) * p] - v[k * p]);
        dvol.push(r[k + 1] - r[k]);
    }
    Ok((returns, dvol))
}

/// Correlation between window returns and next-window realized-variance changes.
pub fn leverage_correlation(price: &PathGrid, window: f64) -> Result<EstimateWithCI> {
    let (r, d) = leverage_pairs(price, window)?;
    correlation(&r, &d)
}

/// Mean of per-path leverage correlations; the error is across paths.
pub fn leverage_correlation_ensemble(prices: &[PathGrid], window: f64) -> Result<EstimateWithCI> {
    let mut rs = Vec::with_capacity(prices.len());
    for p in prices {
        match leverage_correlation(p, window) {
            Ok(e) => rs.push(e.point),
            // flat paths carry no information
            Err(Error::Estimator(_)) => {}
            Err(e) => return Err(e),
        }
    }
    if rs.len() < 2 {
        return Err(Error::Estimator("fewer than two informative paths".into()));
    }
    Ok(EstimateWithCI::mean_of(&rs))
}

/// `sum Δx Δy` over the union of both time grids, each path read as a step
/// function.
pub fn quadratic_covariation(x: &PathGrid, y: &PathGrid) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Ok(0.0);
    }
    if x.times() == y.times() {
        let (a, b) = (x.values(), y.values());
        return Ok(a.windows(2).zip(b.windows(2)).map(|(p, q)| (p[1] - p[0]) * (q[1] - q[0])).sum());
    }
    let mut t: Vec<f64> = x.times().iter().chain(y.times()).copied().collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let (x0, y0) = (x.values()[0], y.values()[0]);
    let mut acc = 0.0;
    let (mut px, mut py) = (x0, y0);
    for &s in &t {
        let (vx, vy) = (x.value_at(s, x0), y.value_at(s, y0));
        acc += (vx - px) * (vy - py);
        px = vx;
        py = vy;
    }
    Ok(acc)
}

/// Default moment orders for [`hurst_moment_scaling`].
pub const HURST_MOMENTS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

/// Moment-scaling Hurst estimate: `log E|X_{t+Δ} - X_t|^q = q H log Δ + c_q`,
/// fitted jointly over `q` with one intercept per order. `lags` are in grid
/// steps.
pub fn hurst_moment_scaling(paths: &[PathGrid], qs: &[f64], lags: &[usize]) -> Result<EstimateWithCI> {
    if paths.len() < 2 {
        return Err(Error::Estimator("need at least two paths".into()));
    }
    if lags.len() < 2 || qs.is_empty() {
        return Err(Error::Estimator("need two lags and one moment order".into()));
    }
    let &max_lag = lags.iter().max().expect("nonempty");
    let &min_lag = lags.iter().min().expect("nonempty");
    if min_lag == 0 {
        return Err(Error::Estimator("lags must be positive".into()));
    }
    let h = paths[0].uniform_step()?;
    for p in paths {
        if p.len() <= max_lag {
            return Err(Error::Estimator(format!("path of {} points is shorter than lag {max_lag}", p.len())));
        }
        if (p.uniform_step()? - h).abs() > 1e-9 * h {
            return Err(Error::Estimator("paths use different grids".into()));
        }
    }
    // rows: (q index, log lag, log moment / q)
    let mut rows = Vec::with_capacity(qs.len() * lags.len());
    for (qi, &q) in qs.iter().enumerate() {
        for &lag in lags {
            let (mut sum, mut count) = (0.0, 0usize);
            for p in paths {
                let v = p.values();
                for i in 0..v.len() - lag {
                    sum += (v[i + lag] - v[i]).abs().powf(q);
                }
                count += v.len() - lag;
            }
            let m = sum / count as f64;
            if !(m > 0.0) {
                return Err(Error::Estimator(format!("zero moment at q = {q}, lag {lag}")));
            }
            rows.push((qi, (lag as f64 * h).ln(), m.ln() / q));
        }
    }
    // common slope with per-q intercepts: demean within each q
    let mut means = vec![(0.0, 0.0, 0usize); qs.len()];
    for &(qi, x, y) in &rows {
        means[qi].0 += x;
        means[qi].1 += y;
        means[qi].2 += 1;
    }
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(qi, x, y) in &rows {
        let (mx, my) = (means[qi].0 / means[qi].2 as f64, means[qi].1 / means[qi].2 as f64);
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
    }
    let slope = sxy / sxx;
    let mut sse = 0.0;
    for &(qi, x, y) in &rows {
        let (mx, my) = (means[qi].0 / means[qi].2 as f64, means[qi].1 / means[qi].2 as f64);
        sse += (y - my - slope * (x - mx)).powi(2);
    }
    let dof = rows.len().saturating_sub(qs.len() + 1).max(1);
    let stderr = (sse / dof as f64 / sxx).sqrt();
    Ok(EstimateWithCI { point: slope, stderr, n: paths.len() })
}

/// Log-spaced integer lags from `lo` to `hi` (inclusive, deduplicated).
pub fn log_lags(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    let (a, b) = ((lo.max(1) as f64).ln(), (hi.max(lo.max(1)) as f64).ln());
    let mut out: Vec<usize> = (0..count.max(2))
        .map(|i| (a + (b - a) * i as f64 / (count.max(2) - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

/// Kolmogorov-Smirnov outcome at the 1% level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub critical_1pct: f64,
    pub p_value: f64,
    pub reject_1pct: bool,
}

/// `c(0.01)` of the asymptotic Kolmogorov distribution.
const KS_C_1PCT: f64 = 1.627_624_1;

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // theta-function form converges fast for small x
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
        let s: f64 = (0..20).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_result(d: f64, ne: f64) -> KsResult {
    let root = ne.sqrt();
    let p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
    let critical_1pct = KS_C_1PCT / root;
    KsResult { statistic: d, critical_1pct, p_value, reject_1pct: d > critical_1pct }
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::Estimator("empty sample".into()));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Estimator("NaN in sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample KS statistic with the asymptotic 1% critical value.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    Ok(ks_result(d, (n * m) as f64 / (n + m) as f64))
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    let a = sorted(a)?;
    let n = a.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(ks_result(d, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    use crate::rng::stream_rng;

    #[test]
    fn realized_variance_of_lines() {
        let line = PathGrid::uniform(101, 1.0, |t| 3.0 * t);
        let rv = realized_variance(&line, 0.1).unwrap();
        assert_eq!(rv.len(), 10);
        for v in rv.values() {
            assert!((v - 10.0 * (0.03f64).powi(2)).abs() < 1e-14);
        }
        let flat = PathGrid::uniform(101, 1.0, |_| 2.0);
        assert!(realized_variance(&flat, 0.1).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn anti_correlated_inputs() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let r = correlation(&x, &y).unwrap();
        assert!((r.point + 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariation_on_mixed_grids() {
        let x = PathGrid::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(quadratic_covariation(&x, &x).unwrap(), 1.0 + 4.0);
        let y = PathGrid::new(vec![0.0, 1.5], vec![0.0, 2.0]).unwrap();
        // increments meet only at t = 1.5 where x does not move
        assert_eq!(quadratic_covariation(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for x in [1.0, 1.1, 1.18, 1.3] {
            let y = (-std::f64::consts::PI.powi(2) / (8.0 * x * x)).exp();
            let small: f64 = (0..20).map(|k| y.powi((2 * k + 1) * (2 * k + 1))).sum();
            let a = 1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * small;
            let b: f64 = 2.0 * (1..100).map(|k| (if k % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * (k * k) as f64 * x * x).exp()).sum::<f64>();
            assert!((a - b).abs() < 1e-12);
        }
        assert!((kolmogorov_survival(KS_C_1PCT) - 0.01).abs() < 1e-6);
    }

    #[test]
    fn ks_identical_and_shifted() {
        let mut rng = stream_rng(5, 0);
        let a: Vec<f64> = (0..1000).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..1000).map(|_| rng.sample::<f64, _>(StandardNormal) + 1.0).collect();
        assert_eq!(ks_distance(&a, &a).unwrap().statistic, 0.0);
        assert!(ks_distance(&a, &b).unwrap().reject_1pct);
    }
}
