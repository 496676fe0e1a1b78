use serde::{Deserialize, Serialize};

use super::state::IntensityState;
use super::stream::{EventStream, Mark};
use crate::kernel::{AsymptoticSequence, KernelMatrixSpec};
use crate::path::uniform_times;
use crate::quadrature::GaussLegendre;
use crate::{Error, PathGrid, Result};

/// Points of every rescaled grid on `[0, 1]`.
pub const RESCALED_POINTS: usize = 1000;

/// `P_t = N_t^+ - N_t^-` sampled just after each event.
pub fn microscopic_price(s: &EventStream) -> PathGrid {
    let mut p = 0.0;
    let values = s
        .marks()
        .iter()
        .map(|m| {
            p += m.sign();
            p
        })
        .collect();
    PathGrid::new(s.times().to_vec(), values).expect("event times are sorted")
}

/// `t -> P_{tT} / T` on the uniform rescaled grid.
pub fn rescale_light(p: &PathGrid, horizon: f64) -> PathGrid {
    PathGrid::uniform(RESCALED_POINTS, 1.0, |t| p.value_at(t * horizon, 0.0) / horizon)
}

/// `sqrt((1 - a_T) / (mu T^alpha))`.
pub fn heavy_price_factor(seq: &AsymptoticSequence, horizon: f64) -> Result<f64> {
    match *seq {
        AsymptoticSequence::Heavy { alpha, mu, .. } => {
            seq.validate()?;
            Ok((seq.one_minus_a(horizon) / (mu * horizon.powf(alpha))).sqrt())
        }
        AsymptoticSequence::Light { .. } => Err(Error::invalid("regime", "heavy rescaling needs a heavy sequence")),
    }
}

/// Heavy-tail rescaled price and its time integral.
#[derive(Debug, Clone, PartialEq)]
pub struct HeavyPrice {
    pub factor: f64,
    pub price: PathGrid,
    pub integrated: PathGrid,
}

pub fn rescale_heavy(p: &PathGrid, horizon: f64, seq: &AsymptoticSequence) -> Result<HeavyPrice> {
    let factor = heavy_price_factor(seq, horizon)?;
    let grid = uniform_times(RESCALED_POINTS, 1.0);
    let (times, values) = (p.times(), p.values());
    let mut price = Vec::with_capacity(grid.len());
    let mut integrated = Vec::with_capacity(grid.len());
    // ∫_0^{tT} P_u du swept once over the events
    let (mut k, mut acc, mut last_t, mut level) = (0, 0.0, 0.0, 0.0);
    for &t in &grid {
        let u = t * horizon;
        while k < times.len() && times[k] <= u {
            acc += level * (times[k] - last_t);
            last_t = times[k];
            level = values[k];
            k += 1;
        }
        price.push(factor * level);
        integrated.push(factor / horizon * (acc + level * (u - last_t)));
    }
    Ok(HeavyPrice {
        factor,
        price: PathGrid::new(grid.clone(), price)?,
        integrated: PathGrid::new(grid, integrated)?,
    })
}

/// State of a replay at one time: post-event intensity, compensator and counts.
#[derive(Debug, Clone, Copy)]
struct ReplayPoint {
    intensity: [f64; 2],
    compensator: [f64; 2],
    counts: [f64; 2],
}

/// Walks the stream through an [`IntensityState`] and reports at each of
/// `sample_times` (sorted, original units).
fn replay(s: &EventStream, spec: &KernelMatrixSpec, sample_times: &[f64], mut f: impl FnMut(usize, ReplayPoint)) -> Result<()> {
    let mut st = IntensityState::new(spec, s.scaling())?;
    let mut comp = [0.0; 2];
    let mut counts = [0.0; 2];
    let mut k = 0;
    let (times, marks) = (s.times(), s.marks());
    for (i, &g) in sample_times.iter().enumerate() {
        while k < times.len() && times[k] <= g {
            let d = st.integral_to(times[k]);
            comp[0] += d[0];
            comp[1] += d[1];
            st.advance(times[k]);
            st.jump(marks[k] == Mark::Up);
            counts[(marks[k] == Mark::Down) as usize] += 1.0;
            k += 1;
        }
        let d = st.integral_to(g);
        f(i, ReplayPoint { intensity: st.intensity_at(g), compensator: [comp[0] + d[0], comp[1] + d[1]], counts });
    }
    Ok(())
}

fn check_scaling(s: &EventStream, seq: &AsymptoticSequence) -> Result<()> {
    let want = seq.scaling(s.horizon())?;
    let got = s.scaling();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    if close(want.a_t, got.a_t) && close(want.mu_t, got.mu_t) {
        Ok(())
    } else {
        Err(Error::invalid("seq", format!("stream was simulated with {got:?}, sequence gives {want:?}")))
    }
}

/// Rescaled intensity observables on the uniform grid of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RescaledIntensity {
    /// `C_t = lambda_{tT} / T`.
    Light { c: PathGrid<[f64; 2]> },
    /// `X_t = k N_{tT}`, `Lambda_t = k ∫_0^{tT} lambda`, `Z = (X - Lambda) / sqrt(k)` with
    /// `k = (1 - a_T) / (T^alpha mu)`.
    Heavy { x: PathGrid<[f64; 2]>, lambda: PathGrid<[f64; 2]>, z: PathGrid<[f64; 2]> },
}

pub fn rescaled_intensity(s: &EventStream, spec: &KernelMatrixSpec, seq: &AsymptoticSequence) -> Result<RescaledIntensity> {
    check_scaling(s, seq)?;
    let horizon = s.horizon();
    let grid = uniform_times(RESCALED_POINTS, 1.0);
    let orig: Vec<f64> = grid.iter().map(|t| t * horizon).collect();
    match *seq {
        AsymptoticSequence::Light { .. } => {
            let mut c = vec![[0.0; 2]; grid.len()];
            replay(s, spec, &orig, |i, p| c[i] = [p.intensity[0] / horizon, p.intensity[1] / horizon])?;
            Ok(RescaledIntensity::Light { c: PathGrid::new(grid, c)? })
        }
        AsymptoticSequence::Heavy { alpha, mu, .. } => {
            let k = seq.one_minus_a(horizon) / (horizon.powf(alpha) * mu);
            let n = grid.len();
            let (mut x, mut lam, mut z) = (vec![[0.0; 2]; n], vec![[0.0; 2]; n], vec![[0.0; 2]; n]);
            replay(s, spec, &orig, |i, p| {
                for j in 0..2 {
                    x[i][j] = k * p.counts[j];
                    lam[i][j] = k * p.compensator[j];
                    z[i][j] = k.sqrt() * (p.counts[j] - p.compensator[j]);
                }
            })?;
            Ok(RescaledIntensity::Heavy {
                x: PathGrid::new(grid.clone(), x)?,
                lambda: PathGrid::new(grid.clone(), lam)?,
                z: PathGrid::new(grid, z)?,
            })
        }
    }
}

/// `M = N - ∫ lambda`, sampled at 0, after each event and at the horizon.
pub fn compensator_martingale(s: &EventStream, spec: &KernelMatrixSpec) -> Result<PathGrid<[f64; 2]>> {
    let mut times = Vec::with_capacity(s.len() + 2);
    times.push(0.0);
    times.extend_from_slice(s.times());
    if s.times().last() != Some(&s.horizon()) {
        times.push(s.horizon());
    }
    let mut values = vec![[0.0; 2]; times.len()];
    replay(s, spec, &times, |i, p| {
        values[i] = [p.counts[0] - p.compensator[0], p.counts[1] - p.compensator[1]];
    })?;
    PathGrid::new(times, values)
}

/// Jump contributions of one event to `(W, B)` given the pre-jump intensities.
#[inline]
pub fn brownian_jumps(mark: Mark, intensity: [f64; 2], beta: f64, horizon: f64) -> (f64, f64) {
    let [lp, lm] = intensity;
    let sw = 1.0 / (horizon * (lp + lm)).sqrt();
    let sb = 1.0 / (horizon * (lp + beta * beta * lm)).sqrt();
    match mark {
        Mark::Up => (sw, sb),
        Mark::Down => (-sw, beta * sb),
    }
}

/// Streaming brackets `[W,W]`, `[B,B]`, `[W,B]` at the horizon: sums of
/// products of jumps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Brackets {
    pub beta: f64,
    pub horizon: f64,
    pub ww: f64,
    pub bb: f64,
    pub wb: f64,
    pub jumps: usize,
}

impl Brackets {
    pub fn new(beta: f64, horizon: f64) -> Self {
        Self { beta, horizon, ww: 0.0, bb: 0.0, wb: 0.0, jumps: 0 }
    }

    pub fn push(&mut self, mark: Mark, intensity: [f64; 2]) {
        let (w, b) = brownian_jumps(mark, intensity, self.beta, self.horizon);
        self.ww += w * w;
        self.bb += b * b;
        self.wb += w * b;
        self.jumps += 1;
    }

    pub fn from_stream(s: &EventStream, beta: f64) -> Self {
        let mut b = Self::new(beta, s.horizon());
        for (m, l) in s.marks().iter().zip(s.intensities()) {
            b.push(*m, *l);
        }
        b
    }
}

/// The embedded Brownian motions `W^T` and `B^T` on rescaled time, sampled at
/// 0, after each event and at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedBrownians {
    pub w: PathGrid,
    pub b: PathGrid,
    pub brackets: Brackets,
}

/// Builds `W^T` and `B^T`; the compensator drift between events is integrated
/// with 5-point Gauss-Legendre on each inter-event interval.
pub fn embedded_brownians(s: &EventStream, spec: &KernelMatrixSpec) -> Result<EmbeddedBrownians> {
    let beta = spec.beta;
    let horizon = s.horizon();
    let gl = GaussLegendre::new(5);
    let mut st = IntensityState::new(spec, s.scaling())?;
    let n = s.len() + 2;
    let (mut times, mut w, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    times.push(0.0);
    w.push(0.0);
    b.push(0.0);
    let (mut wv, mut bv) = (0.0, 0.0);
    let mut brackets = Brackets::new(beta, horizon);
    let drift = |st: &IntensityState, to: f64| -> (f64, f64) {
        let from = st.time();
        if to <= from {
            return (0.0, 0.0);
        }
        let dw = gl.integrate(from, to, |x| {
            let l = st.intensity_at(x);
            (l[0] - l[1]) / (horizon * (l[0] + l[1])).sqrt()
        });
        let db = gl.integrate(from, to, |x| {
            let l = st.intensity_at(x);
            (l[0] + beta * l[1]) / (horizon * (l[0] + beta * beta * l[1])).sqrt()
        });
        (dw, db)
    };
    for ((&t, &m), &l) in s.times().iter().zip(s.marks()).zip(s.intensities()) {
        let (dw, db) = drift(&st, t);
        st.advance(t);
        let (jw, jb) = brownian_jumps(m, l, beta, horizon);
        brackets.push(m, l);
        wv += jw - dw;
        bv += jb - db;
        st.jump(m == Mark::Up);
        times.push(t / horizon);
        w.push(wv);
        b.push(bv);
    }
    if st.time() < horizon {
        let (dw, db) = drift(&st, horizon);
        times.push(1.0);
        w.push(wv - dw);
        b.push(bv - db);
    }
    Ok(EmbeddedBrownians { w: PathGrid::new(times.clone(), w)?, b: PathGrid::new(times, b)?, brackets })
}
