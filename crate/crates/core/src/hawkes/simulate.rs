use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::state::IntensityState;
use super::stream::{EventStream, Mark};
use crate::kernel::{AsymptoticSequence, KernelMatrixSpec, Scaling};
use crate::rng::SeedRecord;
use crate::{Error, Result};

/// How power-law kernels are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum KernelMode {
    /// Exact summation over all past events.
    #[default]
    Direct,
    /// Exponential-mixture fit with sup error at most `tolerance` on `[0, T]`.
    SumOfExponentials { tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationOptions {
    #[serde(default)]
    pub kernel_mode: KernelMode,
    /// Refuse runs whose expected event count exceeds this.
    #[serde(default = "default_budget")]
    pub event_budget: usize,
}

fn default_budget() -> usize {
    50_000_000
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { kernel_mode: KernelMode::Direct, event_budget: default_budget() }
    }
}

/// Something seen by a [`simulate_with`] observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimEvent {
    /// An accepted jump; `intensity` is the left limit `(lambda+, lambda-)`.
    Jump { time: f64, mark: Mark, intensity: [f64; 2] },
    /// The intensity at a requested sample time.
    Sample { time: f64, intensity: [f64; 2] },
}

/// Totals of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SimSummary {
    pub n_plus: usize,
    pub n_minus: usize,
    pub candidates: usize,
}

/// `E[N_T^+ + N_T^-] ≈ 2 mu_T T / (1 - a_T)`.
pub fn expected_event_count(scaling: Scaling, horizon: f64) -> f64 {
    2.0 * scaling.mu_t * horizon / (1.0 - scaling.a_t).max(f64::MIN_POSITIVE)
}

/// Applies the kernel mode, returning the spec the simulator will use and the
/// certified kernel error.
pub fn effective_spec(spec: &KernelMatrixSpec, horizon: f64, mode: KernelMode) -> Result<(KernelMatrixSpec, f64)> {
    match mode {
        KernelMode::Direct => Ok((spec.clone(), 0.0)),
        KernelMode::SumOfExponentials { tolerance } => spec.with_sum_of_exponentials(horizon, tolerance),
    }
}

/// Ogata thinning on `(0, horizon]` with explicit `(a_T, mu_T)`.
///
/// `sample_times` (sorted, in `[0, horizon]`) ask for the intensity at those
/// times; they are reported through `observe` in time order together with
/// the jumps.
pub fn simulate_with<F: FnMut(SimEvent)>(
    spec: &KernelMatrixSpec,
    scaling: Scaling,
    horizon: f64,
    seed: SeedRecord,
    opts: &SimulationOptions,
    sample_times: &[f64],
    mut observe: F,
) -> Result<SimSummary> {
    if !(horizon >= 1.0) || !horizon.is_finite() {
        return Err(Error::invalid("horizon", format!("T = {horizon} (need T >= 1)")));
    }
    if !(scaling.a_t < 1.0) {
        return Err(Error::ResolventDiverges { a_t: scaling.a_t });
    }
    spec.check()?;
    let expected = expected_event_count(scaling, horizon);
    if expected > opts.event_budget as f64 {
        return Err(Error::EventBudget { expected, budget: opts.event_budget, horizon });
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("sample_times", "must be sorted"));
    }
    let (spec, _) = effective_spec(spec, horizon, opts.kernel_mode)?;
    let mut state = IntensityState::new(&spec, scaling)?;
    let mut rng = seed.rng();
    let mut summary = SimSummary::default();
    let mut samples = sample_times.iter().copied().peekable();
    let mut bound = {
        let l = state.intensity();
        l[0] + l[1]
    };
    let mut t = 0.0;
    loop {
        let tau: f64 = rng.sample::<f64, _>(Exp1) / bound;
        let cand = t + tau;
        while let Some(&s) = samples.peek() {
            if s > cand.min(horizon) {
                break;
            }
            observe(SimEvent::Sample { time: s, intensity: state.intensity_at(s) });
            samples.next();
        }
        if cand > horizon {
            break;
        }
        summary.candidates += 1;
        state.advance(cand);
        t = cand;
        let l = state.intensity();
        let u: f64 = rng.random::<f64>() * bound;
        if u < l[0] + l[1] {
            let mark = if u < l[0] { Mark::Up } else { Mark::Down };
            observe(SimEvent::Jump { time: t, mark, intensity: l });
            match mark {
                Mark::Up => summary.n_plus += 1,
                Mark::Down => summary.n_minus += 1,
            }
            state.jump(mark == Mark::Up);
            let l = state.intensity();
            bound = l[0] + l[1];
        } else {
            bound = l[0] + l[1];
        }
    }
    for s in samples {
        observe(SimEvent::Sample { time: s, intensity: state.intensity_at(s) });
    }
    Ok(summary)
}

/// Simulates with explicit `(a_T, mu_T)` and collects the events.
pub fn simulate_scaled(
    spec: &KernelMatrixSpec,
    scaling: Scaling,
    horizon: f64,
    seed: SeedRecord,
    opts: &SimulationOptions,
) -> Result<EventStream> {
    let mut stream = EventStream::empty(horizon, scaling, seed);
    simulate_with(spec, scaling, horizon, seed, opts, &[], |e| {
        if let SimEvent::Jump { time, mark, intensity } = e {
            stream.push(time, mark, intensity);
        }
    })?;
    Ok(stream)
}

/// Simulates the process of horizon `horizon` along the sequence `seq`.
pub fn simulate(
    spec: &KernelMatrixSpec,
    seq: &AsymptoticSequence,
    horizon: f64,
    seed: SeedRecord,
) -> Result<EventStream> {
    simulate_scaled(spec, seq.scaling(horizon)?, horizon, seed, &SimulationOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel_matrix, KernelFunction};

    fn spec() -> KernelMatrixSpec {
        build_kernel_matrix(
            KernelFunction::exponential(0.4, 1.0).unwrap(),
            KernelFunction::exponential(0.2, 1.0).unwrap(),
            3.0,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_given_seed() {
        let seq = AsymptoticSequence::Light { lambda: 1.0, mu: 1.0 };
        let a = simulate(&spec(), &seq, 50.0, SeedRecord::new(9, 1)).unwrap();
        let b = simulate(&spec(), &seq, 50.0, SeedRecord::new(9, 1)).unwrap();
        let c = simulate(&spec(), &seq, 50.0, SeedRecord::new(9, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.times().windows(2).all(|w| w[0] < w[1]));
        assert!(a.times().iter().all(|&t| t > 0.0 && t <= 50.0));
        assert!(a.intensities().iter().all(|l| l[0] >= 1.0 && l[1] >= 1.0));
    }

    #[test]
    fn budget_guard_trips_before_running() {
        let seq = AsymptoticSequence::Light { lambda: 1.0, mu: 1.0 };
        let opts = SimulationOptions { event_budget: 1000, ..Default::default() };
        let r = simulate_scaled(&spec(), seq.scaling(1e4).unwrap(), 1e4, SeedRecord::new(1, 0), &opts);
        assert!(matches!(r, Err(Error::EventBudget { .. })));
    }

    #[test]
    fn samples_are_reported_in_order() {
        let sc = Scaling { a_t: 0.5, mu_t: 1.0 };
        let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let mut seen = Vec::new();
        let mut last = -1.0;
        simulate_with(&spec(), sc, 10.0, SeedRecord::new(1, 1), &Default::default(), &times, |e| {
            let t = match e {
                SimEvent::Jump { time, .. } => time,
                SimEvent::Sample { time, intensity } => {
                    assert!(intensity[0] >= 1.0);
                    seen.push(time);
                    time
                }
            };
            assert!(t >= last);
            last = t;
        })
        .unwrap();
        assert_eq!(seen, times);
    }
}
