use crate::kernel::{KernelFunction, KernelMatrixSpec, KernelShape, Scaling};
use crate::{Error, Result};

/// Intensity of the two-sided process, updated event by event.
///
/// Both kernels are expanded on a shared basis. Exponential basis functions
/// `e^(-r x)` carry Markov sums; power-law basis functions `(1 + x)^-(1+alpha)`
/// are summed over the stored past events.
#[derive(Debug, Clone)]
pub struct IntensityState {
    mu: f64,
    a: f64,
    beta: f64,
    t: f64,
    exp: Vec<ExpBasis>,
    pow: Vec<PowBasis>,
    past: Vec<(f64, bool)>,
}

#[derive(Debug, Clone)]
struct ExpBasis {
    rate: f64,
    c1: f64,
    c2: f64,
    up: f64,
    down: f64,
}

#[derive(Debug, Clone)]
struct PowBasis {
    alpha: f64,
    c1: f64,
    c2: f64,
}

/// Per-basis sums `(sum over up events, sum over down events)` folded into
/// the two intensities.
#[inline]
fn combine(a: f64, beta: f64, c1: f64, c2: f64, up: f64, down: f64) -> [f64; 2] {
    [
        a * (c1 * up + beta * c2 * down),
        a * (c2 * up + (c1 + (beta - 1.0) * c2) * down),
    ]
}

impl IntensityState {
    pub fn new(spec: &KernelMatrixSpec, scaling: Scaling) -> Result<Self> {
        for (name, k) in [("phi1", &spec.phi1), ("phi2", &spec.phi2)] {
            k.validate()?;
            if !k.is_non_increasing() {
                return Err(Error::invalid(name, "thinning needs a non-increasing kernel"));
            }
        }
        if !(scaling.a_t >= 0.0) || !(scaling.mu_t > 0.0) {
            return Err(Error::invalid("scaling", format!("need a_T >= 0 and mu_T > 0, got {scaling:?}")));
        }
        let mut s = Self {
            mu: scaling.mu_t,
            a: scaling.a_t,
            beta: spec.beta,
            t: 0.0,
            exp: Vec::new(),
            pow: Vec::new(),
            past: Vec::new(),
        };
        s.add_kernel(&spec.phi1, true);
        s.add_kernel(&spec.phi2, false);
        Ok(s)
    }

    fn add_kernel(&mut self, k: &KernelFunction, first: bool) {
        let split = |c: f64| if first { (c, 0.0) } else { (0.0, c) };
        match &k.shape {
            KernelShape::ExponentialMixture { components } => {
                for comp in components {
                    let (c1, c2) = split(k.weight * comp.coefficient * comp.rate);
                    match self.exp.iter_mut().find(|b| b.rate == comp.rate) {
                        Some(b) => {
                            b.c1 += c1;
                            b.c2 += c2;
                        }
                        None => self.exp.push(ExpBasis { rate: comp.rate, c1, c2, up: 0.0, down: 0.0 }),
                    }
                }
            }
            KernelShape::ShiftedPowerLaw { alpha } => {
                let (c1, c2) = split(k.weight * alpha);
                match self.pow.iter_mut().find(|b| b.alpha == *alpha) {
                    Some(b) => {
                        b.c1 += c1;
                        b.c2 += c2;
                    }
                    None => self.pow.push(PowBasis { alpha: *alpha, c1, c2 }),
                }
            }
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn baseline(&self) -> f64 {
        self.mu
    }

    /// True when every basis function is exponential (O(1) updates).
    pub fn is_markov(&self) -> bool {
        self.pow.is_empty()
    }

    /// Intensities at `t >= self.time()`, assuming no event in between.
    pub fn intensity_at(&self, t: f64) -> [f64; 2] {
        let dt = t - self.t;
        let mut out = [self.mu, self.mu];
        for b in &self.exp {
            let d = (-b.rate * dt).exp();
            let v = combine(self.a, self.beta, b.c1, b.c2, b.up * d, b.down * d);
            out[0] += v[0];
            out[1] += v[1];
        }
        for b in &self.pow {
            let (mut up, mut down) = (0.0, 0.0);
            for &(s, is_up) in &self.past {
                let v = (1.0 + (t - s)).powf(-(1.0 + b.alpha));
                if is_up {
                    up += v;
                } else {
                    down += v;
                }
            }
            let v = combine(self.a, self.beta, b.c1, b.c2, up, down);
            out[0] += v[0];
            out[1] += v[1];
        }
        out
    }

    pub fn intensity(&self) -> [f64; 2] {
        self.intensity_at(self.t)
    }

    /// `∫_{time}^{t} lambda(s) ds`, assuming no event in between.
    pub fn integral_to(&self, t: f64) -> [f64; 2] {
        let dt = t - self.t;
        let mut out = [self.mu * dt, self.mu * dt];
        for b in &self.exp {
            let f = -(-b.rate * dt).exp_m1() / b.rate;
            let v = combine(self.a, self.beta, b.c1, b.c2, b.up * f, b.down * f);
            out[0] += v[0];
            out[1] += v[1];
        }
        for b in &self.pow {
            let (mut up, mut down) = (0.0, 0.0);
            for &(s, is_up) in &self.past {
                // ∫ (1+x)^-(1+a) from x0 to x1 = ((1+x0)^-a - (1+x1)^-a) / a
                let x0 = self.t - s;
                let v = ((1.0 + x0).powf(-b.alpha) - (1.0 + x0 + dt).powf(-b.alpha)) / b.alpha;
                if is_up {
                    up += v;
                } else {
                    down += v;
                }
            }
            let v = combine(self.a, self.beta, b.c1, b.c2, up, down);
            out[0] += v[0];
            out[1] += v[1];
        }
        out
    }

    /// Moves the state to `t >= self.time()` without events.
    pub fn advance(&mut self, t: f64) {
        let dt = t - self.t;
        for b in &mut self.exp {
            let d = (-b.rate * dt).exp();
            b.up *= d;
            b.down *= d;
        }
        self.t = t;
    }

    /// Registers a jump at the current time.
    pub fn jump(&mut self, up: bool) {
        for b in &mut self.exp {
            if up {
                b.up += 1.0;
            } else {
                b.down += 1.0;
            }
        }
        if !self.pow.is_empty() {
            self.past.push((self.t, up));
        }
    }
}
