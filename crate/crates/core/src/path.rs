//! Sampled paths.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A path sampled at increasing time stamps.
///
/// Samples are read as a càdlàg step function: the value at `t` is the value of
/// the last sample at or before `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid<V = f64> {
    times: Vec<f64>,
    values: Vec<V>,
}

impl<V: Copy> PathGrid<V> {
    pub fn new(times: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid(
                "values",
                format!("{} times but {} values", times.len(), values.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::invalid("times", "time stamps must be sorted"));
        }
        Ok(Self { times, values })
    }

    /// Uniform grid `t_k = k * horizon / (n - 1)` filled by `f`.
    pub fn uniform(n: usize, horizon: f64, mut f: impl FnMut(f64) -> V) -> Self {
        let times = uniform_times(n, horizon);
        let values = times.iter().map(|&t| f(t)).collect();
        Self { times, values }
    }

    pub fn empty() -> Self {
        Self { times: Vec::new(), values: Vec::new() }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_value(&self) -> Option<V> {
        self.values.last().copied()
    }

    /// Step-function value at `t`; `before_start` when `t` precedes every sample.
    pub fn value_at(&self, t: f64, before_start: V) -> V {
        match self.times.partition_point(|&s| s <= t) {
            0 => before_start,
            k => self.values[k - 1],
        }
    }

    pub fn map<W: Copy>(&self, f: impl FnMut(&V) -> W) -> PathGrid<W> {
        PathGrid { times: self.times.clone(), values: self.values.iter().map(f).collect() }
    }

    /// Grid step when the time stamps are uniform to relative precision `1e-9`.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::NonUniformGrid("fewer than two samples".into()));
        }
        let h = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        for (k, w) in self.times.windows(2).enumerate() {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1e-300) {
                return Err(Error::NonUniformGrid(format!("step {k} is {} vs mean {h}", w[1] - w[0])));
            }
        }
        Ok(h)
    }
}

impl PathGrid<f64> {
    /// Writes `time,value` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["time", "value"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            wr.write_record([format_f64(*t), format_f64(*v)])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::invalid("csv", format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::invalid("csv", e.to_string()))
            };
            times.push(parse(0)?);
            values.push(parse(1)?);
        }
        Self::new(times, values)
    }

    /// Exact integral of the step function over `[times[0], t]`.
    pub fn integrate_step(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.times.len() {
            let start = self.times[k];
            if start >= t {
                break;
            }
            let end = self.times.get(k + 1).copied().unwrap_or(f64::INFINITY).min(t);
            acc += self.values[k] * (end - start);
        }
        acc
    }
}

impl PathGrid<[f64; 2]> {
    pub fn component(&self, i: usize) -> PathGrid<f64> {
        self.map(|v| v[i])
    }

    /// Writes `time,plus,minus` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["time", "plus", "minus"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            wr.write_record([format_f64(*t), format_f64(v[0]), format_f64(v[1])])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn uniform_times(n: usize, horizon: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| horizon * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Shortest decimal representation that round-trips exactly.
pub(crate) fn format_f64(x: f64) -> String {
    format!("{x:?}")
}
