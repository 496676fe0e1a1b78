use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::kernel::Scaling;
use crate::path::format_f64;
use crate::rng::SeedRecord;
use crate::{Error, Result};

/// Direction of a one-tick price move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mark {
    #[serde(rename = "+")]
    Up,
    #[serde(rename = "-")]
    Down,
}

impl Mark {
    pub fn sign(self) -> f64 {
        match self {
            Mark::Up => 1.0,
            Mark::Down => -1.0,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Mark::Up => "+",
            Mark::Down => "-",
        }
    }
}

/// One simulated realisation: jump times, marks and the intensities just
/// before each jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    horizon: f64,
    scaling: Scaling,
    seed: SeedRecord,
    times: Vec<f64>,
    marks: Vec<Mark>,
    intensities: Vec<[f64; 2]>,
}

impl EventStream {
    pub fn empty(horizon: f64, scaling: Scaling, seed: SeedRecord) -> Self {
        Self { horizon, scaling, seed, times: Vec::new(), marks: Vec::new(), intensities: Vec::new() }
    }

    /// Builds a stream from parts, checking ordering and the baseline floor.
    pub fn from_parts(
        horizon: f64,
        scaling: Scaling,
        seed: SeedRecord,
        times: Vec<f64>,
        marks: Vec<Mark>,
        intensities: Vec<[f64; 2]>,
    ) -> Result<Self> {
        if times.len() != marks.len() || times.len() != intensities.len() {
            return Err(Error::invalid("events", "column lengths differ"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("times", "event times must be strictly increasing"));
        }
        if times.iter().any(|&t| !(t > 0.0 && t <= horizon)) {
            return Err(Error::invalid("times", format!("event outside (0, {horizon}]")));
        }
        let floor = scaling.mu_t * (1.0 - 1e-12);
        if intensities.iter().any(|l| l[0] < floor || l[1] < floor) {
            return Err(Error::invalid("intensities", "recorded intensity below the baseline"));
        }
        Ok(Self { horizon, scaling, seed, times, marks, intensities })
    }

    pub(crate) fn push(&mut self, time: f64, mark: Mark, intensity: [f64; 2]) {
        self.times.push(time);
        self.marks.push(mark);
        self.intensities.push(intensity);
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn seed(&self) -> SeedRecord {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn intensities(&self) -> &[[f64; 2]] {
        &self.intensities
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `(N_T^+, N_T^-)`.
    pub fn counts(&self) -> (usize, usize) {
        let up = self.marks.iter().filter(|m| **m == Mark::Up).count();
        (up, self.marks.len() - up)
    }

    /// Writes `time,mark,lambda_plus,lambda_minus` rows preceded by `#` metadata lines.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# horizon={}", format_f64(self.horizon))?;
        writeln!(w, "# a_t={}", format_f64(self.scaling.a_t))?;
        writeln!(w, "# mu_t={}", format_f64(self.scaling.mu_t))?;
        writeln!(w, "# master_seed={}", self.seed.master_seed)?;
        writeln!(w, "# stream={}", self.seed.stream)?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["time", "mark", "lambda_plus", "lambda_minus"])?;
        for i in 0..self.times.len() {
            wr.write_record([
                format_f64(self.times[i]).as_str(),
                self.marks[i].symbol(),
                format_f64(self.intensities[i][0]).as_str(),
                format_f64(self.intensities[i][1]).as_str(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut meta = std::collections::HashMap::new();
        let mut header = String::new();
        loop {
            header.clear();
            if reader.read_line(&mut header)? == 0 {
                break;
            }
            match header.strip_prefix('#') {
                Some(rest) => {
                    if let Some((k, v)) = rest.trim().split_once('=') {
                        meta.insert(k.trim().to_string(), v.trim().to_string());
                    }
                }
                None => break,
            }
        }
        let get = |k: &str| -> Result<String> {
            meta.get(k).cloned().ok_or_else(|| Error::Config(format!("event CSV lacks `# {k}=` metadata")))
        };
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Config(format!("bad `{k}`"))) };
        let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| Error::Config(format!("bad `{k}`"))) };
        let horizon = num("horizon")?;
        let scaling = Scaling { a_t: num("a_t")?, mu_t: num("mu_t")? };
        let seed = SeedRecord::new(int("master_seed")?, int("stream")?);
        let body = header.clone() + &{
            let mut rest = String::new();
            reader.read_to_string(&mut rest)?;
            rest
        };
        let mut rd = csv::Reader::from_reader(body.as_bytes());
        let (mut times, mut marks, mut intensities) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::invalid("csv", format!("missing column {i}")));
            let parse = |i: usize| -> Result<f64> {
                field(i)?.trim().parse().map_err(|_| Error::invalid("csv", format!("column {i} is not a number")))
            };
            times.push(parse(0)?);
            marks.push(match field(1)?.trim() {
                "+" => Mark::Up,
                "-" => Mark::Down,
                other => return Err(Error::invalid("mark", format!("`{other}` is not + or -"))),
            });
            intensities.push([parse(2)?, parse(3)?]);
        }
        Self::from_parts(horizon, scaling, seed, times, marks, intensities)
    }
}
