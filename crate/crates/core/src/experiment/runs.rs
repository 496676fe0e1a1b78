use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::manifest::{config_hash, horizon_tag, FileEntry, GroupSummary, OutputDir, PathSeed, RunManifest, LIBRARY_VERSION};
use crate::estimators::EstimateWithCI;
use crate::hawkes::{expected_event_count, microscopic_price, rescale_heavy, rescale_light, simulate_scaled};
use crate::kernel::{eigen_structure, AsymptoticSequence, KernelMatrixSpec};
use crate::limit::{
    heston_params_from_micro, rough_heston_with, rough_params_from_micro, simulate_heston, LimitPaths, RoughCirForm,
    RoughCirScheme, TimeGrid,
};
use crate::path::format_f64;
use crate::rng::SeedRecord;
use crate::{Error, PathGrid, Result};

/// Ladder index used for limit-model seeds, clear of any horizon index.
pub const LIMIT_STREAM: usize = 1 << 16;
/// Ladder index used for the roughness ensemble.
pub const HURST_STREAM: usize = LIMIT_STREAM + 1;

/// Execution settings that do not affect results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
}

pub(crate) fn pool(opts: RunOptions) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Maps `f` over `items` on the pool, keeping input order.
pub(crate) fn par_map<T, R, F>(pool: &rayon::ThreadPool, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    pool.install(|| items.into_par_iter().map(f).collect())
}

pub(crate) fn ladder_items(cfg: &ExperimentConfig) -> Vec<(usize, usize)> {
    (0..cfg.horizons.len()).flat_map(|i| (0..cfg.path_count(i)).map(move |p| (i, p))).collect()
}

/// Fails on the first horizon whose expected event count exceeds the budget.
pub(crate) fn check_budget(cfg: &ExperimentConfig) -> Result<()> {
    for &t in &cfg.horizons {
        let expected = expected_event_count(cfg.sequence.scaling(t)?, t);
        if expected > cfg.simulation.event_budget as f64 {
            return Err(Error::EventBudget { expected, budget: cfg.simulation.event_budget, horizon: t });
        }
    }
    Ok(())
}

pub(crate) fn seed_entry(label: &str, horizon: Option<f64>, path: usize, seed: SeedRecord) -> PathSeed {
    PathSeed { label: label.to_string(), horizon, path, seed }
}

pub(crate) fn mean_stats(stats: &mut BTreeMap<String, f64>, name: &str, xs: &[f64]) {
    let e = EstimateWithCI::mean_of(xs);
    stats.insert(format!("{name}_mean"), e.point);
    stats.insert(format!("{name}_stderr"), e.stderr);
}

pub(crate) fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

/// Rescaled price on `[0, 1]` for either regime.
pub(crate) fn rescaled_price(p: &PathGrid, horizon: f64, seq: &AsymptoticSequence) -> Result<PathGrid> {
    match seq {
        AsymptoticSequence::Light { .. } => Ok(rescale_light(p, horizon)),
        AsymptoticSequence::Heavy { .. } => Ok(rescale_heavy(p, horizon, seq)?.price),
    }
}

struct SimOutcome {
    seed: PathSeed,
    counts: (usize, usize),
    price_1: f64,
    files: Vec<FileEntry>,
}

/// Runs the Hawkes engine over the horizon ladder and writes event and
/// rescaled-price files.
pub fn run_simulate(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunManifest> {
    let start = Instant::now();
    let spec = cfg.model_spec()?;
    check_budget(cfg)?;
    let out = OutputDir::create(&cfg.output_dir())?;
    let pool = pool(opts)?;
    let outcomes = par_map(&pool, ladder_items(cfg), |(i, p)| {
        let t = cfg.horizons[i];
        let seed = SeedRecord::for_pair(cfg.master_seed, i, p);
        let s = simulate_scaled(&spec, cfg.sequence.scaling(t)?, t, seed, &cfg.simulation)?;
        let price = rescaled_price(&microscopic_price(&s), t, &cfg.sequence)?;
        let stem = format!("paths/T{}_path{p:04}", horizon_tag(t));
        let mut files = Vec::new();
        if cfg.write_events {
            files.push(out.write(&format!("{stem}_events.csv"), &csv_bytes(|b| s.write_csv(b))?)?);
        }
        files.push(out.write(&format!("{stem}_price.csv"), &csv_bytes(|b| price.write_csv(b))?)?);
        Ok(SimOutcome {
            seed: seed_entry("micro", Some(t), p, seed),
            counts: s.counts(),
            price_1: price.last_value().unwrap_or(0.0),
            files,
        })
    })?;
    let mut summaries = Vec::new();
    for (i, &t) in cfg.horizons.iter().enumerate() {
        let group: Vec<&SimOutcome> = outcomes.iter().filter(|o| o.seed.horizon == Some(t)).collect();
        let mut stats = BTreeMap::new();
        stats.insert("expected_events".into(), expected_event_count(cfg.sequence.scaling(t)?, t));
        mean_stats(&mut stats, "n_plus", &group.iter().map(|o| o.counts.0 as f64).collect::<Vec<_>>());
        mean_stats(&mut stats, "n_minus", &group.iter().map(|o| o.counts.1 as f64).collect::<Vec<_>>());
        mean_stats(&mut stats, "price_1", &group.iter().map(|o| o.price_1).collect::<Vec<_>>());
        summaries.push(GroupSummary { label: "micro".into(), horizon: Some(t), paths: cfg.path_count(i), stats });
    }
    let manifest = RunManifest {
        command: "simulate".into(),
        library_version: LIBRARY_VERSION.into(),
        config_hash: config_hash(cfg, &spec),
        config: cfg.clone(),
        model: spec,
        seeds: outcomes.iter().map(|o| o.seed.clone()).collect(),
        summaries,
        files: outcomes.into_iter().flat_map(|o| o.files).collect(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    out.write_manifest(&manifest)?;
    Ok(manifest)
}

/// Parameters of the limit model implied by the config.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(untagged)]
pub enum LimitModel {
    Heston(crate::limit::HestonParams),
    RoughHeston(crate::limit::RoughHestonParams),
}

pub fn limit_model(cfg: &ExperimentConfig, spec: &KernelMatrixSpec) -> Result<LimitModel> {
    let spectral = eigen_structure(spec, &cfg.sequence)?;
    Ok(match cfg.sequence {
        AsymptoticSequence::Light { .. } => LimitModel::Heston(heston_params_from_micro(spec, &cfg.sequence, &spectral)?),
        AsymptoticSequence::Heavy { .. } => {
            LimitModel::RoughHeston(rough_params_from_micro(spec, &cfg.sequence, &spectral)?)
        }
    })
}

/// Prepared sampler of limit paths.
pub(crate) enum LimitSampler {
    Heston(crate::limit::HestonParams, TimeGrid),
    Rough(crate::limit::RoughHestonParams, RoughCirScheme),
}

impl LimitSampler {
    pub(crate) fn new(model: &LimitModel, cfg: &ExperimentConfig, steps: Option<usize>) -> Result<Self> {
        Ok(match model {
            LimitModel::Heston(p) => Self::Heston(*p, TimeGrid::new(steps.unwrap_or(1000), cfg.limit.horizon)?),
            LimitModel::RoughHeston(p) => {
                let grid = TimeGrid::new(steps.unwrap_or(1024), cfg.limit.horizon)?;
                let form = cfg.limit.form.unwrap_or(RoughCirForm::Fractional);
                Self::Rough(*p, RoughCirScheme::new(p.variance(), form, grid)?)
            }
        })
    }

    pub(crate) fn sample(&self, seed: SeedRecord) -> Result<LimitPaths> {
        match self {
            Self::Heston(p, grid) => simulate_heston(p, *grid, seed),
            Self::Rough(p, scheme) => rough_heston_with(scheme, p, seed),
        }
    }
}

fn limit_csv(paths: &LimitPaths) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["time", "price", "variance"])?;
    for ((t, p), v) in paths.price.times().iter().zip(paths.price.values()).zip(paths.variance.values()) {
        wr.write_record([format_f64(*t), format_f64(*p), format_f64(*v)])?;
    }
    wr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Maps the micro model to its limit, writes `params.json` and simulates limit paths.
pub fn run_limit(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunManifest> {
    let start = Instant::now();
    let spec = cfg.model_spec()?;
    let model = limit_model(cfg, &spec)?;
    let sampler = LimitSampler::new(&model, cfg, cfg.limit.steps)?;
    let out = OutputDir::create(&cfg.output_dir())?;
    let mut files = vec![out.write("params.json", (serde_json::to_string_pretty(&model)? + "\n").as_bytes())?];
    let pool = pool(opts)?;
    let outcomes = par_map(&pool, (0..cfg.limit.paths).collect(), |p| {
        let seed = SeedRecord::for_pair(cfg.master_seed, LIMIT_STREAM, p);
        let paths = sampler.sample(seed)?;
        let file = out.write(&format!("paths/limit_path{p:04}.csv"), &limit_csv(&paths)?)?;
        Ok((seed_entry("limit", None, p, seed), paths.price.last_value(), paths.variance.last_value(), file))
    })?;
    let mut stats = BTreeMap::new();
    mean_stats(&mut stats, "price_end", &outcomes.iter().filter_map(|o| o.1).collect::<Vec<_>>());
    mean_stats(&mut stats, "variance_end", &outcomes.iter().filter_map(|o| o.2).collect::<Vec<_>>());
    let summaries = vec![GroupSummary { label: "limit".into(), horizon: None, paths: cfg.limit.paths, stats }];
    let seeds = outcomes.iter().map(|o| o.0.clone()).collect();
    files.extend(outcomes.into_iter().map(|o| o.3));
    let manifest = RunManifest {
        command: "limit".into(),
        library_version: LIBRARY_VERSION.into(),
        config_hash: config_hash(cfg, &spec),
        config: cfg.clone(),
        model: spec,
        seeds,
        summaries,
        files,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    out.write_manifest(&manifest)?;
    Ok(manifest)
}
