use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ExperimentConfig;
use super::identities::{exponential_resolvent_residuals, fractional_identity_residual, ml_laplace_residual};
use super::manifest::{config_hash, horizon_tag, FileEntry, GroupSummary, OutputDir, PathSeed, RunManifest, LIBRARY_VERSION};
use super::runs::{
    check_budget, csv_bytes, ladder_items, limit_model, mean_stats, par_map, pool, rescaled_price, seed_entry,
    LimitModel, LimitSampler, RunOptions, HURST_STREAM, LIMIT_STREAM,
};
use crate::estimators::{
    hurst_moment_scaling, ks_distance, leverage_correlation_ensemble, log_lags, EstimateWithCI, EstimatorRecord,
};
use crate::hawkes::{
    microscopic_price, rescaled_intensity, simulate_scaled, simulate_with, Brackets, RescaledIntensity, SimEvent,
    RESCALED_POINTS,
};
use crate::kernel::{eigen_structure, AsymptoticSequence, KernelMatrixSpec, SpectralData};
use crate::limit::leverage_rho;
use crate::path::{format_f64, uniform_times};
use crate::rng::SeedRecord;
use crate::{Error, PathGrid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowKind {
    /// Monte Carlo quantity; its band is multiplied by `tolerance_scale`.
    Statistical,
    /// Deterministic numerical identity.
    Identity,
    /// Reported only.
    Info,
}

/// Pass rule of a row, before scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    Within { target: f64, tolerance: f64 },
    Below { bound: f64 },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub kind: RowKind,
    pub value: f64,
    pub stderr: Option<f64>,
    #[serde(flatten)]
    pub rule: Rule,
    /// Tolerance or bound after scaling.
    pub effective: Option<f64>,
    pub pass: Option<bool>,
}

impl CheckRow {
    fn new(name: impl Into<String>, kind: RowKind, value: f64, rule: Rule, scale: f64) -> Self {
        let (effective, pass) = match rule {
            Rule::Within { target, tolerance } => {
                let t = tolerance * scale;
                (Some(t), Some((value - target).abs() <= t))
            }
            Rule::Below { bound } => {
                let b = bound * scale;
                (Some(b), Some(value < b))
            }
            Rule::None => (None, None),
        };
        Self { name: name.into(), kind, value, stderr: None, rule, effective, pass }
    }

    pub fn statistical(name: impl Into<String>, value: f64, rule: Rule, scale: f64) -> Self {
        Self::new(name, RowKind::Statistical, value, rule, scale)
    }

    pub fn identity(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, RowKind::Identity, value, Rule::Below { bound }, 1.0)
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, RowKind::Info, value, Rule::None, 1.0)
    }

    fn with_stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config_hash: String,
    pub all_pass: bool,
    pub rows: Vec<CheckRow>,
    pub records: Vec<EstimatorRecord>,
}

impl VerifyReport {
    fn new(config_hash: String, rows: Vec<CheckRow>, records: Vec<EstimatorRecord>) -> Self {
        let all_pass = rows.iter().all(|r| r.pass != Some(false));
        Self { config_hash, all_pass, rows, records }
    }

    /// Fixed-width table, one row per check.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(5);
        let _ = writeln!(s, "{:<width$}  {:<11}  {:>14}  {:>22}  {}", "check", "kind", "value", "band", "result");
        for r in &self.rows {
            let band = match (r.rule, r.effective) {
                (Rule::Within { target, .. }, Some(t)) => format!("{target:.5} ± {t:.3e}"),
                (Rule::Below { .. }, Some(b)) => format!("< {b:.4e}"),
                _ => "-".into(),
            };
            let kind = match r.kind {
                RowKind::Statistical => "statistical",
                RowKind::Identity => "identity",
                RowKind::Info => "info",
            };
            let result = match r.pass {
                Some(true) => "PASS",
                Some(false) => "FAIL",
                None => "-",
            };
            let _ = writeln!(s, "{:<width$}  {:<11}  {:>14.6e}  {:>22}  {}", r.name, kind, r.value, band, result);
        }
        let _ = writeln!(s, "overall: {}", if self.all_pass { "PASS" } else { "FAIL" });
        s
    }
}

/// Per-path results of the micro ensemble.
struct MicroStats {
    seed: PathSeed,
    horizon_index: usize,
    counts: [usize; 2],
    brackets: Brackets,
    price_1: f64,
    /// `sup |v2 . C|` (light) or `sup |Lambda - X|` (heavy).
    sup_vanishing: f64,
    price: PathGrid,
}

fn light_path(
    spec: &KernelMatrixSpec,
    spectral: &SpectralData,
    cfg: &ExperimentConfig,
    t: f64,
    seed: SeedRecord,
) -> Result<(Brackets, [usize; 2], f64, PathGrid)> {
    let grid = uniform_times(RESCALED_POINTS, 1.0);
    let orig: Vec<f64> = grid.iter().map(|u| u * t).collect();
    let v2 = spectral.v2;
    let mut br = Brackets::new(spec.beta, t);
    let (mut p, mut sup) = (0.0, 0.0f64);
    let mut prices = Vec::with_capacity(grid.len());
    let sum = simulate_with(spec, cfg.sequence.scaling(t)?, t, seed, &cfg.simulation, &orig, |e| match e {
        SimEvent::Jump { mark, intensity, .. } => {
            br.push(mark, intensity);
            p += mark.sign();
        }
        SimEvent::Sample { intensity, .. } => {
            sup = sup.max((v2[0] * intensity[0] + v2[1] * intensity[1]).abs() / t);
            prices.push(p / t);
        }
    })?;
    Ok((br, [sum.n_plus, sum.n_minus], sup, PathGrid::new(grid, prices)?))
}

fn heavy_path(
    spec: &KernelMatrixSpec,
    cfg: &ExperimentConfig,
    t: f64,
    seed: SeedRecord,
) -> Result<(Brackets, [usize; 2], f64, PathGrid)> {
    let s = simulate_scaled(spec, cfg.sequence.scaling(t)?, t, seed, &cfg.simulation)?;
    let RescaledIntensity::Heavy { x, lambda, .. } = rescaled_intensity(&s, spec, &cfg.sequence)? else {
        unreachable!("heavy sequence");
    };
    let sup = x
        .values()
        .iter()
        .zip(lambda.values())
        .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
        .fold(0.0, f64::max);
    let (up, down) = s.counts();
    let price = rescaled_price(&microscopic_price(&s), t, &cfg.sequence)?;
    Ok((Brackets::from_stream(&s, spec.beta), [up, down], sup, price))
}

fn stats_csv(rows: &[&MicroStats], vanishing: &str) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["path", "stream", "n_plus", "n_minus", "ww", "bb", "wb", "price_1", vanishing])?;
    for m in rows {
        wr.write_record([
            m.seed.path.to_string(),
            m.seed.seed.stream.to_string(),
            m.counts[0].to_string(),
            m.counts[1].to_string(),
            format_f64(m.brackets.ww),
            format_f64(m.brackets.bb),
            format_f64(m.brackets.wb),
            format_f64(m.price_1),
            format_f64(m.sup_vanishing),
        ])?;
    }
    wr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn sample_csv(values: &[f64]) -> Result<Vec<u8>> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(["path", "value"])?;
    for (i, v) in values.iter().enumerate() {
        wr.write_record([i.to_string(), format_f64(*v)])?;
    }
    wr.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn record(name: &str, params: serde_json::Value, e: EstimateWithCI, seeds: serde_json::Value) -> EstimatorRecord {
    EstimatorRecord::new(name, params, e, seeds)
}

/// Runs the configured checks and writes `report.json`, `report.txt`, the
/// data behind every row and the manifest.
pub fn run_verify(cfg: &ExperimentConfig, opts: RunOptions) -> Result<(RunManifest, VerifyReport)> {
    let start = Instant::now();
    let spec = cfg.model_spec()?;
    check_budget(cfg)?;
    let spectral = eigen_structure(&spec, &cfg.sequence)?;
    let heavy = cfg.sequence.is_heavy();
    let scale = cfg.checks.tolerance_scale;
    let hash = config_hash(cfg, &spec);
    let out = OutputDir::create(&cfg.output_dir())?;
    let pool = pool(opts)?;
    let mut files: Vec<FileEntry> = Vec::new();
    let mut seeds: Vec<PathSeed> = Vec::new();
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    let mut records = Vec::new();

    let micro = par_map(&pool, ladder_items(cfg), |(i, p)| {
        let t = cfg.horizons[i];
        let seed = SeedRecord::for_pair(cfg.master_seed, i, p);
        let (brackets, counts, sup_vanishing, price) =
            if heavy { heavy_path(&spec, cfg, t, seed)? } else { light_path(&spec, &spectral, cfg, t, seed)? };
        Ok(MicroStats {
            seed: seed_entry("micro", Some(t), p, seed),
            horizon_index: i,
            counts,
            price_1: price.last_value().unwrap_or(0.0),
            brackets,
            sup_vanishing,
            price,
        })
    })?;
    seeds.extend(micro.iter().map(|m| m.seed.clone()));
    let vanishing = if heavy { "sup_lambda_minus_x" } else { "sup_v2_c" };
    let last = cfg.horizons.len() - 1;
    let mut sup_means = Vec::new();
    for (i, &t) in cfg.horizons.iter().enumerate() {
        let group: Vec<&MicroStats> = micro.iter().filter(|m| m.horizon_index == i).collect();
        files.push(out.write(&format!("paths/verify_T{}.csv", horizon_tag(t)), &stats_csv(&group, vanishing)?)?);
        let col = |f: &dyn Fn(&MicroStats) -> f64| group.iter().map(|m| f(m)).collect::<Vec<f64>>();
        let mut stats = BTreeMap::new();
        mean_stats(&mut stats, "n_plus", &col(&|m| m.counts[0] as f64));
        mean_stats(&mut stats, "n_minus", &col(&|m| m.counts[1] as f64));
        mean_stats(&mut stats, "ww", &col(&|m| m.brackets.ww));
        mean_stats(&mut stats, "bb", &col(&|m| m.brackets.bb));
        mean_stats(&mut stats, "wb", &col(&|m| m.brackets.wb));
        mean_stats(&mut stats, "price_1", &col(&|m| m.price_1));
        mean_stats(&mut stats, vanishing, &col(&|m| m.sup_vanishing));
        let sup = EstimateWithCI::mean_of(&col(&|m| m.sup_vanishing));
        rows.push(CheckRow::info(format!("{vanishing} T={}", horizon_tag(t)), sup.point).with_stderr(sup.stderr));
        sup_means.push(sup.point);
        summaries.push(GroupSummary { label: "micro".into(), horizon: Some(t), paths: group.len(), stats });
    }
    let t_max = cfg.horizons[last];
    let top: Vec<&MicroStats> = micro.iter().filter(|m| m.horizon_index == last).collect();
    let top_seeds = json!({
        "master_seed": cfg.master_seed,
        "streams": top.iter().map(|m| m.seed.seed.stream).collect::<Vec<_>>(),
    });
    for m in &top {
        let rel = format!("paths/verify_T{}_path{:04}_price.csv", horizon_tag(t_max), m.seed.path);
        files.push(out.write(&rel, &csv_bytes(|b| m.price.write_csv(b))?)?);
    }
    let tag = horizon_tag(t_max);

    if sup_means.len() >= 2 {
        let ratio = sup_means.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
        rows.push(CheckRow::statistical(
            format!("{vanishing} ratio across ladder"),
            ratio,
            Rule::Below { bound: 1.0 },
            scale,
        ));
    }

    let (up, down): (Vec<f64>, Vec<f64>) = top.iter().map(|m| (m.counts[0] as f64, m.counts[1] as f64)).unzip();
    let (mu, md) = (EstimateWithCI::mean_of(&up).point, EstimateWithCI::mean_of(&down).point);
    rows.push(CheckRow::statistical(
        format!("no-arbitrage |E N+ - E N-| / E N+ T={tag}"),
        (mu - md).abs() / mu.max(f64::MIN_POSITIVE),
        Rule::Below { bound: cfg.checks.no_arbitrage },
        scale,
    ));

    if !heavy {
        let rho = leverage_rho(spec.beta);
        let tol = cfg.checks.bracket_tolerance;
        for (name, target, f) in [
            ("[W,B]", rho, (|b: &Brackets| b.wb) as fn(&Brackets) -> f64),
            ("[W,W]", 1.0, |b: &Brackets| b.ww),
            ("[B,B]", 1.0, |b: &Brackets| b.bb),
        ] {
            let e = EstimateWithCI::mean_of(&top.iter().map(|m| f(&m.brackets)).collect::<Vec<_>>());
            rows.push(
                CheckRow::statistical(format!("bracket {name} T={tag}"), e.point, Rule::Within { target, tolerance: tol }, scale)
                    .with_stderr(e.stderr),
            );
            records.push(record("bracket", json!({"bracket": name, "horizon": t_max, "target": target}), e, top_seeds.clone()));
        }
    }

    let prices: Vec<PathGrid> = top.iter().map(|m| m.price.clone()).collect();
    if let Ok(lev) = leverage_correlation_ensemble(&prices, cfg.estimators.leverage_window) {
        rows.push(CheckRow::info(format!("leverage correlation (price path) T={tag}"), lev.point).with_stderr(lev.stderr));
        records.push(record(
            "leverage_correlation",
            json!({"window": cfg.estimators.leverage_window, "horizon": t_max}),
            lev,
            top_seeds.clone(),
        ));
    }

    // marginal at t = 1 against the limit model
    let model = limit_model(cfg, &spec)?;
    files.push(out.write("params.json", (serde_json::to_string_pretty(&model)? + "\n").as_bytes())?);
    let sampler = LimitSampler::new(&model, cfg, cfg.limit.steps)?;
    let limit_end = par_map(&pool, (0..cfg.checks.limit_samples).collect(), |p| {
        let seed = SeedRecord::for_pair(cfg.master_seed, LIMIT_STREAM, p);
        Ok((seed_entry("limit", None, p, seed), sampler.sample(seed)?.price.value_at(1.0, 0.0)))
    })?;
    let limit_values: Vec<f64> = limit_end.iter().map(|x| x.1).collect();
    seeds.extend(limit_end.into_iter().map(|x| x.0));
    files.push(out.write("paths/limit_price_1.csv", &sample_csv(&limit_values)?)?);
    let micro_values: Vec<f64> = top.iter().map(|m| m.price_1).collect();
    let ks = ks_distance(&micro_values, &limit_values)?;
    let (limit_name, bound) = match model {
        LimitModel::Heston(_) => ("Heston", ks.critical_1pct),
        LimitModel::RoughHeston(_) => ("rough Heston", cfg.checks.heavy_ks_max),
    };
    rows.push(CheckRow::statistical(
        format!("KS micro vs {limit_name} price at t=1, T={tag}"),
        ks.statistic,
        Rule::Below { bound },
        scale,
    ));
    let mut limit_stats = BTreeMap::new();
    mean_stats(&mut limit_stats, "price_1", &limit_values);
    limit_stats.insert("ks_statistic".into(), ks.statistic);
    limit_stats.insert("ks_p_value".into(), ks.p_value);
    summaries.push(GroupSummary { label: "limit".into(), horizon: None, paths: limit_values.len(), stats: limit_stats });

    if let (true, AsymptoticSequence::Heavy { alpha, .. }) = (heavy, cfg.sequence) {
        let hs = LimitSampler::new(&model, cfg, Some(cfg.checks.hurst_steps))?;
        let ens = par_map(&pool, (0..cfg.checks.hurst_paths).collect(), |p| {
            let seed = SeedRecord::for_pair(cfg.master_seed, HURST_STREAM, p);
            let v = hs.sample(seed)?.variance;
            let file = out.write(&format!("paths/hurst_variance{p:04}.csv"), &csv_bytes(|b| v.write_csv(b))?)?;
            Ok((seed_entry("hurst", None, p, seed), v, file))
        })?;
        let [lo, hi, count] = cfg.estimators.hurst_lags;
        let lags = log_lags(lo, hi, count);
        let paths: Vec<PathGrid> = ens.iter().map(|e| e.1.clone()).collect();
        let est = hurst_moment_scaling(&paths, &cfg.estimators.hurst_moments, &lags)?;
        rows.push(
            CheckRow::statistical(
                "Hurst exponent of rough Heston variance",
                est.point,
                Rule::Within { target: alpha - 0.5, tolerance: cfg.checks.hurst_half_width },
                scale,
            )
            .with_stderr(est.stderr),
        );
        let streams: Vec<u64> = ens.iter().map(|e| e.0.seed.stream).collect();
        records.push(record(
            "hurst_moment_scaling",
            json!({"moments": cfg.estimators.hurst_moments, "lags": lags, "steps": cfg.checks.hurst_steps}),
            est,
            json!({"master_seed": cfg.master_seed, "streams": streams}),
        ));
        for (s, _, f) in ens {
            seeds.push(s);
            files.push(f);
        }
    }

    if cfg.checks.identities {
        let zs: Vec<f64> = (1..=100).map(|k| k as f64 / 10.0).collect();
        rows.push(CheckRow::identity("Mittag-Leffler Laplace transform", ml_laplace_residual(0.6, 1.0, &zs)?, 1e-6));
        rows.push(CheckRow::identity("fractional integral of the density", fractional_identity_residual(0.6, 1.0, 1e-3)?, 1e-4));
        let (closed, wh) = exponential_resolvent_residuals(1e-3, 5.0)?;
        rows.push(CheckRow::identity("resolvent vs closed form", closed, 1e-6));
        rows.push(CheckRow::identity("Wiener-Hopf residual", wh, 1e-8));
    }

    let report = VerifyReport::new(hash.clone(), rows, records);
    files.push(out.write("report.json", (serde_json::to_string_pretty(&report)? + "\n").as_bytes())?);
    files.push(out.write("report.txt", report.to_table().as_bytes())?);
    let manifest = RunManifest {
        command: "verify".into(),
        library_version: LIBRARY_VERSION.into(),
        config_hash: hash,
        config: cfg.clone(),
        model: spec,
        seeds,
        summaries,
        files,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    out.write_manifest(&manifest)?;
    Ok((manifest, report))
}
