use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hawkes_scaling::estimators::{
    hurst_moment_scaling, ks_distance, leverage_correlation_ensemble, log_lags, quadratic_covariation, EstimateWithCI,
    EstimatorRecord, HURST_MOMENTS,
};
use hawkes_scaling::experiment::{run_limit, run_simulate, run_verify, sha256_hex, ExperimentConfig, RunOptions};
use hawkes_scaling::hawkes::{Brackets, EventStream};
use hawkes_scaling::special::{mittag_leffler, ml_cdf_grid, ml_density, MittagLefflerParams};
use hawkes_scaling::{Error, PathGrid, Result};

#[derive(Parser)]
#[command(name = "hawkes-scaling", version, about = "Scaling-limit experiments for the Hawkes tick price model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the tick model over the horizon ladder.
    Simulate(RunArgs),
    /// Map to the limit model and simulate its paths.
    Limit(RunArgs),
    /// Run the configured checks; exits non-zero if any fails.
    Verify(RunArgs),
    /// Tabulate Mittag-Leffler functions.
    MlEval(MlArgs),
    /// Run an estimator on existing CSV files.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Override a top-level scalar field, e.g. `--set master_seed=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set master_seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for `--set output_dir=DIR`.
    #[arg(long)]
    outdir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, RunOptions)> {
        let mut ov = Vec::new();
        for s in &self.overrides {
            let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("`{s}` is not KEY=VALUE")))?;
            ov.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(seed) = self.seed {
            ov.push(("master_seed".into(), seed.to_string()));
        }
        let mut cfg = ExperimentConfig::load(&self.config, &ov)?;
        if let Some(dir) = &self.outdir {
            // relative to the working directory, not the config file
            cfg.output_dir = std::path::absolute(dir)?;
        }
        Ok((cfg, RunOptions { workers: self.workers }))
    }
}

#[derive(Args)]
struct MlArgs {
    #[arg(long)]
    alpha: f64,
    /// Second Mittag-Leffler parameter; defaults to `alpha`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Largest `t` of the table.
    #[arg(long, default_value_t = 1.0)]
    t_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Evaluate `E_{alpha,beta}(z)` at these arguments instead of a time table.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<f64>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    /// Leverage correlation over price paths (`time,value`).
    Leverage,
    /// Moment-scaling Hurst exponent over paths on a common grid.
    Hurst,
    /// Quadratic covariation of two paths.
    Covariation,
    /// Two-sample Kolmogorov-Smirnov test on one column of two files.
    Ks,
    /// Mean brackets of event files.
    Brackets,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(value_enum)]
    kind: EstimatorKind,
    /// Input CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Leverage window as a fraction of the horizon.
    #[arg(long, default_value_t = 0.02)]
    window: f64,
    /// Hurst lags `lo,hi,count` in grid steps.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 64, 7])]
    lags: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = HURST_MOMENTS)]
    moments: Vec<f64>,
    /// Column used by `ks`.
    #[arg(long, default_value = "value")]
    column: String,
    /// Liquidity asymmetry used by `brackets`.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn ml_eval(a: &MlArgs) -> Result<()> {
    let beta = a.beta.unwrap_or(a.alpha);
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    if !a.z.is_empty() {
        w.write_record(["z", "value"])?;
        for &z in &a.z {
            w.write_record([z.to_string(), mittag_leffler(a.alpha, beta, z)?.to_string()])?;
        }
    } else {
        let p = MittagLefflerParams::density(a.alpha, a.lambda)?;
        let times: Vec<f64> = (1..=a.points).map(|k| a.t_max * k as f64 / a.points as f64).collect();
        let cdf = ml_cdf_grid(&p, &times)?;
        w.write_record(["t", "ml", "density", "cdf"])?;
        for (t, f) in times.iter().zip(cdf) {
            let ml = mittag_leffler(a.alpha, beta, -a.lambda * t.powf(a.alpha))?;
            w.write_record([t.to_string(), ml.to_string(), ml_density(&p, *t)?.to_string(), f.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_paths(files: &[PathBuf]) -> Result<Vec<PathGrid>> {
    files.iter().map(|f| PathGrid::read_csv(File::open(f)?)).collect()
}

fn read_column(file: &Path, name: &str) -> Result<Vec<f64>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(file)?;
    let idx = rd
        .headers()?
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("{} has no column `{name}`", file.display())))?;
    rd.records()
        .map(|r| {
            let r = r?;
            r[idx].trim().parse::<f64>().map_err(|e| Error::Config(format!("{}: {e}", file.display())))
        })
        .collect()
}

fn estimate(a: &EstimateArgs) -> Result<()> {
    let mut inputs = Vec::new();
    for f in &a.inputs {
        inputs.push(json!({ "file": f.display().to_string(), "sha256": sha256_hex(&std::fs::read(f)?) }));
    }
    let two = || -> Result<(&PathBuf, &PathBuf)> {
        match a.inputs.as_slice() {
            [x, y] => Ok((x, y)),
            _ => Err(Error::Config("this estimator takes exactly two inputs".into())),
        }
    };
    let (name, params, e) = match a.kind {
        EstimatorKind::Leverage => {
            let e = leverage_correlation_ensemble(&read_paths(&a.inputs)?, a.window)?;
            ("leverage_correlation", json!({ "window": a.window }), e)
        }
        EstimatorKind::Hurst => {
            let [lo, hi, count] = a.lags[..] else {
                return Err(Error::Config("--lags takes lo,hi,count".into()));
            };
            let lags = log_lags(lo, hi, count);
            let e = hurst_moment_scaling(&read_paths(&a.inputs)?, &a.moments, &lags)?;
            ("hurst_moment_scaling", json!({ "moments": a.moments, "lags": lags }), e)
        }
        EstimatorKind::Covariation => {
            let (x, y) = two()?;
            let v = quadratic_covariation(&PathGrid::read_csv(File::open(x)?)?, &PathGrid::read_csv(File::open(y)?)?)?;
            ("quadratic_covariation", json!({}), EstimateWithCI { point: v, stderr: 0.0, n: 1 })
        }
        EstimatorKind::Ks => {
            let (x, y) = two()?;
            let (sa, sb) = (read_column(x, &a.column)?, read_column(y, &a.column)?);
            let ks = ks_distance(&sa, &sb)?;
            let params = json!({
                "column": a.column,
                "critical_1pct": ks.critical_1pct,
                "p_value": ks.p_value,
                "reject_1pct": ks.reject_1pct,
            });
            ("ks_distance", params, EstimateWithCI { point: ks.statistic, stderr: 0.0, n: sa.len().min(sb.len()) })
        }
        EstimatorKind::Brackets => {
            let beta = a.beta.ok_or_else(|| Error::Config("brackets needs --beta".into()))?;
            let mut wb = Vec::new();
            for f in &a.inputs {
                wb.push(Brackets::from_stream(&EventStream::read_csv(File::open(f)?)?, beta).wb);
            }
            ("bracket", json!({ "bracket": "[W,B]", "beta": beta }), EstimateWithCI::mean_of(&wb))
        }
    };
    let rec = EstimatorRecord::new(name, params, e, json!({ "inputs": inputs }));
    let mut w = output(a.out.as_deref())?;
    writeln!(w, "{}", serde_json::to_string_pretty(&rec)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(a) => {
            let (cfg, opts) = a.load()?;
            let m = run_simulate(&cfg, opts)?;
            println!("simulate: {} files in {} ({:.1} s)", m.files.len(), cfg.output_dir().display(), m.wall_clock_seconds);
            Ok(true)
        }
        Command::Limit(a) => {
            let (cfg, opts) = a.load()?;
            let m = run_limit(&cfg, opts)?;
            println!("limit: {} files in {} ({:.1} s)", m.files.len(), cfg.output_dir().display(), m.wall_clock_seconds);
            Ok(true)
        }
        Command::Verify(a) => {
            let (cfg, opts) = a.load()?;
            let (_, report) = run_verify(&cfg, opts)?;
            print!("{}", report.to_table());
            Ok(report.all_pass)
        }
        Command::MlEval(a) => ml_eval(&a).map(|_| true),
        Command::Estimate(a) => estimate(&a).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
