//! Config-driven Monte Carlo runs: simulation over a horizon ladder, limit
//! model paths and the verification report.
//!
//! Output layout: `outdir/{manifest.json, params.json, paths/*.csv, report.json, report.txt}`.

mod config;
pub mod identities;
mod manifest;
mod runs;
mod verify;

pub use config::{apply_overrides, CheckSettings, EstimatorSettings, ExperimentConfig, LimitSettings, ModelRef, PathCounts};
pub use manifest::{config_hash, horizon_tag, sha256_hex, FileEntry, GroupSummary, PathSeed, RunManifest, LIBRARY_VERSION};
pub use runs::{limit_model, run_limit, run_simulate, LimitModel, RunOptions, HURST_STREAM, LIMIT_STREAM};
pub use verify::{run_verify, CheckRow, Rule, RowKind, VerifyReport};
