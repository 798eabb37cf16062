//! Command-line surface. Every subcommand setting is optional on the command
//! line so that it can also come from a config file or a replayed manifest.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hurstlab::regcheck::HolderMode;
use hurstlab::sde::ErgodicMode;
use hurstlab::Normalization;
use serde::{Deserialize, Serialize};

use crate::values::{CheckId, Grid, Pairs, SamplerChoice, Switch, WickKind};

#[derive(Debug, Parser)]
#[command(
    name = "hurstlab",
    version,
    about = "Fractional Brownian fields in (time, Hurst) and the tools built on them"
)]
pub struct Cli {
    /// Master seed; per-task seeds are `seed XOR splitmix64(task)`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving CSV/JSON outputs and manifest.json.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for seed-parallel work.
    #[arg(long, global = true, env = "HURSTLAB_THREADS")]
    pub threads: Option<usize>,
    /// Refuse non-dissipative drifts and step-size violations instead of warning.
    #[arg(long, global = true)]
    pub strict: bool,
    /// TOML file with a `[global]` section and one section per subcommand,
    /// or a manifest.json from an earlier run (the subcommand may then be omitted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Draw fractional Brownian fields on a (t, H) grid.
    SampleFbm(SampleFbmArgs),
    /// Draw stationary fractional Ornstein–Uhlenbeck paths.
    SampleFou(SampleFouArgs),
    /// Stationary fOU cross-covariance profile `s,r,envelope`.
    FouCov(FouCovArgs),
    /// Reference (fine Euler) solution of the SDE driven by the field.
    SimulateSde(SdeArgs),
    /// Euler scheme with step γ.
    Euler(EulerArgs),
    /// Wasserstein grid-argmin Hurst estimate.
    EstimateHurst(EstimateArgs),
    /// Monte Carlo and quadrature bound checks.
    Verify(VerifyArgs),
    /// Pair-partition expansion of Gaussian moment products.
    Wick(WickArgs),
    /// Cross-covariance E B_u^H B_v^K.
    Covariance(CovarianceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SampleFbm(_) => "sample-fbm",
            Command::SampleFou(_) => "sample-fou",
            Command::FouCov(_) => "fou-cov",
            Command::SimulateSde(_) => "simulate-sde",
            Command::Euler(_) => "euler",
            Command::EstimateHurst(_) => "estimate-hurst",
            Command::Verify(_) => "verify",
            Command::Wick(_) => "wick",
            Command::Covariance(_) => "covariance",
        }
    }

    /// Empty settings for a subcommand named in a manifest.
    pub fn empty(name: &str) -> Option<Command> {
        Some(match name {
            "sample-fbm" => Command::SampleFbm(Default::default()),
            "sample-fou" => Command::SampleFou(Default::default()),
            "fou-cov" => Command::FouCov(Default::default()),
            "simulate-sde" => Command::SimulateSde(Default::default()),
            "euler" => Command::Euler(Default::default()),
            "estimate-hurst" => Command::EstimateHurst(Default::default()),
            "verify" => Command::Verify(Default::default()),
            "wick" => Command::Wick(Default::default()),
            "covariance" => Command::Covariance(Default::default()),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SampleFbmArgs {
    /// Time grid, `start:step:end` or a comma list.
    #[arg(long)]
    pub t_grid: Option<Grid>,
    /// Hurst grid.
    #[arg(long)]
    pub h_grid: Option<Grid>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// projection or exact.
    #[arg(long)]
    pub sampler: Option<SamplerChoice>,
    /// Noise cell width Δ of the projection sampler (default: the time-grid spacing).
    #[arg(long)]
    pub step: Option<f64>,
    /// unit-variance or raw.
    #[arg(long)]
    pub mode: Option<Normalization>,
    /// Omitted kernel-tail variance budget, sets the truncation L.
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SampleFouArgs {
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub h_grid: Option<Grid>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Exponential-tail weight at which the recursion start is truncated.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub mode: Option<Normalization>,
    #[arg(long)]
    pub replicates: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FouCovArgs {
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    #[arg(long)]
    pub s_grid: Option<Grid>,
    /// Exponent of the envelope `s^{2h_max-2}` (default: max(H, K)).
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SdeArgs {
    /// linear:λ, sin:κ:c or zero.
    #[arg(long)]
    pub drift: Option<String>,
    #[arg(long)]
    pub h_grid: Option<Grid>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Initial point (comma list of length dim; default 0).
    #[arg(long)]
    pub y0: Option<Grid>,
    /// Internal fine step δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out_step: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub mode: Option<Normalization>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EulerArgs {
    #[arg(long)]
    pub drift: Option<String>,
    #[arg(long)]
    pub h_grid: Option<Grid>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub m0: Option<Grid>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of steps N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub mode: Option<Normalization>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct EstimateArgs {
    /// Candidate grid `start:step:end`.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Wasserstein order, 1 or 2.
    #[arg(long)]
    pub p: Option<u32>,
    /// Scheme step γ.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Observation step h.
    #[arg(long)]
    pub h: Option<f64>,
    /// Number of observations n (synthetic data only).
    #[arg(long)]
    pub n: Option<usize>,
    /// Scheme length N (default n).
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    /// Common random numbers across candidates.
    #[arg(long)]
    pub crn: Option<Switch>,
    /// Discarded scheme steps (default ⌈1/(κγ)⌉).
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub drift: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Observations as CSV, one column per component; synthetic data is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// True Hurst index of synthetic data.
    #[arg(long)]
    pub h_true: Option<f64>,
    /// Fine sub-steps per observation step for synthetic data.
    #[arg(long)]
    pub fine: Option<usize>,
    #[arg(long)]
    pub mode: Option<Normalization>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Which check to run.
    #[arg(long)]
    pub check: Option<CheckId>,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    /// Time lags of holder-time.
    #[arg(long)]
    pub lags: Option<Grid>,
    /// Monte Carlo paths (seeds) per statistic.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Accepted distance of the fitted slope from 2H.
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub t_grid: Option<Grid>,
    #[arg(long)]
    pub h_grid: Option<Grid>,
    /// Hurst pairs `a:b,...`.
    #[arg(long)]
    pub h_pairs: Option<Pairs>,
    /// Time pairs `a:b,...`.
    #[arg(long)]
    pub t_pairs: Option<Pairs>,
    /// Time lags of sup-h.
    #[arg(long)]
    pub dts: Option<Grid>,
    /// Moment order of sup-h.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub n_times: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// simple or rectangular.
    #[arg(long)]
    pub holder_mode: Option<HolderMode>,
    #[arg(long)]
    pub drift: Option<String>,
    /// Hurst offsets δ.
    #[arg(long)]
    pub deltas: Option<Grid>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// continuous or discrete.
    #[arg(long)]
    pub ergodic: Option<ErgodicMode>,
    /// Moment order of v-decay.
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long)]
    pub s_grid: Option<Grid>,
    #[arg(long)]
    pub h_max: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub times: Option<Grid>,
    #[arg(long)]
    pub shifts: Option<Grid>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub mode: Option<Normalization>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct WickArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// centered: E ∏(Z_i² - σ²); mixed: E Z_1 Z_2 ∏_{i>=3}(Z_i² - σ²).
    #[arg(long)]
    pub kind: Option<WickKind>,
    /// Largest n expanded symbolically.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct CovarianceArgs {
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long = "H")]
    #[serde(rename = "H")]
    pub big_h: Option<f64>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    #[arg(long)]
    pub mode: Option<Normalization>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}
