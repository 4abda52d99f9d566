use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "svreg", version, about = "Structured varying-coefficient regression")]
pub struct Cli {
    /// JSON file supplying any flag of the subcommand; flags given on the
    /// command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for folds and replications (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a simulated dataset.
    Simulate(SimulateArgs),
    /// Fit one method at one λ.
    Fit(FitArgs),
    /// Fit a warm-started path over a λ grid.
    Path(PathArgs),
    /// Cross-validate λ and refit at the best value.
    Cv(CvArgs),
    /// Replicated simulation study with aggregated tables.
    Bench(BenchArgs),
    /// Recompute selection metrics from saved fits.
    Metrics(MetricsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Path(_) => "path",
            Command::Cv(_) => "cv",
            Command::Bench(_) => "bench",
            Command::Metrics(_) => "metrics",
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingArg {
    S1,
    S2,
    S3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Svreg,
    Plasso,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightModeArg {
    Consistent,
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UniverseArg {
    Variables,
    Coefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoricalArg {
    Grouped,
    PerDummy,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<SettingArg>,
    /// Sample size.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Data files and model options shared by fit, path and cv.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,
    /// Main predictors, CSV with header.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<PathBuf>,
    /// Modifying variables, CSV with header.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<PathBuf>,
    /// Response, single-column CSV with header.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<PathBuf>,
    /// Group file with 1-based `predictor_groups` and `modifier_groups`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub groups: Option<PathBuf>,
    /// Every predictor in its own group. Without a group file all
    /// modifiers form one group.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub singleton_groups: bool,
    /// All penalty weights set to 1.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub unit_weights: bool,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_mode: Option<WeightModeArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Outer convergence tolerance on the objective change.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    /// 1-based Z columns holding 0/1 dummies; they are not rescaled.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dummies: Option<Vec<usize>>,
    /// Fit only the intercept, not the modifier main effects θ₀.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub no_modifier_intercepts: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// λ grid choice: the fine grid 10 → 0.01 in steps of 0.01 by default.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GridArgs {
    /// 60 log-spaced values from 10 to 0.01.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub grid_coarse: bool,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PathArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CvArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Number of folds.
    #[arg(long = "v")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<SettingArg>,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<MethodArg>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    /// Base seed; replication r uses seed + r.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long = "v")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_mode: Option<WeightModeArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<UniverseArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categorical: Option<CategoricalArg>,
    /// Standardize dummy modifiers like continuous ones.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub scale_dummies: bool,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub no_modifier_intercepts: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricsArgs {
    /// fit.json files written by `fit` or `cv`.
    #[arg(long = "fit", num_args = 1..)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<PathBuf>>,
    /// truth.json written by `simulate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<UniverseArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub categorical: Option<CategoricalArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Overlays the flags given on the command line onto a config object.
/// Keys the subcommand does not know are rejected.
pub fn merge<T>(cli: &T, config: Option<serde_json::Value>) -> Result<T, String>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let given = serde_json::to_value(cli).map_err(|e| e.to_string())?;
    let mut base = match config {
        Some(serde_json::Value::Object(m)) => m,
        Some(_) => return Err("config file must hold a JSON object".into()),
        None => serde_json::Map::new(),
    };
    let from_config: Vec<String> = base
        .iter()
        .filter(|(_, v)| !v.is_null() && **v != serde_json::Value::Bool(false))
        .map(|(k, _)| k.clone())
        .collect();
    if let serde_json::Value::Object(m) = given {
        base.extend(m);
    }
    let merged: T = serde_json::from_value(serde_json::Value::Object(base)).map_err(|e| format!("config: {e}"))?;
    let known = serde_json::to_value(&merged).map_err(|e| e.to_string())?;
    if let Some(key) = from_config.iter().find(|k| known.get(k.as_str()).is_none()) {
        return Err(format!("config: unknown key '{key}'"));
    }
    Ok(merged)
}
