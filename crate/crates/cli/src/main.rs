mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use args::{merge, Cli, Command};

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration: 2.
    Usage(String),
    /// Unreadable or invalid input data: 3.
    Data(String),
    /// Non-finite objective, or too many failed replications: 4.
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

fn classify(e: &svreg_core::Error) -> fn(String) -> Failure {
    use svreg_core::Error::*;
    match e {
        NumericFailure { .. } => Failure::Numeric,
        InvalidConfig(_) | InvalidGrid(_) | InvalidFolds(_) => Failure::Usage,
        AtLambda { source, .. } => classify(source),
        _ => Failure::Data,
    }
}

impl From<svreg_core::Error> for Failure {
    fn from(e: svreg_core::Error) -> Self {
        classify(&e)(e.to_string())
    }
}

fn load_config(path: &Option<std::path::PathBuf>) -> Result<Option<serde_json::Value>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

fn resolve<T>(given: &T, config: Option<serde_json::Value>) -> Result<(T, serde_json::Value), Failure>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let merged = merge(given, config).map_err(Failure::Usage)?;
    let value = serde_json::to_value(&merged).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok((merged, value))
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = load_config(&cli.config)?;
    log::debug!("running {}", cli.command.name());
    match &cli.command {
        Command::Simulate(a) => {
            let (a, v) = resolve(a, config)?;
            commands::simulate(&a, v)
        }
        Command::Fit(a) => {
            let (a, v) = resolve(a, config)?;
            commands::fit(&a, v)
        }
        Command::Path(a) => {
            let (a, v) = resolve(a, config)?;
            commands::path(&a, v)
        }
        Command::Cv(a) => {
            let (a, v) = resolve(a, config)?;
            commands::cv(&a, v)
        }
        Command::Bench(a) => {
            let (a, v) = resolve(a, config)?;
            commands::bench(&a, v)
        }
        Command::Metrics(a) => {
            let (a, v) = resolve(a, config)?;
            commands::metrics(&a, v)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
