//! Fixtures shared by the solver benchmarks.

use svreg_core::simgen::{generate, Setting};
use svreg_core::{lambda_max, Dataset, FitConfig, GroupSpec};

pub struct Fixture {
    pub raw: Dataset,
    pub data: Dataset,
    pub groups: GroupSpec,
    pub lambda_max: f64,
}

/// A standardized simulated dataset with its group structure.
pub fn fixture(setting: Setting, n: usize, seed: u64) -> Fixture {
    let sim = generate(setting, n, seed).expect("valid simulation parameters");
    let (data, _) = sim.data.standardize().expect("simulated columns vary");
    let lambda_max = lambda_max(&data, &sim.groups, &FitConfig::default()).expect("valid fixture");
    Fixture {
        raw: sim.data,
        data,
        groups: sim.groups,
        lambda_max,
    }
}

/// Default settings at a fraction of λ_max.
pub fn config_at(f: &Fixture, fraction: f64) -> FitConfig {
    FitConfig::default().with_lambda(fraction * f.lambda_max)
}
