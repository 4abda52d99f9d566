//! Seeded generators for the three simulation designs.
//!
//! Draw order is fixed: X column by column, then Z column by column (one
//! categorical variable at a time), then the noise, then any extra draws
//! for the correlated predictors. Normals come from the ziggurat sampler of
//! `rand_distr`, uniforms from the same ChaCha20 stream.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, GroupSpec};

pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), ziggurat normals (rand_distr 0.5)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    S1,
    S2,
    S3,
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" | "1" => Ok(Setting::S1),
            "s2" | "2" => Ok(Setting::S2),
            "s3" | "3" => Ok(Setting::S3),
            other => Err(Error::config(format!(
                "unknown setting '{other}' (expected s1, s2 or s3)"
            ))),
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Setting::S1 => "s1",
            Setting::S2 => "s2",
            Setting::S3 => "s3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModifierKind {
    Continuous,
    Categorical,
}

/// A modifying variable and the Z columns that encode it (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModifierVariable {
    pub name: String,
    pub kind: ModifierKind,
    pub columns: Vec<usize>,
}

/// Generating-model support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTruth {
    pub main_relevant: Vec<bool>,
    /// p rows of K flags.
    pub interaction_relevant: Vec<Vec<bool>>,
    pub modifiers: Vec<ModifierVariable>,
}

impl SelectionTruth {
    pub fn p(&self) -> usize {
        self.main_relevant.len()
    }

    pub fn k(&self) -> usize {
        self.interaction_relevant.first().map_or(0, |r| r.len())
    }

    /// A modifier variable is relevant when any of its columns interacts
    /// with any predictor in the generating model.
    pub fn modifier_relevant(&self) -> Vec<bool> {
        self.modifiers
            .iter()
            .map(|m| {
                self.interaction_relevant
                    .iter()
                    .any(|row| m.columns.iter().any(|&k| row[k]))
            })
            .collect()
    }

    /// One variable per Z column, all continuous.
    pub fn continuous_modifiers(k: usize) -> Vec<ModifierVariable> {
        (0..k)
            .map(|c| ModifierVariable {
                name: format!("z{}", c + 1),
                kind: ModifierKind::Continuous,
                columns: vec![c],
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedDataset {
    pub data: Dataset,
    pub groups: GroupSpec,
    pub truth: SelectionTruth,
    pub seed: u64,
    pub setting: Setting,
    /// The ε draw, kept so that y − ε can be checked against the model.
    pub noise: DVector<f64>,
}

/// Metadata written next to generated data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub setting: Setting,
    pub n: usize,
    pub seed: u64,
    pub rng: String,
}

impl SimulatedDataset {
    pub fn meta(&self) -> SimulationMeta {
        SimulationMeta {
            setting: self.setting,
            n: self.data.n(),
            seed: self.seed,
            rng: RNG_ALGORITHM.to_string(),
        }
    }
}

pub fn generate(setting: Setting, n: usize, seed: u64) -> Result<SimulatedDataset> {
    match setting {
        Setting::S1 => gen_setting1(n, seed),
        Setting::S2 => gen_setting2(n, seed),
        Setting::S3 => gen_setting3(n, seed),
    }
}

const P: usize = 50;
const N_CONTINUOUS: usize = 10;
const N_CATEGORICAL: usize = 10;

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::config(format!("sample size must be at least 2, got {n}")));
    }
    Ok(())
}

fn normal_matrix(rng: &mut ChaCha20Rng, n: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, cols);
    for j in 0..cols {
        for i in 0..n {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

fn normal_vector(rng: &mut ChaCha20Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Z for settings 1 and 2: ten standard normals then ten three-level
/// categoricals, each as two dummies with level 1 as baseline.
fn structured_modifiers(rng: &mut ChaCha20Rng, n: usize) -> (DMatrix<f64>, Vec<ModifierVariable>) {
    let k = N_CONTINUOUS + 2 * N_CATEGORICAL;
    let mut z = DMatrix::zeros(n, k);
    z.columns_mut(0, N_CONTINUOUS)
        .copy_from(&normal_matrix(rng, n, N_CONTINUOUS));
    for v in 0..N_CATEGORICAL {
        let col = N_CONTINUOUS + 2 * v;
        for i in 0..n {
            let u: f64 = rng.random();
            let level = ((3.0 * u) as usize).min(2);
            if level > 0 {
                z[(i, col + level - 1)] = 1.0;
            }
        }
    }
    let mut vars = SelectionTruth::continuous_modifiers(N_CONTINUOUS);
    for v in 0..N_CATEGORICAL {
        let col = N_CONTINUOUS + 2 * v;
        vars.push(ModifierVariable {
            name: format!("c{}", v + 1),
            kind: ModifierKind::Categorical,
            columns: vec![col, col + 1],
        });
    }
    (z, vars)
}

fn structured_modifier_groups(vars: &[ModifierVariable]) -> Vec<Vec<usize>> {
    vars.iter().map(|v| v.columns.clone()).collect()
}

/// y = x₁ + x₂ + (1 + z₁)x₄ + (1 − z₂ + z₁₁ − z₁₂)x₅ + ε
fn structured_response(x: &DMatrix<f64>, z: &DMatrix<f64>, eps: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(x.nrows(), |i, _| {
        x[(i, 0)]
            + x[(i, 1)]
            + (1.0 + z[(i, 0)]) * x[(i, 3)]
            + (1.0 - z[(i, 1)] + z[(i, 10)] - z[(i, 11)]) * x[(i, 4)]
            + eps[i]
    })
}

fn structured_truth(k: usize, vars: Vec<ModifierVariable>) -> SelectionTruth {
    let mut main_relevant = vec![false; P];
    for j in [0, 1, 3, 4] {
        main_relevant[j] = true;
    }
    let mut interaction_relevant = vec![vec![false; k]; P];
    for (j, m) in [(3, 0), (4, 1), (4, 10), (4, 11)] {
        interaction_relevant[j][m] = true;
    }
    SelectionTruth {
        main_relevant,
        interaction_relevant,
        modifiers: vars,
    }
}

fn dataset(y: DVector<f64>, x: DMatrix<f64>, z: DMatrix<f64>, vars: &[ModifierVariable]) -> Result<Dataset> {
    let dummies: Vec<usize> = vars
        .iter()
        .filter(|v| v.kind == ModifierKind::Categorical)
        .flat_map(|v| v.columns.iter().copied())
        .collect();
    Dataset::new(y, x, z)?.with_dummy_columns(&dummies)
}

/// Independent predictors with structured modifiers.
pub fn gen_setting1(n: usize, seed: u64) -> Result<SimulatedDataset> {
    check_n(n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = normal_matrix(&mut rng, n, P);
    let (z, vars) = structured_modifiers(&mut rng, n);
    let eps = normal_vector(&mut rng, n);
    let y = structured_response(&x, &z, &eps);
    let k = z.ncols();
    let groups = GroupSpec::new(
        (0..P).map(|j| vec![j]).collect(),
        structured_modifier_groups(&vars),
        P,
        k,
    )?;
    Ok(SimulatedDataset {
        data: dataset(y, x, z, &vars)?,
        groups,
        truth: structured_truth(k, vars),
        seed,
        setting: Setting::S1,
        noise: eps,
    })
}

/// Setting 1 with x₃ and x₆ built from x₁, x₂ and x₄, x₅.
pub fn gen_setting2(n: usize, seed: u64) -> Result<SimulatedDataset> {
    check_n(n)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut x = normal_matrix(&mut rng, n, P);
    let (z, vars) = structured_modifiers(&mut rng, n);
    let eps = normal_vector(&mut rng, n);
    let gamma = normal_vector(&mut rng, n);
    let delta = normal_vector(&mut rng, n);
    for i in 0..n {
        x[(i, 2)] = 2.0 / 3.0 * x[(i, 0)] + 2.0 / 3.0 * x[(i, 1)] + gamma[i] / 3.0;
        x[(i, 5)] = 2.0 / 3.0 * x[(i, 3)] + 2.0 / 3.0 * x[(i, 4)] + delta[i] / 3.0;
    }
    let y = structured_response(&x, &z, &eps);
    let k = z.ncols();
    let mut predictor_groups = vec![vec![0, 1, 2], vec![3, 4, 5]];
    predictor_groups.extend((6..P).map(|j| vec![j]));
    let groups = GroupSpec::new(predictor_groups, structured_modifier_groups(&vars), P, k)?;
    Ok(SimulatedDataset {
        data: dataset(y, x, z, &vars)?,
        groups,
        truth: structured_truth(k, vars),
        seed,
        setting: Setting::S2,
        noise: eps,
    })
}

/// Independent predictors with twenty Bernoulli(½) modifiers, no structure.
pub fn gen_setting3(n: usize, seed: u64) -> Result<SimulatedDataset> {
    check_n(n)?;
    const K: usize = 20;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let x = normal_matrix(&mut rng, n, P);
    let mut z = DMatrix::zeros(n, K);
    for k in 0..K {
        for i in 0..n {
            if rng.random::<f64>() < 0.5 {
                z[(i, k)] = 1.0;
            }
        }
    }
    let eps = normal_vector(&mut rng, n);
    let y = DVector::from_fn(n, |i, _| {
        x[(i, 0)] + x[(i, 1)] + (1.0 + z[(i, 0)]) * x[(i, 2)] + (1.0 - z[(i, 1)]) * x[(i, 3)] + eps[i]
    });
    let mut main_relevant = vec![false; P];
    for j in 0..4 {
        main_relevant[j] = true;
    }
    let mut interaction_relevant = vec![vec![false; K]; P];
    interaction_relevant[2][0] = true;
    interaction_relevant[3][1] = true;
    Ok(SimulatedDataset {
        data: Dataset::new(y, x, z)?,
        groups: GroupSpec::singletons(P, K),
        truth: SelectionTruth {
            main_relevant,
            interaction_relevant,
            modifiers: SelectionTruth::continuous_modifiers(K),
        },
        seed,
        setting: Setting::S3,
        noise: eps,
    })
}
