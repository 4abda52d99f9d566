//! Regularization paths with warm starts and V-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{predict, CoefficientSet, Dataset, FitConfig, GroupSpec};
use crate::solver::{
    check_inputs, fit_lasso_with_design, fit_svreg_with_design, lambda_max_with_design, lasso_lambda_max,
    plasso_config, Design, FitResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svreg,
    Plasso,
    Lasso,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Svreg => "svreg",
            Method::Plasso => "plasso",
            Method::Lasso => "lasso",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svreg" => Ok(Method::Svreg),
            "plasso" | "pliable" => Ok(Method::Plasso),
            "lasso" => Ok(Method::Lasso),
            other => Err(Error::config(format!("unknown method '{other}'"))),
        }
    }
}

/// `{from, from − step, …}` down to `to`, decreasing.
pub fn lambda_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from > to && to > 0.0 && step > 0.0) || !from.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "need from > to > 0 and step > 0, got from = {from}, to = {to}, step = {step}"
        )));
    }
    let count = ((from - to) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from - i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// `n` log-spaced values from `from` down to `to`.
pub fn log_grid(from: f64, to: f64, n: usize) -> Result<Vec<f64>> {
    if !(from > to && to > 0.0) || n < 2 {
        return Err(Error::InvalidGrid(format!(
            "need from > to > 0 and at least 2 points, got from = {from}, to = {to}, n = {n}"
        )));
    }
    let (a, b) = (from.ln(), to.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                from
            } else if i == n - 1 {
                to
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// The desk-scale grid: 60 log-spaced values from 10 to 0.01.
pub fn coarse_grid() -> Vec<f64> {
    log_grid(10.0, 0.01, 60).expect("constant bounds are valid")
}

/// The full grid, 10 to 0.01 in steps of 0.01.
pub fn default_grid() -> Vec<f64> {
    lambda_grid(10.0, 0.01, 0.01).expect("constant bounds are valid")
}

fn check_decreasing(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidGrid("grid values must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly decreasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub fits: Vec<FitResult>,
    pub alpha: f64,
}

/// Group structure and config actually used by a method.
pub fn method_setup(method: Method, d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> (GroupSpec, FitConfig) {
    match method {
        Method::Svreg => (gs.clone(), *cfg),
        Method::Plasso => (GroupSpec::pliable(d.p(), d.k()), plasso_config(cfg)),
        Method::Lasso => (GroupSpec::singletons(d.p(), d.k()), *cfg),
    }
}

/// Single fit of `method` at `cfg.lambda`.
pub fn fit_method(
    method: Method,
    d: &Dataset,
    gs: &GroupSpec,
    cfg: &FitConfig,
    warm: Option<&CoefficientSet>,
) -> Result<FitResult> {
    let (gs, cfg) = method_setup(method, d, gs, cfg);
    check_inputs(d, &gs, &cfg)?;
    let design = Design::for_config(d, &gs, &cfg);
    fit_with(method, &design, d, &gs, &cfg, warm)
}

fn fit_with(
    method: Method,
    design: &Design,
    d: &Dataset,
    gs: &GroupSpec,
    cfg: &FitConfig,
    warm: Option<&CoefficientSet>,
) -> Result<FitResult> {
    match method {
        Method::Lasso => fit_lasso_with_design(design, d, cfg, warm),
        Method::Svreg | Method::Plasso => fit_svreg_with_design(design, d, gs, cfg, warm),
    }
}

/// λ_max of `method` on `d`; for the Lasso the largest absolute
/// correlation of a penalized feature with the intercept-only residual.
pub fn method_lambda_max(method: Method, d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> Result<f64> {
    let (gs, cfg) = method_setup(method, d, gs, cfg);
    check_inputs(d, &gs, &cfg)?;
    let design = Design::for_config(d, &gs, &cfg);
    match method {
        Method::Lasso => Ok(lasso_lambda_max(d, &cfg)),
        _ => Ok(lambda_max_with_design(&design, d, &gs, &cfg)),
    }
}

/// Fits `method` along a decreasing grid, each fit warm-started from the
/// previous solution.
pub fn fit_path(d: &Dataset, gs: &GroupSpec, method: Method, grid: &[f64], cfg: &FitConfig) -> Result<PathResult> {
    check_decreasing(grid)?;
    let (gs, cfg) = method_setup(method, d, gs, cfg);
    check_inputs(d, &gs, &cfg)?;
    let design = Design::for_config(d, &gs, &cfg);
    let mut fits: Vec<FitResult> = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let warm = fits.last().map(|f| &f.coefficients);
        let fit = fit_with(method, &design, d, &gs, &cfg.with_lambda(lambda), warm).map_err(|e| Error::AtLambda {
            lambda,
            source: Box::new(e),
        })?;
        fits.push(fit);
    }
    Ok(PathResult {
        lambdas: grid.to_vec(),
        fits,
        alpha: cfg.alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVResult {
    pub method: Method,
    pub lambdas: Vec<f64>,
    pub mean_mse: Vec<f64>,
    /// One row per fold, one entry per λ.
    pub fold_mse: Vec<Vec<f64>>,
    pub fold_sizes: Vec<usize>,
    pub best_lambda: f64,
    pub best_index: usize,
    pub seed: u64,
    /// Fold index of each row.
    pub folds: Vec<usize>,
}

/// Seeded fold labels: row `perm[i]` goes to fold `i mod V`.
pub fn fold_assignment(n: usize, v: usize, seed: u64) -> Result<Vec<usize>> {
    if v < 2 {
        return Err(Error::InvalidFolds(format!("need at least 2 folds, got {v}")));
    }
    if v > n {
        return Err(Error::InvalidFolds(format!("{v} folds requested for {n} rows")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut folds = vec![0; n];
    for (i, &row) in perm.iter().enumerate() {
        folds[row] = i % v;
    }
    Ok(folds)
}

/// V-fold cross-validation over `grid` on raw (unstandardized) data.
/// Each training fold is standardized on its own rows and the held-out rows
/// are mapped with the same transform; MSE is in the units of y.
pub fn cross_validate(
    d: &Dataset,
    gs: &GroupSpec,
    method: Method,
    grid: &[f64],
    v: usize,
    cfg: &FitConfig,
    seed: u64,
) -> Result<CVResult> {
    check_decreasing(grid)?;
    if d.standardized {
        return Err(Error::config(
            "cross-validation expects raw data; it standardizes each training fold",
        ));
    }
    gs.check_dims(d.p(), d.k())?;
    let folds = fold_assignment(d.n(), v, seed)?;
    let per_fold: Vec<Result<(usize, Vec<f64>)>> = (0..v)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..d.n()).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..d.n()).filter(|&i| folds[i] == f).collect();
            if test.is_empty() || train.len() < 2 {
                return Err(Error::InvalidFolds(format!("fold {f} is empty")));
            }
            let (train_d, record) = d.select_rows(&train).standardize()?;
            let test_d = record.apply(&d.select_rows(&test))?;
            let path = fit_path(&train_d, gs, method, grid, cfg)?;
            let mses = path
                .fits
                .iter()
                .map(|fit| {
                    let yhat = predict(&test_d, &fit.coefficients)?;
                    Ok((&test_d.y - yhat).norm_squared() / test.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((test.len(), mses))
        })
        .collect();
    let mut fold_mse = Vec::with_capacity(v);
    let mut fold_sizes = Vec::with_capacity(v);
    for r in per_fold {
        let (size, mses) = r?;
        fold_sizes.push(size);
        fold_mse.push(mses);
    }
    let mean_mse = weighted_mean_mse(&fold_mse, &fold_sizes);
    let best_index = argmin_smallest_lambda(&mean_mse);
    Ok(CVResult {
        method,
        lambdas: grid.to_vec(),
        best_lambda: grid[best_index],
        best_index,
        mean_mse,
        fold_mse,
        fold_sizes,
        seed,
        folds,
    })
}

pub(crate) fn weighted_mean_mse(fold_mse: &[Vec<f64>], sizes: &[usize]) -> Vec<f64> {
    let total: usize = sizes.iter().sum();
    let len = fold_mse.first().map_or(0, |r| r.len());
    (0..len)
        .map(|i| {
            fold_mse
                .iter()
                .zip(sizes)
                .map(|(row, &s)| row[i] * s as f64)
                .sum::<f64>()
                / total as f64
        })
        .collect()
}

/// Index of the minimum; on ties the later index, i.e. the smaller λ of a
/// decreasing grid.
fn argmin_smallest_lambda(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v <= values[best] {
            best = i;
        }
    }
    best
}

impl CVResult {
    /// Fold-size weighted mean of `fold_mse`, recomputed.
    pub fn recompute_mean(&self) -> Vec<f64> {
        weighted_mean_mse(&self.fold_mse, &self.fold_sizes)
    }

    pub fn min_mse(&self) -> f64 {
        self.mean_mse[self.best_index]
    }
}
