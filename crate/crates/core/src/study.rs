//! Replicated simulation study: generate, cross-validate each method,
//! refit on the full sample, score selection, aggregate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{
    average_roc, confusion_rates, difference_curve, percent_selected_each, selection_mask, CategoricalScoring,
    Category, ConfusionRates, PercentTable, RocPoint, Scoring, SelectionMask, DEFAULT_TOL,
};
use crate::model::FitConfig;
use crate::simgen::{generate, SelectionTruth, Setting};
use crate::tuning::{coarse_grid, cross_validate, fit_path, Method};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub setting: Setting,
    pub n: usize,
    pub methods: Vec<Method>,
    pub replications: usize,
    pub base_seed: u64,
    pub grid: Vec<f64>,
    pub folds: usize,
    pub fit: FitConfig,
    pub scoring: Scoring,
    /// Standardize 0/1 dummy modifiers like every other column.
    #[serde(default)]
    pub scale_dummies: bool,
}

impl StudyConfig {
    /// Desk-scale defaults: N = 100, coarse grid, 10 folds, α = 0.5.
    pub fn new(setting: Setting, methods: Vec<Method>, replications: usize, base_seed: u64) -> Self {
        StudyConfig {
            setting,
            n: 100,
            methods,
            replications,
            base_seed,
            grid: coarse_grid(),
            folds: 10,
            fit: FitConfig::default(),
            scoring: Scoring::default(),
            scale_dummies: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub best_lambda: f64,
    pub cv_mse: f64,
    pub rates: ConfusionRates,
    pub mask: SelectionMask,
    pub roc: Vec<RocPoint>,
    /// Active predictor groups along the full-sample path.
    pub active_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub replication: usize,
    pub seed: u64,
    pub truth: SelectionTruth,
    pub methods: Vec<MethodOutcome>,
}

impl ReplicationOutcome {
    pub fn method(&self, m: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|o| o.method == m)
    }
}

pub fn run_replication(cfg: &StudyConfig, replication: usize) -> Result<ReplicationOutcome> {
    let seed = cfg.base_seed.wrapping_add(replication as u64);
    let mut sim = generate(cfg.setting, cfg.n, seed)?;
    if cfg.scale_dummies {
        sim.data.z_dummy.iter_mut().for_each(|d| *d = false);
    }
    let (std_data, _) = sim.data.standardize()?;
    let mut methods = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let cv = cross_validate(&sim.data, &sim.groups, method, &cfg.grid, cfg.folds, &cfg.fit, seed)?;
        let path = fit_path(&std_data, &sim.groups, method, &cfg.grid, &cfg.fit)?;
        let roc = crate::metrics::roc_points(&path, &sim.truth, cfg.scoring);
        let best = &path.fits[cv.best_index];
        let mask = selection_mask(&best.coefficients, DEFAULT_TOL);
        let rates = confusion_rates(&mask, &sim.truth, cfg.scoring);
        methods.push(MethodOutcome {
            method,
            best_lambda: cv.best_lambda,
            cv_mse: cv.min_mse(),
            rates,
            mask,
            roc,
            active_sizes: path.fits.iter().map(|f| f.active_groups.len()).collect(),
        });
    }
    Ok(ReplicationOutcome {
        replication,
        seed,
        truth: sim.truth,
        methods,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub outcomes: Vec<ReplicationOutcome>,
    pub failures: Vec<ReplicationFailure>,
}

/// Runs every replication on the current rayon pool. Failed replications
/// are recorded and left out of the aggregates.
pub fn run_study(cfg: &StudyConfig) -> StudyResult {
    let results: Vec<(usize, Result<ReplicationOutcome>)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| (rep, run_replication(cfg, rep)))
        .collect();
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (rep, r) in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                log::warn!("replication {rep} failed: {e}");
                failures.push(ReplicationFailure {
                    replication: rep,
                    seed: cfg.base_seed.wrapping_add(rep as u64),
                    error: e.to_string(),
                });
            }
        }
    }
    StudyResult {
        config: cfg.clone(),
        outcomes,
        failures,
    }
}

/// Mean and standard error over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Option<Estimate> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean, se })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub percent: Vec<(Category, Option<Estimate>)>,
    pub fdr: Estimate,
    pub sensitivity: Estimate,
    pub specificity: Estimate,
    pub geo_mean: Estimate,
    pub mse: Estimate,
    /// (TPR level, mean FPR).
    pub roc: Vec<(f64, f64)>,
    pub difference: Vec<(Category, Option<f64>)>,
}

impl MethodSummary {
    pub fn percent(&self, cat: Category) -> Option<f64> {
        self.percent
            .iter()
            .find(|(c, _)| *c == cat)
            .and_then(|(_, e)| e.map(|e| e.mean))
    }

    pub fn fpr_at(&self, tpr: f64) -> Option<f64> {
        self.roc.iter().find(|(t, _)| (t - tpr).abs() < 1e-9).map(|(_, f)| *f)
    }
}

/// TPR levels of the averaged ROC curve: 0, 0.05, …, 1.
pub fn roc_levels() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

impl StudyResult {
    pub fn failure_fraction(&self) -> f64 {
        if self.config.replications == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.config.replications as f64
        }
    }

    pub fn summary(&self, method: Method) -> Option<MethodSummary> {
        let per: Vec<(&MethodOutcome, &SelectionTruth)> = self
            .outcomes
            .iter()
            .filter_map(|o| o.method(method).map(|m| (m, &o.truth)))
            .collect();
        if per.is_empty() {
            return None;
        }
        let collect = |f: &dyn Fn(&MethodOutcome) -> f64| -> Estimate {
            Estimate::of(&per.iter().map(|(m, _)| f(m)).collect::<Vec<_>>()).expect("non-empty")
        };
        let categorical = self.config.scoring.categorical;
        let percent = percent_estimates(&per, categorical);
        let table = PercentTable {
            entries: percent.iter().map(|(c, e)| (*c, e.map(|e| e.mean))).collect(),
        };
        debug_assert_eq!(
            table,
            percent_selected_each(per.iter().map(|(m, t)| (&m.mask, *t)), categorical)
        );
        let curves: Vec<Vec<RocPoint>> = per.iter().map(|(m, _)| m.roc.clone()).collect();
        Some(MethodSummary {
            method,
            fdr: collect(&|m| m.rates.fdr),
            sensitivity: collect(&|m| m.rates.sensitivity),
            specificity: collect(&|m| m.rates.specificity),
            geo_mean: collect(&|m| m.rates.geo_mean),
            mse: collect(&|m| m.cv_mse),
            roc: average_roc(&curves, &roc_levels()),
            difference: difference_curve(&table),
            percent,
        })
    }

    fn summaries(&self) -> Vec<MethodSummary> {
        self.config.methods.iter().filter_map(|&m| self.summary(m)).collect()
    }

    /// Rows metric×category, one column per method, replication means.
    pub fn table_csv(&self) -> String {
        self.table(|e| e.mean)
    }

    /// Same shape as [`Self::table_csv`] with standard errors.
    pub fn table_se_csv(&self) -> String {
        self.table(|e| e.se)
    }

    fn table(&self, pick: fn(&Estimate) -> f64) -> String {
        let sums = self.summaries();
        let mut out = String::from("metric");
        for s in &sums {
            out.push(',');
            out.push_str(s.method.name());
        }
        out.push('\n');
        for (i, cat) in Category::ALL.iter().enumerate() {
            out.push_str("percent/");
            out.push_str(cat.label());
            for s in &sums {
                out.push(',');
                out.push_str(&fmt_opt(s.percent[i].1.as_ref().map(pick)));
            }
            out.push('\n');
        }
        let rows: [(&str, fn(&MethodSummary) -> &Estimate); 5] = [
            ("fdr", |s| &s.fdr),
            ("sensitivity", |s| &s.sensitivity),
            ("specificity", |s| &s.specificity),
            ("geo_mean", |s| &s.geo_mean),
            ("mse", |s| &s.mse),
        ];
        for (name, get) in rows {
            out.push_str(name);
            for s in &sums {
                out.push(',');
                out.push_str(&fmt(pick(get(s))));
            }
            out.push('\n');
        }
        out
    }

    /// Replication-averaged ROC curves: method, TPR level, mean FPR.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("method,tpr,mean_fpr\n");
        for s in self.summaries() {
            for (t, f) in &s.roc {
                out.push_str(&format!("{},{},{}\n", s.method.name(), fmt(*t), fmt(*f)));
            }
        }
        out
    }

    /// Per-replication ROC points along the λ grid.
    pub fn roc_points_csv(&self) -> String {
        let mut out = String::from("method,replication,lambda,fpr,tpr\n");
        for &m in &self.config.methods {
            for o in &self.outcomes {
                if let Some(mo) = o.method(m) {
                    for p in &mo.roc {
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            m.name(),
                            o.replication,
                            fmt(p.lambda),
                            fmt(p.fpr),
                            fmt(p.tpr)
                        ));
                    }
                }
            }
        }
        out
    }

    pub fn diffcurve_csv(&self) -> String {
        let mut out = String::from("method,category,difference\n");
        for s in self.summaries() {
            for (c, v) in &s.difference {
                out.push_str(&format!("{},{},{}\n", s.method.name(), c.label(), fmt_opt(*v)));
            }
        }
        out
    }
}

fn percent_estimates(
    per: &[(&MethodOutcome, &SelectionTruth)],
    categorical: CategoricalScoring,
) -> Vec<(Category, Option<Estimate>)> {
    let fractions: Vec<Vec<(Category, Option<f64>)>> = per
        .iter()
        .map(|(m, t)| crate::metrics::selected_fractions(&m.mask, t, categorical))
        .collect();
    Category::ALL
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let vals: Vec<f64> = fractions.iter().filter_map(|f| f[i].1).collect();
            (c, Estimate::of(&vals))
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt)
}
