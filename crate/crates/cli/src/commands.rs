use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use svreg_core::io::{
    read_groups, read_json, read_matrix_csv, read_vector_csv, write_json, write_matrix_csv, write_text,
    write_vector_csv,
};
use svreg_core::metrics::{metrics_report, CategoricalScoring, MetricsReport, Scoring, Universe};
use svreg_core::simgen::{generate, SelectionTruth, Setting};
use svreg_core::study::{run_study, ReplicationFailure, StudyConfig};
use svreg_core::tuning::{coarse_grid, cross_validate, default_grid, fit_method, fit_path, CVResult, Method};
use svreg_core::{CoefficientRecord, Dataset, FitConfig, FitResult, GroupSpec, StandardizationRecord, WeightMode};

use crate::args::*;
use crate::manifest::{digest, FileDigest, RunManifest};
use crate::Failure;

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, Failure> {
    v.clone()
        .ok_or_else(|| Failure::Usage(format!("missing required flag --{flag}")))
}

fn setting(s: SettingArg) -> Setting {
    match s {
        SettingArg::S1 => Setting::S1,
        SettingArg::S2 => Setting::S2,
        SettingArg::S3 => Setting::S3,
    }
}

fn method(m: MethodArg) -> Method {
    match m {
        MethodArg::Svreg => Method::Svreg,
        MethodArg::Plasso => Method::Plasso,
        MethodArg::Lasso => Method::Lasso,
    }
}

fn scoring(u: Option<UniverseArg>, c: Option<CategoricalArg>) -> Scoring {
    Scoring {
        universe: match u {
            Some(UniverseArg::Coefficients) => Universe::Coefficients,
            _ => Universe::Variables,
        },
        categorical: match c {
            Some(CategoricalArg::PerDummy) => CategoricalScoring::PerDummy,
            _ => CategoricalScoring::Grouped,
        },
    }
}

fn weight_mode(w: Option<WeightModeArg>) -> WeightMode {
    match w {
        Some(WeightModeArg::PaperLiteral) => WeightMode::PaperLiteral,
        _ => WeightMode::Consistent,
    }
}

fn grid(g: &GridArgs) -> Vec<f64> {
    if g.grid_coarse {
        coarse_grid()
    } else {
        default_grid()
    }
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = required(out, "out")?;
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Data(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Writes the manifest last, with digests of everything written before it.
fn finish(dir: &Path, mut manifest: RunManifest, outputs: &[&str]) -> Result<(), Failure> {
    for name in outputs {
        let path = dir.join(name);
        let sha256 = digest(&path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        manifest.outputs.push(FileDigest {
            path: name.to_string(),
            sha256,
        });
    }
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SimulationMetaFile {
    #[serde(flatten)]
    meta: svreg_core::simgen::SimulationMeta,
    /// 1-based Z columns holding 0/1 indicators.
    dummy_columns: Vec<usize>,
}

pub fn simulate(a: &SimulateArgs, config: serde_json::Value) -> Result<(), Failure> {
    let s = setting(required(&a.setting, "setting")?);
    let n = required(&a.n, "n")?;
    let seed = required(&a.seed, "seed")?;
    let dir = out_dir(&a.out)?;
    let sim = generate(s, n, seed)?;
    let d = &sim.data;
    write_matrix_csv(&dir.join("X.csv"), &d.x_names, &d.x)?;
    write_matrix_csv(&dir.join("Z.csv"), &d.z_names, &d.z)?;
    write_vector_csv(&dir.join("y.csv"), "y", &d.y)?;
    write_json(&dir.join("groups.json"), &sim.groups.to_file())?;
    write_json(&dir.join("truth.json"), &sim.truth)?;
    let meta = SimulationMetaFile {
        meta: sim.meta(),
        dummy_columns: (0..d.k()).filter(|&k| d.z_dummy[k]).map(|k| k + 1).collect(),
    };
    write_json(&dir.join("meta.json"), &meta)?;
    finish(
        &dir,
        RunManifest::new("simulate", config, vec![seed]),
        &["X.csv", "Z.csv", "y.csv", "groups.json", "truth.json", "meta.json"],
    )
}

/// Raw data, the group structure for the chosen method and the fit settings.
struct Problem {
    data: Dataset,
    groups: GroupSpec,
    method: Method,
    config: FitConfig,
    inputs: Vec<PathBuf>,
}

fn load_problem(m: &ModelArgs) -> Result<Problem, Failure> {
    let method = method(required(&m.method, "method")?);
    let (xp, zp, yp) = (required(&m.x, "x")?, required(&m.z, "z")?, required(&m.y, "y")?);
    let (x_names, x) = read_matrix_csv(&xp)?;
    let (z_names, z) = read_matrix_csv(&zp)?;
    let (_, y) = read_vector_csv(&yp)?;
    let k = z.ncols();
    let mut data = Dataset::with_names(y, x, z, x_names, z_names, vec![false; k])?;
    if let Some(dummies) = &m.dummies {
        if dummies.contains(&0) {
            return Err(Failure::Usage("--dummies takes 1-based column numbers".into()));
        }
        let zero_based: Vec<usize> = dummies.iter().map(|c| c - 1).collect();
        data = data.with_dummy_columns(&zero_based)?;
    }
    let mut inputs = vec![xp, zp, yp];
    let (p, k) = (data.p(), data.k());
    let file_groups = match &m.groups {
        Some(g) => {
            inputs.push(g.clone());
            Some(GroupSpec::from_file(&read_groups(g)?, p, k)?)
        }
        None => None,
    };
    let groups = match (file_groups, m.singleton_groups) {
        (Some(g), false) => g,
        (Some(g), true) => g.with_singleton_predictors(),
        (None, true) => GroupSpec::pliable(p, k),
        (None, false) if method == Method::Svreg => {
            return Err(Failure::Usage(
                "svreg needs a group structure: provide --groups FILE or pass --singleton-groups".into(),
            ))
        }
        (None, false) => GroupSpec::singletons(p, k),
    };
    if let Some(a) = m.alpha {
        if !(0.0..=1.0).contains(&a) {
            return Err(Failure::Usage(format!("--alpha must lie in [0, 1], got {a}")));
        }
    }
    let mut config = FitConfig {
        alpha: m.alpha.unwrap_or(0.5),
        weight_mode: if m.unit_weights {
            WeightMode::Unit
        } else {
            weight_mode(m.weight_mode)
        },
        modifier_intercepts: !m.no_modifier_intercepts,
        ..FitConfig::default()
    };
    if let Some(t) = m.tol {
        config.tol = t;
    }
    if let Some(it) = m.max_iter {
        config.max_outer_iter = it;
    }
    Ok(Problem {
        data,
        groups,
        method,
        config,
        inputs,
    })
}

/// Contents of fit.json.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub method: Method,
    pub lambda: f64,
    pub alpha: f64,
    pub weight_mode: WeightMode,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    /// 1-based predictor groups with a nonzero block.
    pub active_groups: Vec<usize>,
    /// 1-based (predictor group, modifier group) pairs.
    pub active_modifier_blocks: Vec<(usize, usize)>,
    /// On the standardized scale the model was fitted on.
    pub coefficients: CoefficientRecord,
    /// In the units of the input files.
    pub coefficients_original: CoefficientRecord,
    pub standardization: StandardizationRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_mse: Option<f64>,
}

impl FitReport {
    fn new(method: Method, cfg: &FitConfig, fit: &FitResult, rec: &StandardizationRecord) -> Self {
        FitReport {
            method,
            lambda: cfg.lambda,
            alpha: cfg.alpha,
            weight_mode: cfg.weight_mode,
            converged: fit.converged,
            iterations: fit.n_outer_iterations,
            objective: fit.final_objective(),
            objective_trace: fit.objective_trace.clone(),
            active_groups: fit.active_groups.iter().map(|l| l + 1).collect(),
            active_modifier_blocks: fit.active_modifier_blocks.iter().map(|(l, g)| (l + 1, g + 1)).collect(),
            coefficients: fit.coefficients.to_record(),
            coefficients_original: rec.to_original(&fit.coefficients).to_record(),
            standardization: rec.clone(),
            cv_mse: None,
        }
    }
}

fn manifest_for(
    command: &str,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: &[PathBuf],
) -> Result<RunManifest, Failure> {
    let mut m = RunManifest::new(command, config, seeds);
    m.add_inputs(inputs)
        .map_err(|e| Failure::Data(format!("cannot digest inputs: {e}")))?;
    Ok(m)
}

pub fn fit(a: &FitArgs, config: serde_json::Value) -> Result<(), Failure> {
    let lambda = required(&a.lambda, "lambda")?;
    let prob = load_problem(&a.model)?;
    let dir = out_dir(&a.model.out)?;
    let (std, rec) = prob.data.standardize()?;
    let cfg = prob.config.with_lambda(lambda);
    let fit = fit_method(prob.method, &std, &prob.groups, &cfg, None)?;
    write_json(&dir.join("fit.json"), &FitReport::new(prob.method, &cfg, &fit, &rec))?;
    finish(&dir, manifest_for("fit", config, vec![], &prob.inputs)?, &["fit.json"])
}

#[derive(Debug, Serialize)]
struct PathPoint {
    lambda: f64,
    objective: f64,
    converged: bool,
    active_groups: Vec<usize>,
    coefficients: CoefficientRecord,
}

#[derive(Debug, Serialize)]
struct PathReport {
    method: Method,
    alpha: f64,
    weight_mode: WeightMode,
    standardization: StandardizationRecord,
    path: Vec<PathPoint>,
}

pub fn path(a: &PathArgs, config: serde_json::Value) -> Result<(), Failure> {
    let prob = load_problem(&a.model)?;
    let dir = out_dir(&a.model.out)?;
    let (std, rec) = prob.data.standardize()?;
    let grid = grid(&a.grid);
    let res = fit_path(&std, &prob.groups, prob.method, &grid, &prob.config)?;
    let report = PathReport {
        method: prob.method,
        alpha: prob.config.alpha,
        weight_mode: prob.config.weight_mode,
        standardization: rec,
        path: res
            .lambdas
            .iter()
            .zip(&res.fits)
            .map(|(&lambda, f)| PathPoint {
                lambda,
                objective: f.final_objective(),
                converged: f.converged,
                active_groups: f.active_groups.iter().map(|l| l + 1).collect(),
                coefficients: f.coefficients.to_record(),
            })
            .collect(),
    };
    write_json(&dir.join("path.json"), &report)?;
    finish(
        &dir,
        manifest_for("path", config, vec![], &prob.inputs)?,
        &["path.json"],
    )
}

pub fn cv(a: &CvArgs, config: serde_json::Value) -> Result<(), Failure> {
    let v = a.v.unwrap_or(10);
    if v < 2 {
        return Err(Failure::Usage(format!("--v must be at least 2, got {v}")));
    }
    let seed = a.seed.unwrap_or(0);
    let prob = load_problem(&a.model)?;
    let dir = out_dir(&a.model.out)?;
    let grid = grid(&a.grid);
    let res: CVResult = cross_validate(&prob.data, &prob.groups, prob.method, &grid, v, &prob.config, seed)?;
    let (std, rec) = prob.data.standardize()?;
    let path = fit_path(&std, &prob.groups, prob.method, &grid[..=res.best_index], &prob.config)?;
    let best = path.fits.last().expect("grid is non-empty");
    let mut report = FitReport::new(prob.method, &prob.config.with_lambda(res.best_lambda), best, &rec);
    report.cv_mse = Some(res.min_mse());
    write_json(&dir.join("cv.json"), &res)?;
    write_json(&dir.join("fit.json"), &report)?;
    finish(
        &dir,
        manifest_for("cv", config, vec![seed], &prob.inputs)?,
        &["cv.json", "fit.json"],
    )
}

pub fn bench(a: &BenchArgs, config: serde_json::Value) -> Result<(), Failure> {
    let s = setting(required(&a.setting, "setting")?);
    let seed = a
        .seed
        .ok_or_else(|| Failure::Usage("bench requires --seed so that runs are reproducible".into()))?;
    let reps = a.reps.unwrap_or(100);
    if reps == 0 {
        return Err(Failure::Usage("--reps must be at least 1".into()));
    }
    let v = a.v.unwrap_or(10);
    if v < 2 {
        return Err(Failure::Usage(format!("--v must be at least 2, got {v}")));
    }
    let methods: Vec<Method> = a
        .methods
        .clone()
        .unwrap_or_else(|| vec![MethodArg::Lasso, MethodArg::Plasso, MethodArg::Svreg])
        .into_iter()
        .map(method)
        .collect();
    let dir = out_dir(&a.out)?;
    let mut study = StudyConfig::new(s, methods, reps, seed);
    study.n = a.n.unwrap_or(100);
    study.grid = grid(&a.grid);
    study.folds = v;
    study.fit.alpha = a.alpha.unwrap_or(0.5);
    study.fit.weight_mode = weight_mode(a.weight_mode);
    study.fit.modifier_intercepts = !a.no_modifier_intercepts;
    study.scoring = scoring(a.universe, a.categorical);
    study.scale_dummies = a.scale_dummies;
    study.fit.validate()?;
    let result = run_study(&study);
    let files = [
        ("table.csv", result.table_csv()),
        ("table_se.csv", result.table_se_csv()),
        ("roc.csv", result.roc_csv()),
        ("roc_points.csv", result.roc_points_csv()),
        ("diffcurve.csv", result.diffcurve_csv()),
    ];
    for (name, text) in &files {
        write_text(&dir.join(name), text)?;
    }
    let seeds = (0..reps as u64).map(|r| seed.wrapping_add(r)).collect();
    let mut manifest = RunManifest::new("bench", config, seeds);
    manifest.failures = result.failures.clone();
    finish(&dir, manifest, &files.map(|(n, _)| n))?;
    check_failures(&result.failures, reps)
}

fn check_failures(failures: &[ReplicationFailure], reps: usize) -> Result<(), Failure> {
    if failures.len() * 10 > reps {
        return Err(Failure::Numeric(format!(
            "{} of {reps} replications failed (first: {})",
            failures.len(),
            failures[0].error
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricsEntry {
    fit: String,
    method: Method,
    lambda: f64,
    #[serde(flatten)]
    report: MetricsReport,
}

pub fn metrics(a: &MetricsArgs, config: serde_json::Value) -> Result<(), Failure> {
    let fits = required(&a.fits, "fit")?;
    let truth_path = required(&a.truth, "truth")?;
    let dir = out_dir(&a.out)?;
    let truth: SelectionTruth = read_json(&truth_path)?;
    let sc = scoring(a.universe, a.categorical);
    let mut entries = Vec::new();
    for f in &fits {
        let rep: FitReport = read_json(f)?;
        let c = rep.coefficients.to_set()?;
        c.check_dims(truth.p(), truth.k())?;
        entries.push(MetricsEntry {
            fit: f.display().to_string(),
            method: rep.method,
            lambda: rep.lambda,
            report: metrics_report(&c, &truth, sc, rep.cv_mse),
        });
    }
    write_json(&dir.join("metrics.json"), &entries)?;
    let mut inputs = fits.clone();
    inputs.push(truth_path);
    finish(
        &dir,
        manifest_for("metrics", config, vec![], &inputs)?,
        &["metrics.json"],
    )
}
