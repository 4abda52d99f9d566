use nalgebra::DVector;

use super::design::Design;
use super::svreg::{check_inputs, full_residual};
use super::FitResult;
use crate::error::{Error, Result};
use crate::kernels::soft_threshold;
use crate::model::{loss_value, CoefficientSet, Dataset, FitConfig, GroupSpec};

/// `(1/2N)‖r‖² + λ(Σ|θ₀ₖ| + Σ|βⱼ| + Σ|θⱼₖ|)`; only β₀ is free.
pub fn lasso_objective(d: &Dataset, c: &CoefficientSet, lambda: f64) -> Result<f64> {
    let l1 = c.theta0.iter().map(|v| v.abs()).sum::<f64>()
        + c.beta.iter().map(|v| v.abs()).sum::<f64>()
        + c.theta.iter().map(|v| v.abs()).sum::<f64>();
    Ok(loss_value(d, c)? + lambda * l1)
}

/// Largest `|(1/N) fᵀ(y − ȳ)|` over the columns of `[Z, X, xⱼ∘z_k]`: the
/// smallest λ at which the Lasso solution is all zero.
pub fn lasso_lambda_max(d: &Dataset, cfg: &FitConfig) -> f64 {
    let n = d.n() as f64;
    let r = d.y.add_scalar(-d.y.mean());
    let design = Design::new(d, &GroupSpec::singletons(d.p(), d.k()));
    let z_cols = if cfg.modifier_intercepts { d.k() } else { 0 };
    d.z.column_iter()
        .take(z_cols)
        .chain(design.features().column_iter())
        .map(|c| (c.dot(&r) / n).abs())
        .fold(0.0, f64::max)
}

/// Lasso over the expanded design `[Z, X, xⱼ∘z_k]` by cyclic coordinate
/// descent with an unpenalized intercept. Only `cfg.lambda` is used from the
/// penalty settings.
pub fn fit_lasso_interactions(d: &Dataset, cfg: &FitConfig, warm: Option<&CoefficientSet>) -> Result<FitResult> {
    let gs = GroupSpec::singletons(d.p(), d.k());
    check_inputs(d, &gs, cfg)?;
    let design = Design::for_config(d, &gs, cfg);
    fit_lasso_with_design(&design, d, cfg, warm)
}

pub fn fit_lasso_with_design(
    design: &Design,
    d: &Dataset,
    cfg: &FitConfig,
    warm: Option<&CoefficientSet>,
) -> Result<FitResult> {
    let gs = GroupSpec::singletons(d.p(), d.k());
    check_inputs(d, &gs, cfg)?;
    let (p, k) = (d.p(), d.k());
    let stride = k + 1;
    let n = d.n() as f64;
    let lambda = cfg.lambda;
    let mut coef = match warm {
        Some(w) => {
            w.check_dims(p, k)?;
            w.clone()
        }
        None => CoefficientSet::zeros(p, k),
    };
    // Coordinates 0..K are the Z columns, then the feature matrix columns.
    let column = |c: usize| -> nalgebra::DVectorView<'_, f64> {
        if c < k {
            d.z.column(c)
        } else {
            design.features().column(c - k)
        }
    };
    let ncols = k + p * stride;
    let scale: Vec<f64> = (0..ncols)
        .map(|c| {
            if c < k && !cfg.modifier_intercepts {
                0.0
            } else {
                column(c).norm_squared() / n
            }
        })
        .collect();
    let mut w: Vec<f64> = (0..ncols)
        .map(|c| {
            if scale[c] == 0.0 {
                0.0
            } else {
                read_coef(&coef, c, k, stride)
            }
        })
        .collect();
    write_back(&w, &mut coef, k, stride);

    let mut r = full_residual(design, d, &coef);
    center_intercept(&mut coef, &mut r);
    let objective =
        |r: &DVector<f64>, w: &[f64]| r.norm_squared() / (2.0 * n) + lambda * w.iter().map(|v| v.abs()).sum::<f64>();
    let mut j_prev = objective(&r, &w);

    let sweep = |cols: &mut dyn Iterator<Item = usize>, w: &mut [f64], r: &mut DVector<f64>, b0: &mut f64| {
        let mut max_change: f64 = 0.0;
        for col in cols {
            let a = scale[col];
            if a == 0.0 {
                continue;
            }
            let f = column(col);
            let old = w[col];
            let zc = f.dot(r) / n + a * old;
            let new = soft_threshold(zc, lambda) / a;
            if new != old {
                r.axpy(old - new, &f, 1.0);
                w[col] = new;
                max_change = max_change.max(a.sqrt() * (new - old).abs());
            }
        }
        let shift = r.mean();
        *b0 += shift;
        r.add_scalar_mut(-shift);
        max_change.max(shift.abs())
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=cfg.max_outer_iter {
        iterations = iter;
        sweep(&mut (0..ncols), &mut w, &mut r, &mut coef.beta0);
        for _ in 0..cfg.max_inner_iter {
            let active: Vec<usize> = (0..ncols).filter(|&c| w[c] != 0.0).collect();
            let change = sweep(&mut active.into_iter(), &mut w, &mut r, &mut coef.beta0);
            if change < cfg.inner_tol {
                break;
            }
        }
        write_back(&w, &mut coef, k, stride);
        r = full_residual(design, d, &coef);
        center_intercept(&mut coef, &mut r);
        let j = objective(&r, &w);
        if !j.is_finite() {
            return Err(Error::NumericFailure { iteration: iter });
        }
        trace.push(j);
        if (j_prev - j).abs() < cfg.tol {
            converged = true;
            break;
        }
        j_prev = j;
    }
    Ok(FitResult::new(coef, trace, iterations, converged, &gs))
}

fn center_intercept(c: &mut CoefficientSet, r: &mut DVector<f64>) {
    let shift = r.mean();
    c.beta0 += shift;
    r.add_scalar_mut(-shift);
}

fn read_coef(c: &CoefficientSet, col: usize, k: usize, stride: usize) -> f64 {
    if col < k {
        return c.theta0[col];
    }
    let (j, t) = ((col - k) / stride, (col - k) % stride);
    if t == 0 {
        c.beta[j]
    } else {
        c.theta[(j, t - 1)]
    }
}

fn write_back(w: &[f64], c: &mut CoefficientSet, k: usize, stride: usize) {
    for (col, &v) in w.iter().enumerate() {
        if col < k {
            c.theta0[col] = v;
            continue;
        }
        let (j, t) = ((col - k) / stride, (col - k) % stride);
        if t == 0 {
            c.beta[j] = v;
        } else {
            c.theta[(j, t - 1)] = v;
        }
    }
}
