//! Model fitting: the structured varying-coefficient solver, the pliable
//! Lasso as its unit-weight special case, and a Lasso over the fully
//! expanded interaction design.

mod design;
mod lasso;
mod svreg;

pub use design::Design;
pub use lasso::{fit_lasso_interactions, fit_lasso_with_design, lasso_lambda_max, lasso_objective};
pub use svreg::{fit_plasso, fit_svreg, fit_svreg_with_design};

pub(crate) use svreg::{check_inputs, plasso_config};

use nalgebra::DVector;

use crate::error::Result;
use crate::kernels::screen_from_correlation;
use crate::model::{CoefficientSet, Dataset, FitConfig, GroupSpec, PenaltyWeights};

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub coefficients: CoefficientSet,
    /// Objective after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub n_outer_iterations: usize,
    pub converged: bool,
    /// Predictor groups with a nonzero block.
    pub active_groups: Vec<usize>,
    /// (predictor group, modifier group) pairs with a nonzero θ_[ℓ][g].
    pub active_modifier_blocks: Vec<(usize, usize)>,
}

impl FitResult {
    pub(crate) fn new(
        coefficients: CoefficientSet,
        objective_trace: Vec<f64>,
        n_outer_iterations: usize,
        converged: bool,
        gs: &GroupSpec,
    ) -> Self {
        let c = &coefficients;
        let mut active_groups = Vec::new();
        let mut active_modifier_blocks = Vec::new();
        for (l, members) in gs.predictor_groups().iter().enumerate() {
            let nonzero = members
                .iter()
                .any(|&j| c.beta[j] != 0.0 || c.theta.row(j).iter().any(|&t| t != 0.0));
            if nonzero {
                active_groups.push(l);
            }
            for (g, cols) in gs.modifier_groups().iter().enumerate() {
                if members.iter().any(|&j| cols.iter().any(|&k| c.theta[(j, k)] != 0.0)) {
                    active_modifier_blocks.push((l, g));
                }
            }
        }
        FitResult {
            coefficients,
            objective_trace,
            n_outer_iterations,
            converged,
            active_groups,
            active_modifier_blocks,
        }
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

/// Smallest λ at which every predictor group screens to zero when β = 0,
/// Θ = 0 and the intercepts are fitted. Infinite when α = 1 and some main
/// effect correlates with the residual, since β is then unpenalized.
pub fn lambda_max(d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> Result<f64> {
    check_inputs(d, gs, cfg)?;
    let design = Design::for_config(d, gs, cfg);
    Ok(lambda_max_with_design(&design, d, gs, cfg))
}

pub fn lambda_max_with_design(design: &Design, d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> f64 {
    let weights = PenaltyWeights::new(gs, cfg.weight_mode);
    let delta = design.intercept_fit(&d.y);
    let mut r: DVector<f64> = d.y.clone();
    r.add_scalar_mut(-delta[0]);
    for k in 0..d.k() {
        r.axpy(-delta[k + 1], &d.z.column(k), 1.0);
    }
    let mut best: f64 = 0.0;
    for l in 0..design.n_groups() {
        if design.is_zero_block(l) {
            continue;
        }
        let layout = design.layout(l);
        let q = design.correlate(l, &r);
        let ratio = |lambda: f64| {
            let c = cfg.with_lambda(lambda);
            screen_from_correlation(l, layout, &q, &weights, &c).kkt_ratio
        };
        let qnorm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if qnorm == 0.0 {
            continue;
        }
        let a = weights.joint[l];
        if cfg.alpha >= 1.0 {
            if layout.beta_positions().any(|i| q[i] != 0.0) {
                return f64::INFINITY;
            }
            let theta_max = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            best = best.max(theta_max);
            continue;
        }
        let mut hi = qnorm / (a * (1.0 - cfg.alpha));
        while ratio(hi) > 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if ratio(mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.max(hi);
    }
    best
}
