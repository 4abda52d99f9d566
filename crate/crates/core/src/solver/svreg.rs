use nalgebra::{DMatrix, DVector};

use super::design::Design;
use super::FitResult;
use crate::error::{Error, Result};
use crate::kernels::{
    block_penalty, minimize_coordinate, prox_hierarchical, screen_from_correlation, soft_threshold,
    soft_threshold_norm, BlockLayout, ScreenDecision,
};
use crate::model::{penalty_value, CoefficientSet, Dataset, FitConfig, GroupSpec, PenaltyWeights};

/// Fits the structured varying-coefficient model by blockwise coordinate
/// descent over the predictor groups.
pub fn fit_svreg(d: &Dataset, gs: &GroupSpec, cfg: &FitConfig, warm: Option<&CoefficientSet>) -> Result<FitResult> {
    check_inputs(d, gs, cfg)?;
    let design = Design::for_config(d, gs, cfg);
    fit_svreg_with_design(&design, d, gs, cfg, warm)
}

/// Pliable Lasso: singleton predictors, one modifier group, unit weights.
pub fn fit_plasso(d: &Dataset, cfg: &FitConfig, warm: Option<&CoefficientSet>) -> Result<FitResult> {
    let gs = GroupSpec::pliable(d.p(), d.k());
    let cfg = plasso_config(cfg);
    fit_svreg(d, &gs, &cfg, warm)
}

pub(crate) fn plasso_config(cfg: &FitConfig) -> FitConfig {
    let mut cfg = *cfg;
    cfg.weight_mode = crate::model::WeightMode::Unit;
    cfg
}

pub(crate) fn check_inputs(d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> Result<()> {
    cfg.validate()?;
    d.validate()?;
    gs.check_dims(d.p(), d.k())?;
    if cfg.require_standardized && !d.standardized {
        return Err(Error::NotStandardized);
    }
    Ok(())
}

/// [`fit_svreg`] with a precomputed [`Design`] for `d` and `gs`.
pub fn fit_svreg_with_design(
    design: &Design,
    d: &Dataset,
    gs: &GroupSpec,
    cfg: &FitConfig,
    warm: Option<&CoefficientSet>,
) -> Result<FitResult> {
    check_inputs(d, gs, cfg)?;
    let weights = PenaltyWeights::new(gs, cfg.weight_mode);
    let mut coef = match warm {
        Some(w) => {
            w.check_dims(d.p(), d.k())?;
            w.clone()
        }
        None => CoefficientSet::zeros(d.p(), d.k()),
    };
    for (l, members) in gs.predictor_groups().iter().enumerate() {
        if design.is_zero_block(l) {
            log::warn!("predictor group {} has only zero columns and stays at zero", l + 1);
            for &j in members {
                coef.beta[j] = 0.0;
                coef.theta.row_mut(j).fill(0.0);
            }
        }
    }
    let solver = BlockSolver::new(design, &weights, cfg);
    let mut steps = vec![1.0; design.n_groups()];

    let mut r = full_residual(design, d, &coef);
    refit_intercepts(design, d, &mut coef, &mut r);
    r = full_residual(design, d, &coef);
    let mut j_prev = objective(&r, &coef, gs, &weights, cfg);
    if !j_prev.is_finite() {
        return Err(Error::NumericFailure { iteration: 0 });
    }

    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for iter in 1..=cfg.max_outer_iter {
        iterations = iter;
        for l in 0..design.n_groups() {
            if design.is_zero_block(l) {
                continue;
            }
            let layout = design.layout(l);
            let v_old = layout.gather(&coef);
            let v_new = solver.update_block(l, &r, &v_old, &mut steps[l]);
            if v_new == v_old {
                continue;
            }
            let delta: Vec<f64> = v_new.iter().zip(&v_old).map(|(a, b)| a - b).collect();
            design.subtract_block(l, &delta, &mut r);
            layout.scatter(&v_new, &mut coef);
            refit_intercepts(design, d, &mut coef, &mut r);
        }
        r = full_residual(design, d, &coef);
        let j = objective(&r, &coef, gs, &weights, cfg);
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

    Ok(FitResult::new(coef, trace, iterations, converged, gs))
}

fn objective(r: &DVector<f64>, c: &CoefficientSet, gs: &GroupSpec, w: &PenaltyWeights, cfg: &FitConfig) -> f64 {
    r.norm_squared() / (2.0 * r.len() as f64) + penalty_value(c, gs, w, cfg)
}

pub(crate) fn full_residual(design: &Design, d: &Dataset, c: &CoefficientSet) -> DVector<f64> {
    let mut r = d.y.clone();
    r.add_scalar_mut(-c.beta0);
    r -= &d.z * &c.theta0;
    let stride = d.k() + 1;
    for j in 0..d.p() {
        if c.beta[j] != 0.0 {
            r.axpy(-c.beta[j], &design.features().column(j * stride), 1.0);
        }
        for k in 0..d.k() {
            let t = c.theta[(j, k)];
            if t != 0.0 {
                r.axpy(-t, &design.features().column(j * stride + 1 + k), 1.0);
            }
        }
    }
    r
}

/// Least-squares refit of β₀, θ₀ on the current residual.
pub(crate) fn refit_intercepts(design: &Design, d: &Dataset, c: &mut CoefficientSet, r: &mut DVector<f64>) {
    let delta = design.intercept_fit(r);
    c.beta0 += delta[0];
    r.add_scalar_mut(-delta[0]);
    for k in 0..d.k() {
        let dk = delta[k + 1];
        if dk != 0.0 {
            c.theta0[k] += dk;
            r.axpy(-dk, &d.z.column(k), 1.0);
        }
    }
}

/// Largest number of times the nonzero modifier set is recomposed.
const MAX_RECOMPOSE: usize = 10;

/// Block update for one predictor group, working on the block subproblem
///
/// ```text
/// h(v) = ½ vᵀ G v − qᵀ v + penalty(v)
/// ```
///
/// where `G` is the block Gram matrix and `q` the correlation of the block's
/// features with the partial residual.
pub(crate) struct BlockSolver<'a> {
    design: &'a Design,
    weights: &'a PenaltyWeights,
    cfg: &'a FitConfig,
}

impl<'a> BlockSolver<'a> {
    pub(crate) fn new(design: &'a Design, weights: &'a PenaltyWeights, cfg: &'a FitConfig) -> Self {
        BlockSolver { design, weights, cfg }
    }

    fn joint_lambda(&self, l: usize) -> f64 {
        self.weights.joint[l] * self.cfg.group_lambda()
    }

    /// Block objective h(v).
    fn block_objective(&self, l: usize, q: &[f64], v: &[f64]) -> f64 {
        let g = self.design.gram(l);
        let layout = self.design.layout(l);
        let mut quad = 0.0;
        let mut lin = 0.0;
        for i in 0..v.len() {
            if v[i] == 0.0 {
                continue;
            }
            lin += q[i] * v[i];
            let mut gi = 0.0;
            for (jj, &vj) in v.iter().enumerate() {
                if vj != 0.0 {
                    gi += g[(i, jj)] * vj;
                }
            }
            quad += v[i] * gi;
        }
        0.5 * quad - lin
            + block_penalty(
                v,
                layout,
                self.joint_lambda(l),
                &self.weights.modifier,
                self.cfg.l1_lambda(),
            )
    }

    pub(crate) fn update_block(&self, l: usize, r: &DVector<f64>, v_old: &[f64], step: &mut f64) -> Vec<f64> {
        let layout = self.design.layout(l);
        let g = self.design.gram(l);
        // correlation with the partial residual r + F v_old
        let mut q = self.design.correlate(l, r);
        add_gram_product(g, v_old, &mut q);

        let report = screen_from_correlation(l, layout, &q, self.weights, self.cfg);
        if report.decision == ScreenDecision::AllZero {
            return vec![0.0; layout.dim()];
        }

        let c = self.joint_lambda(l);
        let beta_start: Vec<f64> = layout.beta_positions().map(|i| v_old[i]).collect();
        let beta = self.solve_beta(l, &q, &beta_start);
        let mut candidate = vec![0.0; layout.dim()];
        for (m, pos) in layout.beta_positions().enumerate() {
            candidate[pos] = beta[m];
        }

        let mut nonzero: Vec<usize> = (0..layout.n_modifier_groups())
            .filter(|&grp| !self.modifier_group_passes(l, grp, &q, &candidate, c))
            .collect();
        if !nonzero.is_empty() {
            // start from the previous block if it beats the β-only point
            let mut start = v_old.to_vec();
            mask_to_groups(&mut start, layout, &nonzero);
            if self.block_objective(l, &q, &start) > self.block_objective(l, &q, &candidate) {
                start = candidate.clone();
            }
            for _ in 0..MAX_RECOMPOSE {
                let v = self.proximal_gradient(l, &q, &nonzero, start, step);
                let added: Vec<usize> = (0..layout.n_modifier_groups())
                    .filter(|grp| !nonzero.contains(grp))
                    .filter(|&grp| !self.modifier_group_passes(l, grp, &q, &v, c))
                    .collect();
                start = v;
                if added.is_empty() {
                    break;
                }
                nonzero.extend(added);
                nonzero.sort_unstable();
            }
            candidate = start;
        }

        let h_old = self.block_objective(l, &q, v_old);
        let h_new = self.block_objective(l, &q, &candidate);
        // keep the old block unless the candidate is a genuine improvement
        if h_new < h_old - 1e-12 * (1.0 + h_old.abs()) {
            candidate
        } else {
            v_old.to_vec()
        }
    }

    /// Modifier-group test at block point `v` whose entries on group `grp`
    /// are zero.
    fn modifier_group_passes(&self, l: usize, grp: usize, q: &[f64], v: &[f64], c: f64) -> bool {
        let layout = self.design.layout(l);
        let g = self.design.gram(l);
        let u = layout.group_positions(grp).map(|pos| {
            let mut s = q[pos];
            for (jj, &vj) in v.iter().enumerate() {
                if vj != 0.0 {
                    s -= g[(pos, jj)] * vj;
                }
            }
            s
        });
        soft_threshold_norm(u, self.cfg.l1_lambda()) < c * self.weights.modifier_screen[grp]
    }

    /// β_[ℓ] minimizing h with θ_[ℓ]• = 0.
    fn solve_beta(&self, l: usize, q: &[f64], start: &[f64]) -> Vec<f64> {
        let layout = self.design.layout(l);
        let g = self.design.gram(l);
        let c = self.joint_lambda(l);
        let pos: Vec<usize> = layout.beta_positions().collect();
        let qb: Vec<f64> = pos.iter().map(|&i| q[i]).collect();
        if pos.len() == 1 {
            let gbb = g[(pos[0], pos[0])];
            return vec![soft_threshold(qb[0], c) / gbb];
        }
        let qnorm = qb.iter().map(|v| v * v).sum::<f64>().sqrt();
        if qnorm <= c {
            return vec![0.0; pos.len()];
        }
        let mut b = start.to_vec();
        if b.iter().all(|&v| v == 0.0) {
            let scale = 1.0 - c / qnorm;
            for (bm, qm) in b.iter_mut().zip(&qb) {
                *bm = scale * qm;
            }
        }
        for _ in 0..self.cfg.max_inner_iter {
            let mut max_change: f64 = 0.0;
            for m in 0..pos.len() {
                let mut a = qb[m];
                let mut s2 = 0.0;
                for mm in 0..pos.len() {
                    if mm != m {
                        a -= g[(pos[m], pos[mm])] * b[mm];
                        s2 += b[mm] * b[mm];
                    }
                }
                let gmm = g[(pos[m], pos[m])];
                let new = if s2 == 0.0 {
                    soft_threshold(a, c) / gmm
                } else {
                    minimize_coordinate(|x| 0.5 * gmm * x * x - a * x + c * (x * x + s2).sqrt(), b[m])
                };
                max_change = max_change.max((new - b[m]).abs());
                b[m] = new;
            }
            if max_change < self.cfg.inner_tol {
                break;
            }
        }
        b
    }

    /// Accelerated proximal gradient over β_[ℓ] and the θ entries of the
    /// `active` modifier groups, restarting the momentum whenever h rises.
    fn proximal_gradient(&self, l: usize, q: &[f64], active: &[usize], start: Vec<f64>, step: &mut f64) -> Vec<f64> {
        let layout = self.design.layout(l);
        let g = self.design.gram(l);
        let c = self.joint_lambda(l);
        let l1 = self.cfg.l1_lambda();
        let mut mask = vec![false; layout.dim()];
        for pos in layout.beta_positions() {
            mask[pos] = true;
        }
        for &grp in active {
            for pos in layout.group_positions(grp) {
                mask[pos] = true;
            }
        }
        let idx: Vec<usize> = (0..layout.dim()).filter(|&i| mask[i]).collect();
        let smooth = |v: &[f64], grad: &mut [f64]| -> f64 {
            // returns ½vᵀGv − qᵀv and fills the gradient on the active entries
            let mut f = 0.0;
            for &i in &idx {
                let mut gi = 0.0;
                for &jj in &idx {
                    gi += g[(i, jj)] * v[jj];
                }
                grad[i] = gi - q[i];
                f += v[i] * (0.5 * gi - q[i]);
            }
            f
        };
        let penalty = |v: &[f64]| block_penalty(v, layout, c, &self.weights.modifier, l1);

        let dim = layout.dim();
        let mut x = start;
        let mut y = x.clone();
        let mut grad = vec![0.0; dim];
        let mut scratch = vec![0.0; dim];
        let mut momentum: f64 = 1.0;
        let mut h_x = smooth(&x, &mut scratch) + penalty(&x);
        for _ in 0..self.cfg.max_inner_iter {
            let f_y = smooth(&y, &mut grad);
            let mut z;
            loop {
                z = vec![0.0; dim];
                for &i in &idx {
                    z[i] = y[i] - *step * grad[i];
                }
                prox_hierarchical(&mut z, layout, active, *step, c, &self.weights.modifier, l1);
                let mut bound = f_y;
                let mut dist = 0.0;
                for &i in &idx {
                    let diff = z[i] - y[i];
                    bound += grad[i] * diff;
                    dist += diff * diff;
                }
                bound += dist / (2.0 * *step);
                let f_z = smooth(&z, &mut scratch);
                if f_z <= bound + 1e-15 * (1.0 + bound.abs()) || *step < 1e-12 {
                    break;
                }
                *step *= 0.5;
            }
            let h_z = smooth(&z, &mut scratch) + penalty(&z);
            if h_z > h_x {
                // restart from x without momentum
                if y == x {
                    break;
                }
                y = x.clone();
                momentum = 1.0;
                continue;
            }
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next;
            for &i in &idx {
                y[i] = z[i] + beta * (z[i] - x[i]);
            }
            momentum = next;
            let change = h_x - h_z;
            x = z;
            h_x = h_z;
            if change < self.cfg.inner_tol {
                break;
            }
        }
        x
    }
}

fn add_gram_product(g: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    for (jj, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o += g[(i, jj)] * vj;
            }
        }
    }
}

fn mask_to_groups(v: &mut [f64], layout: &BlockLayout, groups: &[usize]) {
    let mut keep = vec![false; v.len()];
    for pos in layout.beta_positions() {
        keep[pos] = true;
    }
    for &grp in groups {
        for pos in layout.group_positions(grp) {
            keep[pos] = true;
        }
    }
    for (x, k) in v.iter_mut().zip(keep) {
        if !k {
            *x = 0.0;
        }
    }
}
