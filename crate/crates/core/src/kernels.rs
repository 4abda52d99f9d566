//! Scalar and block kernels shared by the solvers.
//!
//! A predictor group ℓ with members j₁..j_m owns the block vector
//! `v = (β_{j₁}, θ_{j₁,1..K}, β_{j₂}, θ_{j₂,1..K}, …)`; see [`BlockLayout`].
//! Screening statistics are expressed through the block correlation
//! `q = (1/N) Fᵀ r`, where F holds the block's features `xⱼ` and `xⱼ∘z_k`
//! and `r` is the partial residual with the whole block removed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    partial_residual_main, partial_residual_modifier, CoefficientSet, Dataset, FitConfig, GroupSpec, PenaltyWeights,
};

/// `sign(x)·max(|x| − t, 0)`.
///
/// # Panics
///
/// Panics if `t` is negative.
#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    assert!(t >= 0.0, "soft-threshold level must be non-negative, got {t}");
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

pub fn soft_threshold_vec(x: &[f64], t: f64) -> Vec<f64> {
    x.iter().map(|&v| soft_threshold(v, t)).collect()
}

/// ‖S_t(x)‖₂ without allocating.
pub fn soft_threshold_norm(x: impl IntoIterator<Item = f64>, t: f64) -> f64 {
    x.into_iter()
        .map(|v| {
            let s = soft_threshold(v, t);
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// Index arithmetic for one predictor group's block vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLayout {
    pub members: Vec<usize>,
    pub k: usize,
    pub modifier_groups: Vec<Vec<usize>>,
}

impl BlockLayout {
    pub fn new(members: Vec<usize>, groups: &GroupSpec) -> Self {
        BlockLayout {
            members,
            k: groups.k(),
            modifier_groups: groups.modifier_groups().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.members.len() * (self.k + 1)
    }

    pub fn stride(&self) -> usize {
        self.k + 1
    }

    #[inline]
    pub fn beta_pos(&self, m: usize) -> usize {
        m * (self.k + 1)
    }

    #[inline]
    pub fn theta_pos(&self, m: usize, k: usize) -> usize {
        m * (self.k + 1) + 1 + k
    }

    pub fn is_beta(&self, pos: usize) -> bool {
        pos % (self.k + 1) == 0
    }

    pub fn beta_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.members.len()).map(|m| self.beta_pos(m))
    }

    /// Positions of vec(θ_[ℓ][g]).
    pub fn group_positions(&self, g: usize) -> impl Iterator<Item = usize> + '_ {
        let cols = &self.modifier_groups[g];
        (0..self.members.len()).flat_map(move |m| cols.iter().map(move |&k| self.theta_pos(m, k)))
    }

    pub fn n_modifier_groups(&self) -> usize {
        self.modifier_groups.len()
    }

    /// Gathers a block vector from a coefficient set.
    pub fn gather(&self, c: &CoefficientSet) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (m, &j) in self.members.iter().enumerate() {
            v[self.beta_pos(m)] = c.beta[j];
            for k in 0..self.k {
                v[self.theta_pos(m, k)] = c.theta[(j, k)];
            }
        }
        v
    }

    pub fn scatter(&self, v: &[f64], c: &mut CoefficientSet) {
        for (m, &j) in self.members.iter().enumerate() {
            c.beta[j] = v[self.beta_pos(m)];
            for k in 0..self.k {
                c.theta[(j, k)] = v[self.theta_pos(m, k)];
            }
        }
    }
}

/// Outcome of screening a predictor group at the zero block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScreenDecision {
    AllZero,
    /// The block is nonzero but every modifier group passes its own
    /// threshold, so a β-only solution is the first candidate.
    BetaOnlyCandidate,
    Active,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifierStat {
    pub group: usize,
    pub stat: f64,
    pub threshold: f64,
}

/// Screening statistics for one predictor group with its block at zero.
///
/// `joint_stat`/`joint_threshold` and `modifier_stats` are the per-condition
/// tests `‖R_ℓ‖ ≤ a_ℓ(1−α)λ` and `‖S_{αλ}(U_g)‖ ≤ a_ℓ(1+w_g)(1−α)λ`.
/// Each of them is necessary for the block to vanish at the optimum, but
/// together they are not sufficient, so `decision` is taken from
/// `kkt_ratio`, the squared norm of the smallest subgradient of the joint
/// ℓ₂ term that certifies the zero block:
///
/// ```text
/// ‖R_ℓ‖² / c² + Σ_g max(‖S_{αλ}(U_g)‖ / c − w_g, 0)² ≤ 1,   c = a_ℓ(1−α)λ
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub group_index: usize,
    pub joint_stat: f64,
    pub joint_threshold: f64,
    pub modifier_stats: Vec<ModifierStat>,
    pub kkt_ratio: f64,
    pub decision: ScreenDecision,
}

impl ScreenReport {
    /// True when every per-condition test passes.
    pub fn conditions_hold(&self) -> bool {
        self.joint_stat <= self.joint_threshold && self.modifier_stats.iter().all(|m| m.stat <= m.threshold)
    }
}

/// Squared subgradient norm certifying the zero block (see [`ScreenReport`]).
/// `q_groups[g]` is U_g.
pub(crate) fn zero_block_ratio(
    beta_norm_sq: f64,
    group_shrunk_norms: &[f64],
    joint_weight: f64,
    weights: &[f64],
    group_lambda: f64,
) -> f64 {
    let c = joint_weight * group_lambda;
    if c <= 0.0 {
        let any = beta_norm_sq > 0.0 || group_shrunk_norms.iter().any(|&s| s > 0.0);
        return if any { f64::INFINITY } else { 0.0 };
    }
    let mut ratio = beta_norm_sq / (c * c);
    for (s, w) in group_shrunk_norms.iter().zip(weights) {
        let excess = (s / c - w).max(0.0);
        ratio += excess * excess;
    }
    ratio
}

/// Builds a report from a block correlation vector `q` (block zeroed).
pub(crate) fn screen_from_correlation(
    group_index: usize,
    layout: &BlockLayout,
    q: &[f64],
    weights: &PenaltyWeights,
    cfg: &FitConfig,
) -> ScreenReport {
    let lam_group = cfg.group_lambda();
    let l1 = cfg.l1_lambda();
    let a = weights.joint[group_index];
    let beta_norm_sq: f64 = layout.beta_positions().map(|i| q[i] * q[i]).sum();
    let shrunk: Vec<f64> = (0..layout.n_modifier_groups())
        .map(|g| soft_threshold_norm(layout.group_positions(g).map(|i| q[i]), l1))
        .collect();
    let modifier_stats: Vec<ModifierStat> = shrunk
        .iter()
        .enumerate()
        .map(|(g, &stat)| ModifierStat {
            group: g,
            stat,
            threshold: a * (1.0 + weights.modifier_joint_screen[g]) * lam_group,
        })
        .collect();
    let kkt_ratio = zero_block_ratio(beta_norm_sq, &shrunk, a, &weights.modifier, lam_group);
    let all_zero = kkt_ratio <= 1.0;
    let decision = if all_zero {
        ScreenDecision::AllZero
    } else if shrunk
        .iter()
        .enumerate()
        .all(|(g, &s)| s <= a * weights.modifier[g] * lam_group)
    {
        ScreenDecision::BetaOnlyCandidate
    } else {
        ScreenDecision::Active
    };
    ScreenReport {
        group_index,
        joint_stat: beta_norm_sq.sqrt(),
        joint_threshold: a * lam_group,
        modifier_stats,
        kkt_ratio,
        decision,
    }
}

/// Block correlation `(1/N) Fᵀ r` computed directly from the data.
fn dense_block_correlation(d: &Dataset, layout: &BlockLayout, r: &[f64]) -> Vec<f64> {
    let n = d.n() as f64;
    let mut q = vec![0.0; layout.dim()];
    for (m, &j) in layout.members.iter().enumerate() {
        let xj = d.x.column(j);
        let mut s = 0.0;
        for i in 0..d.n() {
            s += xj[i] * r[i];
        }
        q[layout.beta_pos(m)] = s / n;
        for k in 0..d.k() {
            let zk = d.z.column(k);
            let mut s = 0.0;
            for i in 0..d.n() {
                s += xj[i] * zk[i] * r[i];
            }
            q[layout.theta_pos(m, k)] = s / n;
        }
    }
    q
}

/// Screens predictor group `group` with its block set to zero.
pub fn screen_group(
    d: &Dataset,
    c: &CoefficientSet,
    gs: &GroupSpec,
    group: usize,
    cfg: &FitConfig,
) -> Result<ScreenReport> {
    let r = partial_residual_main(d, c, gs, group)?;
    let layout = BlockLayout::new(gs.predictor_groups()[group].clone(), gs);
    let q = dense_block_correlation(d, &layout, r.as_slice());
    let weights = PenaltyWeights::new(gs, cfg.weight_mode);
    Ok(screen_from_correlation(group, &layout, &q, &weights, cfg))
}

/// Threshold of the modifier-group test: a_ℓ·w_g·(1−α)λ, which is
/// (1−α)λ√(p_g p_ℓ)/√(1+K) under the structured weight modes.
pub fn modifier_threshold(weights: &PenaltyWeights, group: usize, modifier_group: usize, cfg: &FitConfig) -> f64 {
    weights.joint[group] * weights.modifier_screen[modifier_group] * cfg.group_lambda()
}

/// Statistic of the modifier-group test, `‖S_{αλ}((1/N) Σ vec(x_[ℓ]ᵀ z_[g]) (r^{(-ℓ)(-g)} − x_[ℓ]β̂))‖`.
pub fn modifier_group_stat(
    d: &Dataset,
    c: &CoefficientSet,
    gs: &GroupSpec,
    group: usize,
    modifier_group: usize,
    beta_hat: &[f64],
    cfg: &FitConfig,
) -> Result<f64> {
    let mut r = partial_residual_modifier(d, c, gs, group, modifier_group)?;
    let members = &gs.predictor_groups()[group];
    if beta_hat.len() != members.len() {
        return Err(Error::dims(format!(
            "beta_hat has {} entries, group has {}",
            beta_hat.len(),
            members.len()
        )));
    }
    // remove the current θ_[ℓ][g] as well: the test is taken at θ_[ℓ][g] = 0
    for &j in members {
        for &k in &gs.modifier_groups()[modifier_group] {
            let t = c.theta[(j, k)];
            if t != 0.0 {
                for i in 0..d.n() {
                    r[i] += d.x[(i, j)] * d.z[(i, k)] * t;
                }
            }
        }
    }
    for (m, &j) in members.iter().enumerate() {
        r.axpy(-beta_hat[m], &d.x.column(j), 1.0);
    }
    let n = d.n() as f64;
    let mut u = Vec::new();
    for &j in members {
        for &k in &gs.modifier_groups()[modifier_group] {
            let mut s = 0.0;
            for i in 0..d.n() {
                s += d.x[(i, j)] * d.z[(i, k)] * r[i];
            }
            u.push(s / n);
        }
    }
    Ok(soft_threshold_norm(u, cfg.l1_lambda()))
}

/// True when θ_[ℓ][g] = 0 is retained given the β̂_[ℓ] fitted with θ_[ℓ]• = 0.
/// The comparison is strict.
pub fn screen_modifier_group(
    d: &Dataset,
    c: &CoefficientSet,
    gs: &GroupSpec,
    group: usize,
    modifier_group: usize,
    beta_hat: &[f64],
    cfg: &FitConfig,
) -> Result<bool> {
    let stat = modifier_group_stat(d, c, gs, group, modifier_group, beta_hat, cfg)?;
    let weights = PenaltyWeights::new(gs, cfg.weight_mode);
    Ok(stat < modifier_threshold(&weights, group, modifier_group, cfg))
}

/// Group soft-thresholding, the exact β̂_[ℓ] when the group's columns are
/// orthonormal in the (1/N) inner product.
pub fn orthonormal_group_beta(r: &[f64], lambda1: f64, group_size: usize) -> Vec<f64> {
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = lambda1 * (group_size as f64).sqrt();
    if norm <= t || norm == 0.0 {
        return vec![0.0; r.len()];
    }
    let factor = 1.0 - t / norm;
    r.iter().map(|v| factor * v).collect()
}

/// Closed-form update of a single-predictor group with θ_j• = 0:
/// `(N / Σx²) · S_{λ₁}((1/N) Σ xᵢ rᵢ)`.
pub fn single_predictor_beta(x: &[f64], r: &[f64], lambda1: f64) -> Result<f64> {
    if x.len() != r.len() {
        return Err(Error::dims("x and r differ in length"));
    }
    let n = x.len() as f64;
    let ss: f64 = x.iter().map(|v| v * v).sum();
    if ss == 0.0 {
        return Err(Error::config("predictor has zero norm"));
    }
    let inner: f64 = x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / n;
    Ok(n / ss * soft_threshold(inner, lambda1))
}

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 − √5) / 2
const SEARCH_ABS_TOL: f64 = 1e-8;

/// Minimizes a continuous unimodal function on `[lo, hi]` by golden-section
/// search with successive parabolic interpolation (Brent). The returned
/// point is within about 1e-8 of the minimizer.
pub fn univariate_beta_search<F: FnMut(f64) -> f64>(mut f: F, bracket: (f64, f64)) -> Result<f64> {
    let (mut a, mut b) = bracket;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidBracket { lo: a, hi: b });
    }
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = 1e-10 * x.abs() + SEARCH_ABS_TOL / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabola through (v, fv), (w, fw), (x, fx)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < xm { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < xm { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(x)
}

/// Coordinate minimization with the bracket policy used by the block
/// update: start at `current ± 10(1+|current|)` and widen tenfold while the
/// minimizer sits on an endpoint.
pub fn minimize_coordinate<F: FnMut(f64) -> f64>(mut f: F, current: f64) -> f64 {
    let mut half = 10.0 * (1.0 + current.abs());
    loop {
        let (lo, hi) = (current - half, current + half);
        let x = univariate_beta_search(&mut f, (lo, hi)).expect("bracket is non-degenerate");
        let edge = 1e-6 * half;
        if (x - lo > edge && hi - x > edge) || half > 1e12 {
            return x;
        }
        half *= 10.0;
    }
}

/// Proximal map of `step · h` for the hierarchical block penalty
///
/// ```text
/// h(v) = c·‖v‖ + c·Σ_g w_g ‖v_g‖ + l1·Σ |θ entries|
/// ```
///
/// The groups are nested (single θ entries ⊂ modifier groups ⊂ whole
/// block), so the proximal map is the composition of the individual maps
/// applied from the innermost groups outwards. Entries outside `active`
/// modifier groups must already be zero.
pub(crate) fn prox_hierarchical(
    v: &mut [f64],
    layout: &BlockLayout,
    active: &[usize],
    step: f64,
    c: f64,
    group_weights: &[f64],
    l1: f64,
) {
    if l1 > 0.0 {
        for &g in active {
            for pos in layout.group_positions(g) {
                v[pos] = soft_threshold(v[pos], step * l1);
            }
        }
    }
    if c > 0.0 {
        for &g in active {
            let norm = layout.group_positions(g).map(|p| v[p] * v[p]).sum::<f64>().sqrt();
            let t = step * c * group_weights[g];
            let factor = if norm > t { 1.0 - t / norm } else { 0.0 };
            for pos in layout.group_positions(g) {
                v[pos] *= factor;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t = step * c;
        let factor = if norm > t { 1.0 - t / norm } else { 0.0 };
        for x in v.iter_mut() {
            *x *= factor;
        }
    }
}

/// Value of the hierarchical block penalty (see [`prox_hierarchical`]).
pub(crate) fn block_penalty(v: &[f64], layout: &BlockLayout, c: f64, group_weights: &[f64], l1: f64) -> f64 {
    let mut total = 0.0;
    if c > 0.0 {
        let joint = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut groups = 0.0;
        for (g, w) in group_weights.iter().enumerate() {
            groups += w * layout.group_positions(g).map(|p| v[p] * v[p]).sum::<f64>().sqrt();
        }
        total += c * (joint + groups);
    }
    if l1 > 0.0 {
        let theta_l1: f64 = v
            .iter()
            .enumerate()
            .filter(|(i, _)| !layout.is_beta(*i))
            .map(|(_, x)| x.abs())
            .sum();
        total += l1 * theta_l1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(-1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-4.0, 0.0), -4.0);
        assert_eq!(soft_threshold_vec(&[3.0, -3.0, 0.5], 1.0), vec![2.0, -2.0, 0.0]);
    }

    #[test]
    #[should_panic]
    fn soft_threshold_rejects_negative_level() {
        soft_threshold(1.0, -0.1);
    }

    #[test]
    fn orthonormal_group_examples() {
        let b = orthonormal_group_beta(&[3.0, 4.0], 1.0, 2);
        let factor = 1.0 - 2f64.sqrt() / 5.0;
        assert!((factor - 0.71716).abs() < 1e-5);
        assert!((b[0] - 2.15147).abs() < 1e-5 && (b[1] - 2.86863).abs() < 1e-5);
        assert_eq!(orthonormal_group_beta(&[0.5, 0.5], 1.0, 2), vec![0.0, 0.0]);
        assert_eq!(orthonormal_group_beta(&[0.5, -0.7], 0.0, 2), vec![0.5, -0.7]);
        assert_eq!(orthonormal_group_beta(&[0.0, 0.0], 1.0, 2), vec![0.0, 0.0]);
    }

    #[test]
    fn single_predictor_examples() {
        // Σx² = N = 2, (1/N)Σxr = 0.5
        let x = [1.0, -1.0];
        let r = [1.0, 0.0];
        assert!((single_predictor_beta(&x, &r, 0.2).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(single_predictor_beta(&x, &r, 0.6).unwrap(), 0.0);
        // λ = 0 → least squares slope through the origin
        let x = [1.0, 2.0, 3.0];
        let r = [2.0, 3.0, 7.0];
        let ols = (2.0 + 6.0 + 21.0) / 14.0;
        assert!((single_predictor_beta(&x, &r, 0.0).unwrap() - ols).abs() < 1e-14);
        assert!(single_predictor_beta(&[0.0, 0.0], &[1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn search_examples() {
        let x = univariate_beta_search(|b| (b - 2.0) * (b - 2.0), (-10.0, 10.0)).unwrap();
        assert!((x - 2.0).abs() < 1e-8, "{x}");
        let x = univariate_beta_search(|b: f64| b.abs() + (b - 1.0).powi(2) / 2.0, (-10.0, 10.0)).unwrap();
        assert!(x.abs() < 1e-6, "{x}");
        assert!(univariate_beta_search(|b| b, (1.0, 1.0)).is_err());
        assert!(univariate_beta_search(|b| b, (2.0, 1.0)).is_err());
    }

    #[test]
    fn coordinate_bracket_expands() {
        let x = minimize_coordinate(|b| (b - 500.0).powi(2), 0.0);
        assert!((x - 500.0).abs() < 1e-6, "{x}");
    }

    #[test]
    fn search_matches_grid_on_group_lasso_slices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            // f(b) = ½ g b² − a b + c √(b² + s²), the slice of a group-Lasso block
            let g = rng.random_range(0.2..3.0);
            let a = rng.random_range(-3.0..3.0);
            let c = rng.random_range(0.0..2.0);
            let s2: f64 = if rng.random_bool(0.3) {
                0.0
            } else {
                rng.random_range(0.0..2.0)
            };
            let f = |b: f64| 0.5 * g * b * b - a * b + c * (b * b + s2).sqrt();
            let found = minimize_coordinate(f, 0.0);
            let mut best = (f64::INFINITY, 0.0);
            let mut b = -10.0;
            while b <= 10.0 {
                let v = f(b);
                if v < best.0 {
                    best = (v, b);
                }
                b += 1e-4;
            }
            assert!((found - best.1).abs() <= 1e-4, "found {found}, grid {}", best.1);
            assert!(f(found) <= best.0 + 1e-7);
        }
    }

    proptest! {
        #[test]
        fn soft_threshold_is_non_expansive(a in -10.0f64..10.0, b in -10.0f64..10.0, t in 0.0f64..5.0) {
            prop_assert!((soft_threshold(a, t) - soft_threshold(b, t)).abs() <= (a - b).abs() + 1e-12);
        }

        #[test]
        fn orthonormal_norm_and_direction(r in proptest::collection::vec(-5.0f64..5.0, 1..6), lam in 0.0f64..3.0) {
            let p = r.len();
            let b = orthonormal_group_beta(&r, lam, p);
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((bn - (rn - lam * (p as f64).sqrt()).max(0.0)).abs() < 1e-10);
            if bn > 0.0 {
                for (x, y) in b.iter().zip(&r) {
                    prop_assert!((x / bn - y / rn).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn single_predictor_equals_orthonormal_form(
            x in proptest::collection::vec(-2.0f64..2.0, 4..12),
            noise in proptest::collection::vec(-2.0f64..2.0, 12),
            lam in 0.0f64..1.0,
        ) {
            // rescale x to unit mean square so both forms apply
            let n = x.len() as f64;
            let ms = x.iter().map(|v| v * v).sum::<f64>() / n;
            prop_assume!(ms > 1e-3);
            let x: Vec<f64> = x.iter().map(|v| v / ms.sqrt()).collect();
            let r = &noise[..x.len()];
            let rr = x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() / n;
            let a = single_predictor_beta(&x, r, lam).unwrap();
            let b = orthonormal_group_beta(&[rr], lam, 1)[0];
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
