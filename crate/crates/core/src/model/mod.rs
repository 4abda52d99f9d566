//! Data model of the varying-coefficient regression
//!
//! ```text
//! y = β₀ + Zθ₀ + Σⱼ (βⱼ + Zθⱼ) ∘ xⱼ + ε
//! ```
//!
//! together with the group structure and the penalized objective
//!
//! ```text
//! J = (1/2N) Σᵢ rᵢ²
//!   + (1−α)λ Σ_ℓ a_ℓ { ‖(β_[ℓ], vec θ_[ℓ]•)‖₂ + Σ_g w_g ‖vec θ_[ℓ][g]‖₂ }
//!   + αλ Σ_{j,k} |θ_jk|
//! ```
//!
//! where `a_ℓ` and `w_g` come from [`PenaltyWeights`].

mod coefficients;
mod config;
mod dataset;
mod groups;

pub use coefficients::{CoefficientRecord, CoefficientSet};
pub use config::{FitConfig, PenaltyWeights, WeightMode};
pub use dataset::{Dataset, StandardizationRecord};
pub use groups::{GroupSpec, GroupSpecFile};

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Fitted values ŷᵢ = β₀ + zᵢθ₀ + Σⱼ (βⱼ + θⱼ·zᵢ) xᵢⱼ.
pub fn predict(d: &Dataset, c: &CoefficientSet) -> Result<DVector<f64>> {
    c.check_dims(d.p(), d.k())?;
    let mut yhat = &d.z * &c.theta0;
    yhat.add_scalar_mut(c.beta0);
    for j in 0..d.p() {
        add_predictor_term(d, c, j, &mut yhat, 1.0);
    }
    Ok(yhat)
}

/// `out += sign · xⱼ ∘ (βⱼ + Zθⱼ)`
fn add_predictor_term(d: &Dataset, c: &CoefficientSet, j: usize, out: &mut DVector<f64>, sign: f64) {
    let beta = c.beta[j];
    let theta = c.theta.row(j);
    let has_theta = theta.iter().any(|&t| t != 0.0);
    if beta == 0.0 && !has_theta {
        return;
    }
    let xj = d.x.column(j);
    if has_theta {
        let slope = &d.z * theta.transpose();
        for i in 0..d.n() {
            out[i] += sign * xj[i] * (beta + slope[i]);
        }
    } else {
        out.axpy(sign * beta, &xj, 1.0);
    }
}

fn check_group(g: &GroupSpec, d: &Dataset, group: usize) -> Result<()> {
    g.check_dims(d.p(), d.k())?;
    if group >= g.n_predictor_groups() {
        return Err(Error::IndexOutOfRange {
            index: group,
            limit: g.n_predictor_groups(),
        });
    }
    Ok(())
}

/// Working residual with every predictor group except `group` removed,
/// along with the intercept terms β₀ + Zθ₀.
pub fn partial_residual_main(d: &Dataset, c: &CoefficientSet, g: &GroupSpec, group: usize) -> Result<DVector<f64>> {
    c.check_dims(d.p(), d.k())?;
    check_group(g, d, group)?;
    let mut r = d.y.clone();
    r -= &d.z * &c.theta0;
    r.add_scalar_mut(-c.beta0);
    for (h, members) in g.predictor_groups().iter().enumerate() {
        if h == group {
            continue;
        }
        for &j in members {
            add_predictor_term(d, c, j, &mut r, -1.0);
        }
    }
    Ok(r)
}

/// [`partial_residual_main`] with the group's interactions on every other
/// modifier group also removed, leaving only β_[ℓ] and θ_[ℓ][g] in play.
pub fn partial_residual_modifier(
    d: &Dataset,
    c: &CoefficientSet,
    g: &GroupSpec,
    group: usize,
    modifier_group: usize,
) -> Result<DVector<f64>> {
    let mut r = partial_residual_main(d, c, g, group)?;
    if modifier_group >= g.n_modifier_groups() {
        return Err(Error::IndexOutOfRange {
            index: modifier_group,
            limit: g.n_modifier_groups(),
        });
    }
    for &j in &g.predictor_groups()[group] {
        let xj = d.x.column(j);
        for (m, cols) in g.modifier_groups().iter().enumerate() {
            if m == modifier_group {
                continue;
            }
            for &k in cols {
                let t = c.theta[(j, k)];
                if t == 0.0 {
                    continue;
                }
                let zk = d.z.column(k);
                for i in 0..d.n() {
                    r[i] -= xj[i] * zk[i] * t;
                }
            }
        }
    }
    Ok(r)
}

/// The hierarchical penalty λP*_α(β, Θ).
pub fn penalty_value(c: &CoefficientSet, g: &GroupSpec, weights: &PenaltyWeights, cfg: &FitConfig) -> f64 {
    let lam_group = cfg.group_lambda();
    let mut total = 0.0;
    for (l, members) in g.predictor_groups().iter().enumerate() {
        let mut joint_sq = 0.0;
        for &j in members {
            joint_sq += c.beta[j] * c.beta[j];
            joint_sq += c.theta.row(j).norm_squared();
        }
        let mut modifier_terms = 0.0;
        for (m, cols) in g.modifier_groups().iter().enumerate() {
            let mut sq = 0.0;
            for &j in members {
                for &k in cols {
                    sq += c.theta[(j, k)] * c.theta[(j, k)];
                }
            }
            modifier_terms += weights.modifier[m] * sq.sqrt();
        }
        total += lam_group * weights.joint[l] * (joint_sq.sqrt() + modifier_terms);
    }
    total + cfg.l1_lambda() * c.theta.iter().map(|t| t.abs()).sum::<f64>()
}

/// Half mean squared residual of the model.
pub fn loss_value(d: &Dataset, c: &CoefficientSet) -> Result<f64> {
    let yhat = predict(d, c)?;
    Ok((&d.y - yhat).norm_squared() / (2.0 * d.n() as f64))
}

/// Penalized objective J* under the configured weight mode.
pub fn objective_value(d: &Dataset, c: &CoefficientSet, g: &GroupSpec, cfg: &FitConfig) -> Result<f64> {
    g.check_dims(d.p(), d.k())?;
    let weights = PenaltyWeights::new(g, cfg.weight_mode);
    Ok(loss_value(d, c)? + penalty_value(c, g, &weights, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn cfg(lambda: f64, alpha: f64) -> FitConfig {
        FitConfig {
            lambda,
            alpha,
            ..FitConfig::default()
        }
    }

    #[test]
    fn predict_intercept_only() {
        let d = Dataset::new(
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DMatrix::from_column_slice(3, 1, &[1.0, -1.0, 2.0]),
            DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.5]),
        )
        .unwrap();
        let mut c = CoefficientSet::zeros(1, 1);
        c.beta0 = 3.0;
        assert_eq!(predict(&d, &c).unwrap().as_slice(), &[3.0, 3.0, 3.0]);
    }

    #[test]
    fn predict_single_row_arithmetic() {
        // one row; built with N = 2 to satisfy the dataset invariant
        let d = Dataset::new(
            DVector::from_vec(vec![0.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[2.0, 2.0]),
            DMatrix::from_column_slice(2, 1, &[0.5, 0.5]),
        )
        .unwrap();
        let c = CoefficientSet {
            beta0: 0.0,
            theta0: DVector::from_vec(vec![1.0]),
            beta: DVector::from_vec(vec![2.0]),
            theta: DMatrix::from_row_slice(1, 1, &[1.0]),
        };
        assert_eq!(predict(&d, &c).unwrap()[0], 5.5);
    }

    #[test]
    fn objective_examples() {
        let d = Dataset::new(
            DVector::from_vec(vec![2.0, 4.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
            DMatrix::zeros(2, 0),
        )
        .unwrap();
        let mut c = CoefficientSet::zeros(1, 0);
        c.beta0 = 3.0;
        let g = GroupSpec::singletons(1, 0);
        assert!((objective_value(&d, &c, &g, &cfg(0.0, 0.5)).unwrap() - 0.5).abs() < 1e-15);

        // zero residuals, p = K = 1, λ = 1, α = 0.5
        let d = Dataset::new(
            DVector::from_vec(vec![2.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
        )
        .unwrap();
        let c = CoefficientSet {
            beta0: 0.0,
            theta0: DVector::zeros(1),
            beta: DVector::from_vec(vec![1.0]),
            theta: DMatrix::from_row_slice(1, 1, &[1.0]),
        };
        let g = GroupSpec::singletons(1, 1);
        let j = objective_value(&d, &c, &g, &cfg(1.0, 0.5)).unwrap();
        let expected = 0.5 * (2f64.sqrt() + 1.0 / 2f64.sqrt()) + 0.5;
        assert!((j - expected).abs() < 1e-12);
        assert!((j - 1.5607).abs() < 1e-4);
    }

    #[test]
    fn single_group_partial_residual_drops_only_intercepts() {
        let d = Dataset::new(
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 1.0, 1.0]),
            DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
        )
        .unwrap();
        let g = GroupSpec::new(vec![vec![0, 1]], vec![vec![0]], 2, 1).unwrap();
        let c = CoefficientSet {
            beta0: 0.5,
            theta0: DVector::from_vec(vec![0.25]),
            beta: DVector::from_vec(vec![3.0, -1.0]),
            theta: DMatrix::from_row_slice(2, 1, &[1.0, 2.0]),
        };
        let r = partial_residual_main(&d, &c, &g, 0).unwrap();
        for i in 0..3 {
            let expect = d.y[i] - 0.5 - 0.25 * d.z[(i, 0)];
            assert!((r[i] - expect).abs() < 1e-15);
        }
        assert_eq!(r, partial_residual_modifier(&d, &c, &g, 0, 0).unwrap());
        assert!(partial_residual_main(&d, &c, &g, 1).is_err());
    }

    fn random_instance(seed: u64) -> (Dataset, GroupSpec, CoefficientSet) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (n, p, k) = (7, 5, 4);
        let mut u = || rng.random::<f64>() * 2.0 - 1.0;
        let y = DVector::from_fn(n, |_, _| u());
        let x = DMatrix::from_fn(n, p, |_, _| u());
        let z = DMatrix::from_fn(n, k, |_, _| u());
        let c = CoefficientSet {
            beta0: u(),
            theta0: DVector::from_fn(k, |_, _| u()),
            beta: DVector::from_fn(p, |_, _| u()),
            theta: DMatrix::from_fn(p, k, |_, _| u()),
        };
        let g = GroupSpec::new(
            vec![vec![0, 3], vec![1], vec![2, 4]],
            vec![vec![0, 2], vec![1], vec![3]],
            p,
            k,
        )
        .unwrap();
        (Dataset::new(y, x, z).unwrap(), g, c)
    }

    fn group_contribution(d: &Dataset, c: &CoefficientSet, members: &[usize]) -> DVector<f64> {
        let mut out = DVector::zeros(d.n());
        for i in 0..d.n() {
            for &j in members {
                let mut coef = c.beta[j];
                for k in 0..d.k() {
                    coef += c.theta[(j, k)] * d.z[(i, k)];
                }
                out[i] += d.x[(i, j)] * coef;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn residual_identity(seed in 0u64..500) {
            let (d, g, c) = random_instance(seed);
            let full = &d.y - predict(&d, &c).unwrap();
            for (l, members) in g.predictor_groups().iter().enumerate() {
                let partial = partial_residual_main(&d, &c, &g, l).unwrap();
                let contrib = group_contribution(&d, &c, members);
                for i in 0..d.n() {
                    prop_assert!((full[i] - (partial[i] - contrib[i])).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn modifier_residual_matches_dense_definition(seed in 0u64..500) {
            let (d, g, c) = random_instance(seed);
            for (l, members) in g.predictor_groups().iter().enumerate() {
                let base = partial_residual_main(&d, &c, &g, l).unwrap();
                for gi in 0..g.n_modifier_groups() {
                    let r = partial_residual_modifier(&d, &c, &g, l, gi).unwrap();
                    for i in 0..d.n() {
                        let mut expect = base[i];
                        for &j in members {
                            for (m, cols) in g.modifier_groups().iter().enumerate() {
                                if m != gi {
                                    for &k in cols {
                                        expect -= d.x[(i, j)] * c.theta[(j, k)] * d.z[(i, k)];
                                    }
                                }
                            }
                        }
                        prop_assert!((r[i] - expect).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn penalty_is_positively_homogeneous(seed in 0u64..500, t in 0.0f64..5.0) {
            let (_, g, c) = random_instance(seed);
            let cfg = cfg(0.7, 0.3);
            let w = PenaltyWeights::new(&g, WeightMode::Consistent);
            let mut scaled = c.clone();
            scaled.beta *= t;
            scaled.theta *= t;
            let a = penalty_value(&scaled, &g, &w, &cfg);
            let b = t * penalty_value(&c, &g, &w, &cfg);
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()));
        }

        #[test]
        fn objective_invariant_under_group_permutation(seed in 0u64..300) {
            let (d, g, c) = random_instance(seed);
            let cfg = cfg(0.4, 0.5);
            let base = objective_value(&d, &c, &g, &cfg).unwrap();
            // reverse group order and within-group order of predictors
            let perm: Vec<usize> = (0..d.p()).rev().collect();
            let inv: Vec<usize> = {
                let mut inv = vec![0; perm.len()];
                for (new, &old) in perm.iter().enumerate() { inv[old] = new; }
                inv
            };
            let x = d.x.select_columns(&perm);
            let d2 = Dataset::new(d.y.clone(), x, d.z.clone()).unwrap();
            let groups: Vec<Vec<usize>> = g.predictor_groups().iter().rev()
                .map(|m| m.iter().rev().map(|&j| inv[j]).collect()).collect();
            let g2 = GroupSpec::new(groups, g.modifier_groups().to_vec(), d.p(), d.k()).unwrap();
            let c2 = CoefficientSet {
                beta0: c.beta0,
                theta0: c.theta0.clone(),
                beta: DVector::from_fn(d.p(), |j, _| c.beta[perm[j]]),
                theta: c.theta.select_rows(&perm),
            };
            let permuted = objective_value(&d2, &c2, &g2, &cfg).unwrap();
            prop_assert!((base - permuted).abs() < 1e-10);
        }

        #[test]
        fn zero_theta_singletons_is_lasso_objective(seed in 0u64..300) {
            let (d, _, mut c) = random_instance(seed);
            c.theta.fill(0.0);
            let g = GroupSpec::singletons(d.p(), d.k());
            let cfg = cfg(0.9, 0.25);
            let j = objective_value(&d, &c, &g, &cfg).unwrap();
            let lasso = loss_value(&d, &c).unwrap()
                + cfg.group_lambda() * c.beta.iter().map(|b| b.abs()).sum::<f64>();
            prop_assert!((j - lasso).abs() < 1e-12);
        }
    }
}
