#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use svreg_core::{Dataset, FitConfig, GroupSpec, WeightMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, c, |_, _| rng.sample(StandardNormal))
}

/// Standardized random data with a few true effects. `groups` draws a random
/// partition of the predictors and modifiers.
pub fn random_instance(seed: u64, n: usize, p: usize, k: usize, groups: bool) -> (Dataset, GroupSpec) {
    let mut r = rng(seed);
    let x = normal_matrix(&mut r, n, p);
    let z = normal_matrix(&mut r, n, k);
    let mut y = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    for i in 0..n {
        y[i] += 1.5 * x[(i, 0)];
        if p > 1 && k > 0 {
            y[i] += (1.0 - z[(i, 0)]) * x[(i, 1)];
        }
    }
    let d = Dataset::new(y, x, z).unwrap().standardize().unwrap().0;
    let gs = if groups {
        GroupSpec::new(random_partition(&mut r, p), random_partition(&mut r, k), p, k).unwrap()
    } else {
        GroupSpec::singletons(p, k)
    };
    (d, gs)
}

pub fn random_partition(r: &mut ChaCha8Rng, m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for j in 0..m {
        if out.is_empty() || r.random_bool(0.6) {
            out.push(vec![j]);
        } else {
            let last = out.len() - 1;
            let g = r.random_range(0..=last);
            out[g].push(j);
        }
    }
    out
}

pub fn tight(lambda: f64, alpha: f64, mode: WeightMode) -> FitConfig {
    FitConfig {
        lambda,
        alpha,
        weight_mode: mode,
        tol: 1e-13,
        max_outer_iter: 20_000,
        max_inner_iter: 5_000,
        inner_tol: 1e-14,
        ..FitConfig::default()
    }
}

/// The penalized problem with the intercepts profiled out, written over
/// `v = (β_j, θ_j1..θ_jK)` for j = 1..p.
pub struct Profiled {
    pub n: f64,
    pub f: DMatrix<f64>,
    pub y: DVector<f64>,
    /// (coefficient indices, weight) of every ℓ₂ term.
    pub norms: Vec<(Vec<usize>, f64)>,
    /// Indices under the ℓ₁ term and its weight.
    pub l1: (Vec<usize>, f64),
}

impl Profiled {
    pub fn new(d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> Self {
        let (n, p, k) = (d.n(), d.p(), d.k());
        let stride = k + 1;
        let mut f = DMatrix::zeros(n, p * stride);
        for j in 0..p {
            for i in 0..n {
                f[(i, j * stride)] = d.x[(i, j)];
                for m in 0..k {
                    f[(i, j * stride + 1 + m)] = d.x[(i, j)] * d.z[(i, m)];
                }
            }
        }
        let mut phi = DMatrix::from_element(n, k + 1, 1.0);
        phi.columns_mut(1, k).copy_from(&d.z);
        let svd = phi.clone().svd(true, false);
        let u = svd.u.unwrap();
        let rank = svd.singular_values.iter().filter(|&&s| s > 1e-10).count();
        let u = u.columns(0, rank).into_owned();
        let proj = |m: &DMatrix<f64>| m - &u * (u.transpose() * m);
        let f = proj(&f);
        let y = proj(&DMatrix::from_column_slice(n, 1, d.y.as_slice()))
            .column(0)
            .into_owned();

        let lam_g = (1.0 - cfg.alpha) * cfg.lambda;
        let kf = k as f64;
        let mut norms = Vec::new();
        for members in gs.predictor_groups() {
            let a = match cfg.weight_mode {
                WeightMode::Unit => 1.0,
                _ => (members.len() as f64).sqrt(),
            };
            let all: Vec<usize> = members
                .iter()
                .flat_map(|&j| (0..stride).map(move |t| j * stride + t))
                .collect();
            norms.push((all, a * lam_g));
            for g in gs.modifier_groups() {
                let w = match cfg.weight_mode {
                    WeightMode::Unit => 1.0,
                    WeightMode::Consistent => (g.len() as f64).sqrt() / (1.0 + kf).sqrt(),
                    WeightMode::PaperLiteral => (g.len() as f64).sqrt(),
                };
                let idx: Vec<usize> = members
                    .iter()
                    .flat_map(|&j| g.iter().map(move |&m| j * stride + 1 + m))
                    .collect();
                norms.push((idx, a * w * lam_g));
            }
        }
        let thetas: Vec<usize> = (0..p).flat_map(|j| (0..k).map(move |m| j * stride + 1 + m)).collect();
        Profiled {
            n: n as f64,
            f,
            y,
            norms,
            l1: (thetas, cfg.alpha * cfg.lambda),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn value(&self, v: &DVector<f64>) -> f64 {
        let r = &self.y - &self.f * v;
        let mut j = r.norm_squared() / (2.0 * self.n);
        for (idx, w) in &self.norms {
            j += w * idx.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt();
        }
        j + self.l1.1 * self.l1.0.iter().map(|&i| v[i].abs()).sum::<f64>()
    }

    /// Pack the fitted β, Θ into `v`.
    pub fn pack(&self, c: &svreg_core::CoefficientSet) -> DVector<f64> {
        let (p, k) = (c.p(), c.k());
        let stride = k + 1;
        let mut v = DVector::zeros(p * stride);
        for j in 0..p {
            v[j * stride] = c.beta[j];
            for m in 0..k {
                v[j * stride + 1 + m] = c.theta[(j, m)];
            }
        }
        v
    }

    /// Exact minimum by enumerating supports and ℓ₁ sign patterns. On each
    /// face the objective is smooth and convex, so Newton's method finds
    /// the face minimizer; a candidate counts only if it stays on its face.
    /// Feasible for at most a handful of coordinates.
    pub fn exact_minimum(&self) -> (f64, DVector<f64>) {
        let m = self.dim();
        assert!(m <= 8, "face enumeration is exponential");
        let mut best = (self.value(&DVector::zeros(m)), DVector::zeros(m));
        let is_l1: Vec<bool> = (0..m).map(|i| self.l1.0.contains(&i)).collect();
        for mask in 1u32..(1 << m) {
            let support: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            let signed: Vec<usize> = support.iter().copied().filter(|&i| is_l1[i]).collect();
            for signs in 0u32..(1 << signed.len()) {
                let sigma: Vec<(usize, f64)> = signed
                    .iter()
                    .enumerate()
                    .map(|(t, &i)| (i, if signs & (1 << t) != 0 { 1.0 } else { -1.0 }))
                    .collect();
                if let Some(v) = self.face_minimum(&support, &sigma) {
                    let val = self.value(&v);
                    if val < best.0 {
                        best = (val, v);
                    }
                }
            }
        }
        best
    }

    fn face_minimum(&self, support: &[usize], sigma: &[(usize, f64)]) -> Option<DVector<f64>> {
        let s = support.len();
        let fs = self.f.select_columns(support);
        let gram = fs.tr_mul(&fs) / self.n;
        let fy = fs.tr_mul(&self.y) / self.n;
        let mut lin = DVector::zeros(s);
        for &(i, sg) in sigma {
            let t = support.iter().position(|&x| x == i).unwrap();
            lin[t] = self.l1.1 * sg;
        }
        let terms: Vec<(Vec<usize>, f64)> = self
            .norms
            .iter()
            .map(|(idx, w)| {
                (
                    idx.iter()
                        .filter_map(|i| support.iter().position(|x| x == i))
                        .collect::<Vec<_>>(),
                    *w,
                )
            })
            .filter(|(idx, w)| !idx.is_empty() && *w > 0.0)
            .collect();
        let face = |u: &DVector<f64>| -> f64 {
            let mut val = 0.5 * u.dot(&(&gram * u)) - fy.dot(u) + lin.dot(u);
            for (idx, w) in &terms {
                val += w * idx.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
            }
            val
        };
        // Start from a point with the required signs.
        let mut u = DVector::from_element(s, 0.5);
        for &(i, sg) in sigma {
            let t = support.iter().position(|&x| x == i).unwrap();
            u[t] = 0.5 * sg;
        }
        for _ in 0..200 {
            let mut grad = &gram * &u - &fy + &lin;
            let mut hess = gram.clone();
            for (idx, w) in &terms {
                let nrm = idx.iter().map(|&i| u[i] * u[i]).sum::<f64>().sqrt();
                if nrm < 1e-300 {
                    return None;
                }
                for &a in idx {
                    grad[a] += w * u[a] / nrm;
                    for &b in idx {
                        let eye = if a == b { 1.0 } else { 0.0 };
                        hess[(a, b)] += w * (eye / nrm - u[a] * u[b] / nrm.powi(3));
                    }
                }
            }
            if grad.amax() < 1e-13 {
                break;
            }
            let step = hess
                .clone()
                .cholesky()
                .map(|c| c.solve(&grad))
                .unwrap_or_else(|| grad.clone());
            let f0 = face(&u);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-20 {
                let cand = &u - &step * t;
                if face(&cand) <= f0 {
                    u = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
            if u.amax() > 1e6 {
                return None;
            }
        }
        let mut v = DVector::zeros(self.dim());
        for (t, &i) in support.iter().enumerate() {
            if u[t] == 0.0 {
                return None;
            }
            v[i] = u[t];
        }
        for &(i, sg) in sigma {
            if v[i] * sg <= 0.0 {
                return None;
            }
        }
        Some(v)
    }
}
