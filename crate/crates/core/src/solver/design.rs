use nalgebra::{DMatrix, DVector};

use crate::kernels::BlockLayout;
use crate::model::{Dataset, FitConfig, GroupSpec};

/// Quantities reused by every fit on the same dataset and group structure:
/// the expanded feature matrix, per-group Gram blocks and the projector
/// onto the intercept columns `[1, Z]`.
#[derive(Debug, Clone)]
pub struct Design {
    n: usize,
    k: usize,
    /// Column `j(K+1)` is xⱼ, column `j(K+1)+1+k` is xⱼ∘z_k.
    features: DMatrix<f64>,
    layouts: Vec<BlockLayout>,
    grams: Vec<DMatrix<f64>>,
    zero_blocks: Vec<bool>,
    /// Pseudo-inverse of Φ = [1, Z], (K+1)×N, or of Φ = 1 when the
    /// modifier intercepts are not fitted.
    intercept_pinv: DMatrix<f64>,
}

impl Design {
    pub fn new(d: &Dataset, gs: &GroupSpec) -> Self {
        Self::build(d, gs, true)
    }

    pub fn for_config(d: &Dataset, gs: &GroupSpec, cfg: &FitConfig) -> Self {
        Self::build(d, gs, cfg.modifier_intercepts)
    }

    fn build(d: &Dataset, gs: &GroupSpec, modifier_intercepts: bool) -> Self {
        let (n, p, k) = (d.n(), d.p(), d.k());
        let stride = k + 1;
        let mut features = DMatrix::zeros(n, p * stride);
        for j in 0..p {
            let xj = d.x.column(j);
            features.column_mut(j * stride).copy_from(&xj);
            for m in 0..k {
                let zm = d.z.column(m);
                let mut col = features.column_mut(j * stride + 1 + m);
                for i in 0..n {
                    col[i] = xj[i] * zm[i];
                }
            }
        }
        let nf = n as f64;
        let mut layouts = Vec::with_capacity(gs.n_predictor_groups());
        let mut grams = Vec::with_capacity(gs.n_predictor_groups());
        let mut zero_blocks = Vec::with_capacity(gs.n_predictor_groups());
        for members in gs.predictor_groups() {
            let layout = BlockLayout::new(members.clone(), gs);
            let cols = block_columns(&features, &layout, stride);
            let gram = cols.tr_mul(&cols) / nf;
            zero_blocks.push(members.iter().all(|&j| d.x.column(j).iter().all(|&v| v == 0.0)));
            layouts.push(layout);
            grams.push(gram);
        }
        let intercept_pinv = if modifier_intercepts {
            let mut phi = DMatrix::from_element(n, k + 1, 1.0);
            phi.columns_mut(1, k).copy_from(&d.z);
            pseudo_inverse(&phi)
        } else {
            let mut pinv = DMatrix::zeros(k + 1, n);
            pinv.row_mut(0).fill(1.0 / nf);
            pinv
        };
        Design {
            n,
            k,
            features,
            layouts,
            grams,
            zero_blocks,
            intercept_pinv,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn layout(&self, group: usize) -> &BlockLayout {
        &self.layouts[group]
    }

    pub(crate) fn gram(&self, group: usize) -> &DMatrix<f64> {
        &self.grams[group]
    }

    pub(crate) fn is_zero_block(&self, group: usize) -> bool {
        self.zero_blocks[group]
    }

    pub(crate) fn n_groups(&self) -> usize {
        self.layouts.len()
    }

    pub(crate) fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// Column of the feature matrix holding block position `pos`.
    #[inline]
    pub(crate) fn block_column(&self, group: usize, pos: usize) -> usize {
        let layout = &self.layouts[group];
        let stride = self.k + 1;
        layout.members[pos / stride] * stride + pos % stride
    }

    /// `(1/N) F_ℓᵀ r`.
    pub(crate) fn correlate(&self, group: usize, r: &DVector<f64>) -> Vec<f64> {
        let layout = &self.layouts[group];
        let stride = self.k + 1;
        let nf = self.n as f64;
        let mut q = Vec::with_capacity(layout.dim());
        for &j in &layout.members {
            for t in 0..stride {
                q.push(self.features.column(j * stride + t).dot(r) / nf);
            }
        }
        q
    }

    /// `r -= F_ℓ Δ`, skipping zero entries of Δ.
    pub(crate) fn subtract_block(&self, group: usize, delta: &[f64], r: &mut DVector<f64>) {
        for (pos, &dv) in delta.iter().enumerate() {
            if dv != 0.0 {
                let col = self.features.column(self.block_column(group, pos));
                r.axpy(-dv, &col, 1.0);
            }
        }
    }

    /// Least-squares coefficients of `r` on `[1, Z]`.
    pub(crate) fn intercept_fit(&self, r: &DVector<f64>) -> DVector<f64> {
        &self.intercept_pinv * r
    }
}

fn block_columns(features: &DMatrix<f64>, layout: &BlockLayout, stride: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(features.nrows(), layout.dim());
    for (m, &j) in layout.members.iter().enumerate() {
        out.columns_mut(m * stride, stride)
            .copy_from(&features.columns(j * stride, stride));
    }
    out
}

/// Moore-Penrose pseudo-inverse; Cholesky of the normal equations when they
/// are well conditioned, SVD otherwise.
pub(crate) fn pseudo_inverse(a: &DMatrix<f64>) -> DMatrix<f64> {
    let ata = a.tr_mul(a);
    if let Some(chol) = ata.clone().cholesky() {
        let diag_min = chol.l().diagonal().iter().fold(f64::INFINITY, |m, &v| m.min(v.abs()));
        let diag_max = chol.l().diagonal().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if diag_min > 1e-7 * diag_max {
            return chol.solve(&a.transpose());
        }
    }
    let svd = a.clone().svd(true, true);
    let eps = 1e-12 * svd.singular_values.max().max(1.0);
    svd.pseudo_inverse(eps).expect("both factors were computed")
}
