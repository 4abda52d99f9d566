use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::CoefficientSet;
use crate::error::{Error, Result};

/// Response, main predictors and modifying variables for one sample.
///
/// Columns of `z` flagged in `z_dummy` are 0/1 indicators; they are left
/// untouched by [`Dataset::standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub x_names: Vec<String>,
    pub z_names: Vec<String>,
    pub z_dummy: Vec<bool>,
    pub standardized: bool,
}

impl Dataset {
    /// Builds a dataset with generated column names and no dummy columns.
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        let x_names = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        let z_names = (1..=z.ncols()).map(|k| format!("z{k}")).collect();
        let z_dummy = vec![false; z.ncols()];
        Self::with_names(y, x, z, x_names, z_names, z_dummy)
    }

    pub fn with_names(
        y: DVector<f64>,
        x: DMatrix<f64>,
        z: DMatrix<f64>,
        x_names: Vec<String>,
        z_names: Vec<String>,
        z_dummy: Vec<bool>,
    ) -> Result<Self> {
        let d = Dataset {
            y,
            x,
            z,
            x_names,
            z_names,
            z_dummy,
            standardized: false,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.y.len();
        if n < 2 {
            return Err(Error::dims(format!("need at least 2 rows, got {n}")));
        }
        if self.x.ncols() == 0 {
            return Err(Error::dims("at least one main predictor is required"));
        }
        if self.x.nrows() != n || self.z.nrows() != n {
            return Err(Error::dims(format!(
                "y has {n} rows, X has {}, Z has {}",
                self.x.nrows(),
                self.z.nrows()
            )));
        }
        if self.x_names.len() != self.x.ncols()
            || self.z_names.len() != self.z.ncols()
            || self.z_dummy.len() != self.z.ncols()
        {
            return Err(Error::dims("column metadata does not match matrix widths"));
        }
        if let Some(i) = self.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "y",
                row: i,
                col: 0,
            });
        }
        check_finite("X", &self.x)?;
        check_finite("Z", &self.z)?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn k(&self) -> usize {
        self.z.ncols()
    }

    /// Marks the given Z columns (0-based) as dummy indicators.
    pub fn with_dummy_columns(mut self, dummies: &[usize]) -> Result<Self> {
        for &k in dummies {
            if k >= self.k() {
                return Err(Error::IndexOutOfRange {
                    index: k,
                    limit: self.k(),
                });
            }
            self.z_dummy[k] = true;
        }
        Ok(self)
    }

    /// Row subset, preserving metadata and the standardized flag.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        let x = self.x.select_rows(rows);
        let z = self.z.select_rows(rows);
        Dataset {
            y,
            x,
            z,
            x_names: self.x_names.clone(),
            z_names: self.z_names.clone(),
            z_dummy: self.z_dummy.clone(),
            standardized: self.standardized,
        }
    }

    /// Centers y, and centers and scales every X column and every non-dummy
    /// Z column to unit sample standard deviation.
    pub fn standardize(&self) -> Result<(Dataset, StandardizationRecord)> {
        if self.standardized {
            return Err(Error::config("dataset is already standardized"));
        }
        let y_mean = self.y.mean();
        let mut x_mean = Vec::with_capacity(self.p());
        let mut x_scale = Vec::with_capacity(self.p());
        for (j, col) in self.x.column_iter().enumerate() {
            let (m, s) = mean_sd(col.iter().copied());
            if !(s > 1e-12 * m.abs().max(1.0)) {
                return Err(Error::ConstantColumn(self.x_names[j].clone()));
            }
            x_mean.push(m);
            x_scale.push(s);
        }
        let mut z_mean = Vec::with_capacity(self.k());
        let mut z_scale = Vec::with_capacity(self.k());
        for (k, col) in self.z.column_iter().enumerate() {
            if self.z_dummy[k] {
                z_mean.push(0.0);
                z_scale.push(1.0);
                continue;
            }
            let (m, s) = mean_sd(col.iter().copied());
            if !(s > 1e-12 * m.abs().max(1.0)) {
                return Err(Error::ConstantColumn(self.z_names[k].clone()));
            }
            z_mean.push(m);
            z_scale.push(s);
        }
        let record = StandardizationRecord {
            y_mean,
            x_mean,
            x_scale,
            z_mean,
            z_scale,
        };
        let out = record.apply(self)?;
        Ok((out, record))
    }
}

fn check_finite(what: &'static str, m: &DMatrix<f64>) -> Result<()> {
    for (col, c) in m.column_iter().enumerate() {
        if let Some(row) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what, row, col });
        }
    }
    Ok(())
}

/// Sample mean and standard deviation (n - 1 denominator).
pub(crate) fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Location and scale used by [`Dataset::standardize`].
///
/// Dummy columns carry mean 0 and scale 1, so the same affine map applies
/// to every column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationRecord {
    pub y_mean: f64,
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub z_mean: Vec<f64>,
    pub z_scale: Vec<f64>,
}

impl StandardizationRecord {
    /// Applies the stored transform to raw data (e.g. held-out rows).
    pub fn apply(&self, d: &Dataset) -> Result<Dataset> {
        if d.p() != self.x_mean.len() || d.k() != self.z_mean.len() {
            return Err(Error::dims("record does not match dataset widths"));
        }
        let mut x = d.x.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.apply(|v| *v = (*v - self.x_mean[j]) / self.x_scale[j]);
        }
        let mut z = d.z.clone();
        for (k, mut col) in z.column_iter_mut().enumerate() {
            col.apply(|v| *v = (*v - self.z_mean[k]) / self.z_scale[k]);
        }
        Ok(Dataset {
            y: d.y.add_scalar(-self.y_mean),
            x,
            z,
            x_names: d.x_names.clone(),
            z_names: d.z_names.clone(),
            z_dummy: d.z_dummy.clone(),
            standardized: true,
        })
    }

    /// Maps coefficients fitted on standardized data back to the units of
    /// the raw data, so that predictions on raw inputs agree exactly.
    pub fn to_original(&self, c: &CoefficientSet) -> CoefficientSet {
        let p = self.x_mean.len();
        let k = self.z_mean.len();
        let mut beta = DVector::zeros(p);
        let mut theta = DMatrix::zeros(p, k);
        let mut theta0 = DVector::zeros(k);
        let mut beta0 = self.y_mean + c.beta0;
        for kk in 0..k {
            theta0[kk] = c.theta0[kk] / self.z_scale[kk];
            beta0 -= c.theta0[kk] * self.z_mean[kk] / self.z_scale[kk];
        }
        for j in 0..p {
            let sx = self.x_scale[j];
            let mx = self.x_mean[j];
            // slope at z = 0 in raw units, before rescaling by sx
            let mut b = c.beta[j];
            for kk in 0..k {
                b -= c.theta[(j, kk)] * self.z_mean[kk] / self.z_scale[kk];
            }
            beta[j] = b / sx;
            beta0 -= mx * b / sx;
            for kk in 0..k {
                let t = c.theta[(j, kk)] / (self.z_scale[kk] * sx);
                theta[(j, kk)] = t;
                theta0[kk] -= mx * t;
            }
        }
        CoefficientSet {
            beta0,
            theta0,
            beta,
            theta,
        }
    }
}
