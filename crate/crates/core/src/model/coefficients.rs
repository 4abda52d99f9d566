use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intercept, modifier intercepts, main coefficients and the p×K
/// interaction matrix of the varying-coefficient model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub beta0: f64,
    pub theta0: DVector<f64>,
    pub beta: DVector<f64>,
    pub theta: DMatrix<f64>,
}

impl CoefficientSet {
    pub fn zeros(p: usize, k: usize) -> Self {
        CoefficientSet {
            beta0: 0.0,
            theta0: DVector::zeros(k),
            beta: DVector::zeros(p),
            theta: DMatrix::zeros(p, k),
        }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn k(&self) -> usize {
        self.theta0.len()
    }

    pub fn check_dims(&self, p: usize, k: usize) -> Result<()> {
        if self.beta.len() != p || self.theta0.len() != k || self.theta.nrows() != p || self.theta.ncols() != k {
            return Err(Error::dims(format!(
                "coefficients sized for p = {}, K = {} but data has p = {p}, K = {k}",
                self.beta.len(),
                self.theta0.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.beta0.is_finite()
            && self.theta0.iter().all(|v| v.is_finite())
            && self.beta.iter().all(|v| v.is_finite())
            && self.theta.iter().all(|v| v.is_finite())
    }

    /// Largest absolute difference over every entry.
    pub fn max_abs_diff(&self, other: &CoefficientSet) -> f64 {
        let mut m = (self.beta0 - other.beta0).abs();
        for (a, b) in self.theta0.iter().zip(other.theta0.iter()) {
            m = m.max((a - b).abs());
        }
        for (a, b) in self.beta.iter().zip(other.beta.iter()) {
            m = m.max((a - b).abs());
        }
        for (a, b) in self.theta.iter().zip(other.theta.iter()) {
            m = m.max((a - b).abs());
        }
        m
    }

    pub fn to_record(&self) -> CoefficientRecord {
        CoefficientRecord {
            beta0: self.beta0,
            theta0: self.theta0.iter().copied().collect(),
            beta: self.beta.iter().copied().collect(),
            theta: self.theta.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

/// Serializable mirror of [`CoefficientSet`]; `theta` is row-major (p rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub beta0: f64,
    pub theta0: Vec<f64>,
    pub beta: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
}

impl CoefficientRecord {
    pub fn to_set(&self) -> Result<CoefficientSet> {
        let p = self.beta.len();
        let k = self.theta0.len();
        if self.theta.len() != p || self.theta.iter().any(|r| r.len() != k) {
            return Err(Error::dims("theta must be p rows of K entries"));
        }
        let flat: Vec<f64> = self.theta.iter().flatten().copied().collect();
        Ok(CoefficientSet {
            beta0: self.beta0,
            theta0: DVector::from_vec(self.theta0.clone()),
            beta: DVector::from_vec(self.beta.clone()),
            theta: DMatrix::from_row_slice(p, k, &flat),
        })
    }
}
