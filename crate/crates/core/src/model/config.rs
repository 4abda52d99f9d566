use serde::{Deserialize, Serialize};

use super::GroupSpec;
use crate::error::{Error, Result};

/// How the modifier-group norms are weighted inside the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Joint weight √p_ℓ, modifier-group weight √p_g / √(1+K). The
    /// modifier-group screening threshold is then the exact optimality
    /// condition for θ_[ℓ][g] = 0.
    #[default]
    Consistent,
    /// Joint weight √p_ℓ, modifier-group weight √p_g, as in the displayed
    /// objective. The modifier screening threshold stays at √p_g / √(1+K).
    PaperLiteral,
    /// All weights 1. With singleton predictor groups and a single modifier
    /// group this is the pliable Lasso penalty.
    Unit,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(WeightMode::Consistent),
            "paper-literal" | "literal" => Ok(WeightMode::PaperLiteral),
            "unit" => Ok(WeightMode::Unit),
            other => Err(Error::config(format!("unknown weight mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub weight_mode: WeightMode,
    /// Outer convergence tolerance on the absolute objective change.
    pub tol: f64,
    pub max_outer_iter: usize,
    pub max_inner_iter: usize,
    pub inner_tol: f64,
    /// Refuse data that has not been through [`crate::model::Dataset::standardize`].
    pub require_standardized: bool,
    /// Fit θ₀, the unpenalized coefficients of the modifiers themselves.
    /// When off only β₀ is fitted and θ₀ stays zero.
    #[serde(default = "default_true")]
    pub modifier_intercepts: bool,
}

fn default_true() -> bool {
    true
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 0.1,
            alpha: 0.5,
            weight_mode: WeightMode::Consistent,
            tol: 1e-5,
            max_outer_iter: 1000,
            max_inner_iter: 200,
            inner_tol: 1e-7,
            require_standardized: true,
            modifier_intercepts: true,
        }
    }
}

impl FitConfig {
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(Error::config("tolerances must be positive"));
        }
        if self.max_outer_iter == 0 || self.max_inner_iter == 0 {
            return Err(Error::config("iteration caps must be positive"));
        }
        Ok(())
    }

    /// (1−α)λ, the scale of every ℓ₂ term.
    pub fn group_lambda(&self) -> f64 {
        (1.0 - self.alpha) * self.lambda
    }

    /// αλ, the scale of the ℓ₁ term on the interactions.
    pub fn l1_lambda(&self) -> f64 {
        self.alpha * self.lambda
    }
}

/// Per-group penalty weights derived from a [`GroupSpec`] and a
/// [`WeightMode`].
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    /// Multiplier on the ℓ-th group's terms (√p_ℓ or 1).
    pub joint: Vec<f64>,
    /// Weight of each modifier-group norm inside the penalty.
    pub modifier: Vec<f64>,
    /// Weight used by the modifier-group screening test.
    pub modifier_screen: Vec<f64>,
    /// Weight used by the per-group modifier condition of the joint screen.
    pub modifier_joint_screen: Vec<f64>,
}

impl PenaltyWeights {
    pub fn new(groups: &GroupSpec, mode: WeightMode) -> Self {
        let k = groups.k() as f64;
        let joint = groups
            .predictor_groups()
            .iter()
            .map(|g| match mode {
                WeightMode::Unit => 1.0,
                _ => (g.len() as f64).sqrt(),
            })
            .collect();
        let consistent: Vec<f64> = groups
            .modifier_groups()
            .iter()
            .map(|g| (g.len() as f64).sqrt() / (1.0 + k).sqrt())
            .collect();
        let literal: Vec<f64> = groups
            .modifier_groups()
            .iter()
            .map(|g| (g.len() as f64).sqrt())
            .collect();
        let ones = vec![1.0; groups.n_modifier_groups()];
        let (modifier, modifier_screen, modifier_joint_screen) = match mode {
            WeightMode::Consistent => (consistent.clone(), consistent.clone(), consistent),
            WeightMode::PaperLiteral => (literal.clone(), consistent, literal),
            WeightMode::Unit => (ones.clone(), ones.clone(), ones),
        };
        PenaltyWeights {
            joint,
            modifier,
            modifier_screen,
            modifier_joint_screen,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_per_mode() {
        let g = GroupSpec::new(vec![vec![0, 1], vec![2]], vec![vec![0], vec![1, 2]], 3, 3).unwrap();
        let c = PenaltyWeights::new(&g, WeightMode::Consistent);
        assert!((c.joint[0] - 2f64.sqrt()).abs() < 1e-15);
        assert!((c.modifier[1] - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let l = PenaltyWeights::new(&g, WeightMode::PaperLiteral);
        assert!((l.modifier[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!((l.modifier_screen[1] - 2f64.sqrt() / 2.0).abs() < 1e-15);
        let u = PenaltyWeights::new(&g, WeightMode::Unit);
        assert_eq!(u.joint, vec![1.0, 1.0]);
        assert_eq!(u.modifier, vec![1.0, 1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        assert!(FitConfig::default().with_lambda(-1.0).validate().is_err());
        let mut c = FitConfig::default();
        c.alpha = 1.5;
        assert!(c.validate().is_err());
        c.alpha = 0.5;
        c.tol = 0.0;
        assert!(c.validate().is_err());
    }
}
