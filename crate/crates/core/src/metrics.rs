//! Selection and prediction metrics.
//!
//! Selection is scored over a universe of items. With
//! [`Universe::Variables`] (the default) the items are the main predictors
//! and the modifying variables, a modifying variable counting as selected
//! when any of its interaction coefficients is nonzero for any predictor.
//! [`Universe::Coefficients`] scores every main coefficient and every
//! (predictor, modifier) interaction instead.

use serde::{Deserialize, Serialize};

use crate::model::CoefficientSet;
use crate::simgen::{ModifierKind, SelectionTruth};
use crate::tuning::PathResult;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionMask {
    pub main_selected: Vec<bool>,
    /// p rows of K flags.
    pub interaction_selected: Vec<Vec<bool>>,
}

pub fn selection_mask(c: &CoefficientSet, tol: f64) -> SelectionMask {
    let (p, k) = (c.p(), c.k());
    let interaction_selected: Vec<Vec<bool>> = (0..p)
        .map(|j| (0..k).map(|m| c.theta[(j, m)].abs() > tol).collect())
        .collect();
    let main_selected = (0..p)
        .map(|j| c.beta[j].abs() > tol || interaction_selected[j].iter().any(|&s| s))
        .collect();
    SelectionMask {
        main_selected,
        interaction_selected,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Universe {
    #[default]
    Variables,
    Coefficients,
}

/// How a categorical modifier's dummy columns are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoricalScoring {
    /// One unit per categorical variable, selected if any dummy is.
    #[default]
    Grouped,
    /// One unit per dummy column.
    PerDummy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scoring {
    pub universe: Universe,
    pub categorical: CategoricalScoring,
}

/// A modifier unit: the Z columns scored together, and its kind.
struct Unit {
    columns: Vec<usize>,
    kind: ModifierKind,
}

fn modifier_units(truth: &SelectionTruth, categorical: CategoricalScoring) -> Vec<Unit> {
    let mut units = Vec::new();
    for m in &truth.modifiers {
        match (m.kind, categorical) {
            (ModifierKind::Categorical, CategoricalScoring::PerDummy) => {
                for &c in &m.columns {
                    units.push(Unit {
                        columns: vec![c],
                        kind: m.kind,
                    });
                }
            }
            _ => units.push(Unit {
                columns: m.columns.clone(),
                kind: m.kind,
            }),
        }
    }
    units
}

fn any_in(rows: &[Vec<bool>], cols: &[usize]) -> bool {
    rows.iter().any(|row| cols.iter().any(|&k| row[k]))
}

/// (selected, relevant) for every item of the universe, mains first.
fn scored_items(mask: &SelectionMask, truth: &SelectionTruth, scoring: Scoring) -> Vec<(bool, bool)> {
    let mut items: Vec<(bool, bool)> = mask
        .main_selected
        .iter()
        .zip(&truth.main_relevant)
        .map(|(&s, &r)| (s, r))
        .collect();
    let units = modifier_units(truth, scoring.categorical);
    match scoring.universe {
        Universe::Variables => {
            for u in &units {
                items.push((
                    any_in(&mask.interaction_selected, &u.columns),
                    any_in(&truth.interaction_relevant, &u.columns),
                ));
            }
        }
        Universe::Coefficients => {
            for j in 0..mask.main_selected.len() {
                for u in &units {
                    let sel = u.columns.iter().any(|&k| mask.interaction_selected[j][k]);
                    let rel = u.columns.iter().any(|&k| truth.interaction_relevant[j][k]);
                    items.push((sel, rel));
                }
            }
        }
    }
    items
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionRates {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub fdr: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub geo_mean: f64,
}

impl ConfusionRates {
    pub fn from_items(items: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let (mut tp, mut fp, mut tn, mut fneg) = (0, 0, 0, 0);
        for (sel, rel) in items {
            match (sel, rel) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fneg += 1,
            }
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let fdr = ratio(fp, tp + fp);
        let sensitivity = if tp + fneg == 0 { 1.0 } else { ratio(tp, tp + fneg) };
        let specificity = if tn + fp == 0 { 1.0 } else { ratio(tn, tn + fp) };
        ConfusionRates {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fneg,
            fdr,
            sensitivity,
            specificity,
            geo_mean: (sensitivity * specificity).sqrt(),
        }
    }

    pub fn false_positive_rate(&self) -> f64 {
        1.0 - self.specificity
    }
}

pub fn confusion_rates(mask: &SelectionMask, truth: &SelectionTruth, scoring: Scoring) -> ConfusionRates {
    ConfusionRates::from_items(scored_items(mask, truth, scoring))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    MainRelevant,
    MainIrrelevant,
    ModifierRelevant,
    ModifierRelevantContinuous,
    ModifierRelevantCategorical,
    ModifierIrrelevant,
    ModifierIrrelevantContinuous,
    ModifierIrrelevantCategorical,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::MainRelevant,
        Category::MainIrrelevant,
        Category::ModifierRelevant,
        Category::ModifierRelevantContinuous,
        Category::ModifierRelevantCategorical,
        Category::ModifierIrrelevant,
        Category::ModifierIrrelevantContinuous,
        Category::ModifierIrrelevantCategorical,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Category::MainRelevant => "main/relevant",
            Category::MainIrrelevant => "main/irrelevant",
            Category::ModifierRelevant => "modifier/relevant",
            Category::ModifierRelevantContinuous => "modifier/relevant/continuous",
            Category::ModifierRelevantCategorical => "modifier/relevant/categorical",
            Category::ModifierIrrelevant => "modifier/irrelevant",
            Category::ModifierIrrelevantContinuous => "modifier/irrelevant/continuous",
            Category::ModifierIrrelevantCategorical => "modifier/irrelevant/categorical",
        }
    }

    pub fn is_relevant(self) -> bool {
        matches!(
            self,
            Category::MainRelevant
                | Category::ModifierRelevant
                | Category::ModifierRelevantContinuous
                | Category::ModifierRelevantCategorical
        )
    }

    fn contains_modifier(self, relevant: bool, kind: ModifierKind) -> bool {
        match self {
            Category::ModifierRelevant => relevant,
            Category::ModifierRelevantContinuous => relevant && kind == ModifierKind::Continuous,
            Category::ModifierRelevantCategorical => relevant && kind == ModifierKind::Categorical,
            Category::ModifierIrrelevant => !relevant,
            Category::ModifierIrrelevantContinuous => !relevant && kind == ModifierKind::Continuous,
            Category::ModifierIrrelevantCategorical => !relevant && kind == ModifierKind::Categorical,
            _ => false,
        }
    }
}

/// Fraction of each category selected in one replication, `None` where the
/// category has no members.
pub fn selected_fractions(
    mask: &SelectionMask,
    truth: &SelectionTruth,
    categorical: CategoricalScoring,
) -> Vec<(Category, Option<f64>)> {
    let units = modifier_units(truth, categorical);
    let unit_state: Vec<(bool, bool, ModifierKind)> = units
        .iter()
        .map(|u| {
            (
                any_in(&mask.interaction_selected, &u.columns),
                any_in(&truth.interaction_relevant, &u.columns),
                u.kind,
            )
        })
        .collect();
    Category::ALL
        .iter()
        .map(|&cat| {
            let (mut hit, mut total) = (0usize, 0usize);
            match cat {
                Category::MainRelevant | Category::MainIrrelevant => {
                    let want = cat == Category::MainRelevant;
                    for (&s, &r) in mask.main_selected.iter().zip(&truth.main_relevant) {
                        if r == want {
                            total += 1;
                            hit += s as usize;
                        }
                    }
                }
                _ => {
                    for &(s, r, kind) in &unit_state {
                        if cat.contains_modifier(r, kind) {
                            total += 1;
                            hit += s as usize;
                        }
                    }
                }
            }
            (cat, (total > 0).then(|| hit as f64 / total as f64))
        })
        .collect()
}

/// Mean over replications of the per-category selected fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentTable {
    pub entries: Vec<(Category, Option<f64>)>,
}

impl PercentTable {
    pub fn get(&self, cat: Category) -> Option<f64> {
        self.entries.iter().find(|(c, _)| *c == cat).and_then(|(_, v)| *v)
    }
}

pub fn percent_selected(
    masks: &[SelectionMask],
    truth: &SelectionTruth,
    categorical: CategoricalScoring,
) -> PercentTable {
    percent_selected_each(masks.iter().map(|m| (m, truth)), categorical)
}

/// [`percent_selected`] where each replication carries its own truth.
pub fn percent_selected_each<'a>(
    reps: impl IntoIterator<Item = (&'a SelectionMask, &'a SelectionTruth)>,
    categorical: CategoricalScoring,
) -> PercentTable {
    let mut sums = vec![0.0; Category::ALL.len()];
    let mut counts = vec![0usize; Category::ALL.len()];
    for (mask, truth) in reps {
        for (i, (_, v)) in selected_fractions(mask, truth, categorical).into_iter().enumerate() {
            if let Some(v) = v {
                sums[i] += v;
                counts[i] += 1;
            }
        }
    }
    PercentTable {
        entries: Category::ALL
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, (counts[i] > 0).then(|| sums[i] / counts[i] as f64)))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub lambda: f64,
    pub fpr: f64,
    pub tpr: f64,
}

pub fn roc_points(path: &PathResult, truth: &SelectionTruth, scoring: Scoring) -> Vec<RocPoint> {
    path.lambdas
        .iter()
        .zip(&path.fits)
        .map(|(&lambda, fit)| {
            let rates = confusion_rates(&selection_mask(&fit.coefficients, DEFAULT_TOL), truth, scoring);
            RocPoint {
                lambda,
                fpr: rates.false_positive_rate(),
                tpr: rates.sensitivity,
            }
        })
        .collect()
}

/// Smallest FPR on a curve among points reaching TPR ≥ t, or 1 if none does.
pub fn fpr_at_tpr(curve: &[RocPoint], t: f64) -> f64 {
    curve
        .iter()
        .filter(|p| p.tpr >= t - 1e-12)
        .map(|p| p.fpr)
        .fold(1.0, f64::min)
}

/// Replication-averaged ROC curve sampled at the given TPR levels.
pub fn average_roc(curves: &[Vec<RocPoint>], tpr_levels: &[f64]) -> Vec<(f64, f64)> {
    tpr_levels
        .iter()
        .map(|&t| {
            let mean = curves.iter().map(|c| fpr_at_tpr(c, t)).sum::<f64>() / curves.len().max(1) as f64;
            (t, mean)
        })
        .collect()
}

/// TPR levels 0, 0.1, …, 1.
pub fn default_tpr_levels() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Distance from ideal selection, in percent: 100 − pct for relevant
/// categories and pct for irrelevant ones. Order: relevant main,
/// continuous, categorical, then irrelevant main, continuous, categorical.
pub fn difference_curve(table: &PercentTable) -> Vec<(Category, Option<f64>)> {
    const ORDER: [Category; 6] = [
        Category::MainRelevant,
        Category::ModifierRelevantContinuous,
        Category::ModifierRelevantCategorical,
        Category::MainIrrelevant,
        Category::ModifierIrrelevantContinuous,
        Category::ModifierIrrelevantCategorical,
    ];
    ORDER
        .iter()
        .map(|&c| {
            let v = table
                .get(c)
                .map(|p| if c.is_relevant() { 100.0 - 100.0 * p } else { 100.0 * p });
            (c, v)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rates: ConfusionRates,
    pub percent_selected: Vec<(Category, Option<f64>)>,
    pub mse: Option<f64>,
}

pub fn metrics_report(c: &CoefficientSet, truth: &SelectionTruth, scoring: Scoring, mse: Option<f64>) -> MetricsReport {
    let mask = selection_mask(c, DEFAULT_TOL);
    MetricsReport {
        rates: confusion_rates(&mask, truth, scoring),
        percent_selected: selected_fractions(&mask, truth, scoring.categorical),
        mse,
    }
}
