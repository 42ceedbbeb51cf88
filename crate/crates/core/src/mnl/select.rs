//! Backward elimination on residual deviance.

use super::{fit, goodness_of_fit, FitOptions, FittedModel, LabeledDataset, ModelSpec};
use crate::error::Result;
use crate::predictors::Predictor;

/// Stopping rule for backward elimination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionCriterion {
    /// A reduced model is kept while its likelihood-ratio chi-square stays at
    /// or above this fraction of the full model's.
    pub min_chi2_ratio: f64,
}

impl Default for SelectionCriterion {
    fn default() -> Self {
        SelectionCriterion { min_chi2_ratio: 0.975 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStep {
    pub dropped: Predictor,
    pub deviance: f64,
    pub chi2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub full: FittedModel,
    pub selected: FittedModel,
    pub steps: Vec<SelectionStep>,
}

impl Selection {
    pub fn spec(&self) -> &ModelSpec {
        &self.selected.spec
    }
}

pub fn backward_select(
    data: &LabeledDataset,
    full_spec: &ModelSpec,
    criterion: &SelectionCriterion,
    options: &FitOptions,
) -> Result<ModelSpec> {
    backward_select_traced(data, full_spec, criterion, options).map(|s| s.selected.spec)
}

/// Repeatedly drops the predictor whose removal raises the deviance least.
/// Candidates that cannot be fitted are skipped; ties go to the earlier
/// column.
pub fn backward_select_traced(
    data: &LabeledDataset,
    full_spec: &ModelSpec,
    criterion: &SelectionCriterion,
    options: &FitOptions,
) -> Result<Selection> {
    let full = fit(data, full_spec, options)?;
    let target = criterion.min_chi2_ratio * goodness_of_fit(&full).chi2;
    let mut current = full.clone();
    let mut steps = Vec::new();

    while current.spec.predictors.len() > 1 {
        let mut best: Option<(Predictor, FittedModel)> = None;
        for &p in &current.spec.predictors {
            let Ok(m) = fit(data, &current.spec.without(p), options) else {
                continue;
            };
            if best.as_ref().is_none_or(|(_, b)| m.deviance < b.deviance) {
                best = Some((p, m));
            }
        }
        let Some((dropped, reduced)) = best else {
            break;
        };
        let chi2 = goodness_of_fit(&reduced).chi2;
        if chi2 < target {
            break;
        }
        steps.push(SelectionStep {
            dropped,
            deviance: reduced.deviance,
            chi2,
        });
        current = reduced;
    }
    Ok(Selection {
        full,
        selected: current,
        steps,
    })
}
