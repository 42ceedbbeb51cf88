//! Three-alternative multinomial logit with "no reaction" as the baseline.
//!
//! For predictor row `x` the utilities are `0`, `a_p + x.b_p` and
//! `a_g + x.b_g` for no reaction, prudent/decelerate and
//! aggressive/accelerate; choice probabilities are their softmax.

mod fit;
mod inference;
mod io;
mod likelihood;
pub mod reference;
mod select;
mod simulate;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::labeling::Reaction;
use crate::predictors::{Predictor, PredictorVector};
use crate::trajectory::UserKind;

pub use fit::{fit, fit_traced, FitOptions, FitTrace};
pub use inference::{goodness_of_fit, z_tests, CoefficientTest, GoodnessOfFit, Term};
pub use io::{format_model, parse_model, read_model, write_model, MODEL_FORMAT_VERSION};
pub use likelihood::{log_likelihood, log_likelihood_gradient};
pub use select::{backward_select, backward_select_traced, Selection, SelectionCriterion, SelectionStep};
pub use simulate::{draw_choice, simulate_choices};

/// Which predictors enter the utilities of one user kind's model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub user_kind: UserKind,
    pub predictors: Vec<Predictor>,
}

impl ModelSpec {
    pub fn new(user_kind: UserKind, predictors: Vec<Predictor>) -> Result<Self> {
        if predictors.is_empty() {
            return Err(Error::InvalidInput("model needs at least one predictor".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = predictors.iter().find(|p| !seen.insert(**p)) {
            return Err(Error::InvalidInput(format!("predictor {dup} listed twice")));
        }
        Ok(ModelSpec { user_kind, predictors })
    }

    /// All variables considered for a user kind. The vehicle model leaves out
    /// the pedestrian's simultaneous-conflict count.
    pub fn full(user_kind: UserKind) -> Self {
        let predictors = Predictor::ALL
            .into_iter()
            .filter(|&p| user_kind == UserKind::Pedestrian || p != Predictor::PCConfNr)
            .collect();
        ModelSpec { user_kind, predictors }
    }

    pub fn baseline(&self) -> Reaction {
        Reaction::NoReaction
    }

    pub fn without(&self, p: Predictor) -> ModelSpec {
        ModelSpec {
            user_kind: self.user_kind,
            predictors: self.predictors.iter().copied().filter(|&q| q != p).collect(),
        }
    }

    /// Number of estimated parameters including the two intercepts.
    pub fn n_params(&self) -> usize {
        2 * (self.predictors.len() + 1)
    }
}

/// Predictor rows with their observed reactions.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    columns: Vec<Predictor>,
    /// Row-major, `rows * columns.len()`.
    values: Vec<f64>,
    outcomes: Vec<Reaction>,
}

impl LabeledDataset {
    pub fn new(columns: Vec<Predictor>) -> Self {
        LabeledDataset {
            columns,
            values: Vec::new(),
            outcomes: Vec::new(),
        }
    }

    pub fn from_vectors<'a>(
        columns: &[Predictor],
        rows: impl IntoIterator<Item = (&'a PredictorVector, Reaction)>,
    ) -> Self {
        let mut data = LabeledDataset::new(columns.to_vec());
        for (v, class) in rows {
            data.values.extend(v.select(columns));
            data.outcomes.push(class);
        }
        data
    }

    pub fn push(&mut self, row: &[f64], outcome: Reaction) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidInput(format!(
                "row has {} values, dataset has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite predictor value".into()));
        }
        self.values.extend_from_slice(row);
        self.outcomes.push(outcome);
        Ok(())
    }

    pub fn columns(&self) -> &[Predictor] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.columns.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn outcome(&self, i: usize) -> Reaction {
        self.outcomes[i]
    }

    pub fn outcomes(&self) -> &[Reaction] {
        &self.outcomes
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], Reaction)> + '_ {
        (0..self.len()).map(move |i| (self.row(i), self.outcomes[i]))
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for o in &self.outcomes {
            counts[o.index()] += 1;
        }
        counts
    }

    /// Restricts (and reorders) the columns to `columns`.
    pub fn select(&self, columns: &[Predictor]) -> Result<LabeledDataset> {
        let idx = columns
            .iter()
            .map(|c| {
                self.columns
                    .iter()
                    .position(|d| d == c)
                    .ok_or_else(|| Error::Schema(format!("dataset has no column {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = LabeledDataset::new(columns.to_vec());
        for (row, y) in self.rows() {
            out.values.extend(idx.iter().map(|&j| row[j]));
            out.outcomes.push(y);
        }
        Ok(out)
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        let mut out = LabeledDataset::new(self.columns.clone());
        for &i in indices {
            out.values.extend_from_slice(self.row(i));
            out.outcomes.push(self.outcomes[i]);
        }
        out
    }

    /// Multiplies column `c` by `factor`.
    pub fn scale_column(&mut self, c: Predictor, factor: f64) -> Result<()> {
        let j = self
            .columns
            .iter()
            .position(|&d| d == c)
            .ok_or_else(|| Error::Schema(format!("dataset has no column {c}")))?;
        let p = self.columns.len();
        for i in 0..self.len() {
            self.values[i * p + j] *= factor;
        }
        Ok(())
    }
}

/// Intercept and slopes of one non-baseline alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct AlternativeFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub intercept_se: f64,
    pub std_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: ModelSpec,
    /// Prudent/decelerate, then aggressive/accelerate.
    pub alternatives: [AlternativeFit; 2],
    pub deviance: f64,
    pub null_deviance: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl FittedModel {
    /// A model with given coefficients and no estimation metadata: standard
    /// errors and deviances are NaN.
    pub fn from_coefficients(spec: ModelSpec, prudent: (f64, Vec<f64>), aggressive: (f64, Vec<f64>)) -> Result<Self> {
        let p = spec.predictors.len();
        let alt = |(intercept, coefficients): (f64, Vec<f64>)| -> Result<AlternativeFit> {
            if coefficients.len() != p {
                return Err(Error::InvalidInput(format!(
                    "{} coefficients for {p} predictors",
                    coefficients.len()
                )));
            }
            Ok(AlternativeFit {
                intercept,
                std_errors: vec![f64::NAN; p],
                intercept_se: f64::NAN,
                coefficients,
            })
        };
        Ok(FittedModel {
            alternatives: [alt(prudent)?, alt(aggressive)?],
            spec,
            deviance: f64::NAN,
            null_deviance: f64::NAN,
            n_obs: 0,
            converged: true,
            iterations: 0,
        })
    }

    pub fn alternative(&self, r: Reaction) -> Option<&AlternativeFit> {
        match r {
            Reaction::NoReaction => None,
            Reaction::Prudent => Some(&self.alternatives[0]),
            Reaction::Aggressive => Some(&self.alternatives[1]),
        }
    }

    /// Utilities of (no reaction, prudent, aggressive) for a row in spec order.
    pub fn utilities(&self, row: &[f64]) -> [f64; 3] {
        let u = |a: &AlternativeFit| a.intercept + a.coefficients.iter().zip(row).map(|(b, x)| b * x).sum::<f64>();
        [0.0, u(&self.alternatives[0]), u(&self.alternatives[1])]
    }

    /// Choice probabilities for a row given in spec column order.
    pub fn predict_row(&self, row: &[f64]) -> Result<[f64; 3]> {
        if row.len() != self.spec.predictors.len() {
            return Err(Error::InvalidInput(format!(
                "row has {} values, model has {} predictors",
                row.len(),
                self.spec.predictors.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite predictor value".into()));
        }
        Ok(softmax(self.utilities(row)))
    }

    /// Parameters in fitting order: `[a_p, b_p.., a_g, b_g..]`.
    pub fn parameters(&self) -> Vec<f64> {
        self.alternatives
            .iter()
            .flat_map(|a| std::iter::once(a.intercept).chain(a.coefficients.iter().copied()))
            .collect()
    }
}

/// Choice probabilities of (no reaction, prudent, aggressive).
pub fn predict_proba(model: &FittedModel, x: &PredictorVector) -> Result<[f64; 3]> {
    if !model.converged {
        return Err(Error::InvalidInput("model did not converge".into()));
    }
    model.predict_row(&x.select(&model.spec.predictors))
}

/// Numerically stable softmax; the largest utility is shifted to zero.
pub fn softmax(u: [f64; 3]) -> [f64; 3] {
    let m = u[0].max(u[1]).max(u[2]);
    let e = u.map(|v| (v - m).exp());
    let s = e[0] + e[1] + e[2];
    e.map(|v| v / s)
}

/// Index of the most probable class; near-ties (within 1e-12) go to the
/// earlier class, so the baseline wins.
pub fn argmax_class(p: &[f64; 3]) -> Reaction {
    let max = p[0].max(p[1]).max(p[2]);
    let i = p.iter().position(|&v| v >= max - 1e-12).unwrap_or(0);
    Reaction::ALL[i]
}
