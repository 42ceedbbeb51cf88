//! Train/test split, confusion matrices and per-situation probability
//! timelines.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conflict::{CiKey, ConflictSituation};
use crate::dataset::DatasetRow;
use crate::error::{Error, Result};
use crate::labeling::Reaction;
use crate::mnl::{argmax_class, predict_proba, FittedModel, LabeledDataset};
use crate::trajectory::UserKind;

/// Rows are observed classes, columns predicted classes, both in
/// [`Reaction::ALL`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn add(&mut self, observed: Reaction, predicted: Reaction) {
        self.counts[observed.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    /// Row sums: how many test rows were observed in each class.
    pub fn observed_totals(&self) -> [u64; 3] {
        self.counts.map(|r| r.iter().sum())
    }

    pub fn predicted_totals(&self) -> [u64; 3] {
        std::array::from_fn(|j| (0..3).map(|i| self.counts[i][j]).sum())
    }

    /// Off-diagonal fraction.
    pub fn misclassification_rate(&self) -> Result<f64> {
        misclassification_rate(self)
    }
}

pub fn misclassification_rate(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidInput("empty confusion matrix".into()));
    }
    Ok((total - cm.correct()) as f64 / total as f64)
}

/// Train and test row indices, each in ascending order. The training part has
/// `floor(n * train_frac)` rows.
pub fn split_indices(n: usize, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_split(n, train_frac)?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let m = (n as f64 * train_frac).floor() as usize;
    let (mut train, mut test) = (idx[..m].to_vec(), idx[m..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Like [`split_indices`] but keeps rows sharing a group together. Groups are
/// shuffled and assigned to training until it holds `floor(n * train_frac)`
/// rows or more.
pub fn split_groups(groups: &[usize], train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_split(groups.len(), train_frac)?;
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &g) in groups.iter().enumerate() {
        members.entry(g).or_default().push(i);
    }
    let mut order: Vec<usize> = members.keys().copied().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let target = (groups.len() as f64 * train_frac).floor() as usize;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for g in order {
        let dest = if train.len() < target { &mut train } else { &mut test };
        dest.extend_from_slice(&members[&g]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn check_split(n: usize, train_frac: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("cannot split an empty dataset".into()));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidInput(format!(
            "training fraction must lie in (0, 1), got {train_frac}"
        )));
    }
    Ok(())
}

/// Seeded row-level partition into (train, test).
pub fn split(data: &LabeledDataset, train_frac: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(data.len(), train_frac, seed)?;
    Ok((data.subset(&train), data.subset(&test)))
}

/// Predicts each test row by its most probable class.
pub fn confusion(model: &FittedModel, test: &LabeledDataset) -> Result<ConfusionMatrix> {
    if !model.converged {
        return Err(Error::InvalidInput("model did not converge".into()));
    }
    let data = test.select(&model.spec.predictors)?;
    let predicted = (0..data.len())
        .into_par_iter()
        .map(|i| model.predict_row(data.row(i)).map(|p| argmax_class(&p)))
        .collect::<Result<Vec<_>>>()?;
    let mut cm = ConfusionMatrix::default();
    for (obs, pred) in data.outcomes().iter().zip(predicted) {
        cm.add(*obs, pred);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimelinePoint {
    pub ts: i64,
    /// Seconds, `ts * step`.
    pub t: f64,
    #[serde(rename = "p_NR")]
    pub p_nr: f64,
    #[serde(rename = "p_PR")]
    pub p_pr: f64,
    #[serde(rename = "p_AG")]
    pub p_ag: f64,
    pub observed: Reaction,
    pub k: f64,
}

impl TimelinePoint {
    pub fn probabilities(&self) -> [f64; 3] {
        [self.p_nr, self.p_pr, self.p_ag]
    }
}

/// Model probabilities along one conflict situation, from one user's side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SituationTimeline {
    pub ped_id: String,
    pub veh_id: String,
    pub user_kind: UserKind,
    pub series: Vec<TimelinePoint>,
}

/// Every instant of `situation` must have a row in `rows`.
pub fn timeline(
    model: &FittedModel,
    situation: &ConflictSituation,
    rows: &BTreeMap<CiKey, &DatasetRow>,
    step: f64,
) -> Result<SituationTimeline> {
    let series = situation
        .instants
        .iter()
        .map(|ci| {
            let key = ci.key();
            let row = rows.get(&key).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no dataset row for conflict ({}, {}, {})",
                    key.ts, key.ped_id, key.veh_id
                ))
            })?;
            let [p_nr, p_pr, p_ag] = predict_proba(model, &row.predictors)?;
            Ok(TimelinePoint {
                ts: ci.ts,
                t: ci.ts as f64 * step,
                p_nr,
                p_pr,
                p_ag,
                observed: row.class,
                k: row.k,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SituationTimeline {
        ped_id: situation.ped_id.clone(),
        veh_id: situation.veh_id.clone(),
        user_kind: model.spec.user_kind,
        series,
    })
}
