//! Joining conflict instants, predictors and reaction labels into per-kind
//! model tables.

use std::collections::BTreeMap;

use crate::conflict::{CiKey, ConflictInstant};
use crate::error::{Error, Result};
use crate::labeling::{label_conflicts, LabelSettings, Reaction};
use crate::mnl::LabeledDataset;
use crate::predictors::{compute_all, Predictor, PredictorSettings, PredictorVector};
use crate::trajectory::{Scene, UserKind};

/// One conflict instant seen from one user.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub key: CiKey,
    pub user_kind: UserKind,
    pub predictors: PredictorVector,
    pub k: f64,
    pub class: Reaction,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReactionDataset {
    /// Ordered by conflict key.
    pub pedestrian: Vec<DatasetRow>,
    pub vehicle: Vec<DatasetRow>,
    /// Conflict instants whose predictors could not be computed.
    pub dropped_predictors: usize,
    /// (instant, user) cases whose fits never reach the other path.
    pub dropped_no_crossing: usize,
    /// (instant, user) cases without enough track around the decision step.
    pub dropped_insufficient: usize,
}

impl ReactionDataset {
    pub fn rows(&self, kind: UserKind) -> &[DatasetRow] {
        match kind {
            UserKind::Pedestrian => &self.pedestrian,
            UserKind::Vehicle => &self.vehicle,
        }
    }
}

pub fn build_dataset(
    cis: &[ConflictInstant],
    scene: &Scene,
    predictor_settings: &PredictorSettings,
    label_settings: &LabelSettings,
) -> Result<ReactionDataset> {
    let mut out = ReactionDataset::default();
    let mut vectors = BTreeMap::new();
    for (ci, v) in cis.iter().zip(compute_all(cis, scene, predictor_settings)) {
        match v {
            Ok(v) => {
                vectors.insert(ci.key(), v);
            }
            Err(Error::InsufficientData(_) | Error::OutOfRange { .. }) => out.dropped_predictors += 1,
            Err(e) => return Err(e),
        }
    }
    let labeling = label_conflicts(cis, scene, label_settings, &predictor_settings.predictor)?;
    out.dropped_no_crossing = labeling.dropped_no_crossing;
    out.dropped_insufficient = labeling.dropped_insufficient;
    for label in labeling.labels {
        let Some(v) = vectors.get(&label.key) else {
            continue;
        };
        let row = DatasetRow {
            key: label.key,
            user_kind: label.user_kind,
            predictors: *v,
            k: label.k,
            class: label.class,
        };
        match row.user_kind {
            UserKind::Pedestrian => out.pedestrian.push(row),
            UserKind::Vehicle => out.vehicle.push(row),
        }
    }
    out.pedestrian.sort_by(|a, b| a.key.cmp(&b.key));
    out.vehicle.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}

/// Model-ready view of `rows` restricted to `columns`.
pub fn to_labeled(rows: &[DatasetRow], columns: &[Predictor]) -> LabeledDataset {
    LabeledDataset::from_vectors(columns, rows.iter().map(|r| (&r.predictors, r.class)))
}
