//! Evasive-action labels from the k-statistic.
//!
//! For a subject at decision step `d` (the conflict step plus the reaction
//! delay) two curves are fitted: the *expected* one through the points
//! `d-3..=d` and the *observed* one through `d..=d+3`. Both are intersected
//! with the other user's predicted path. `k` is the travel time from the
//! subject's position at `d` to the expected crossing minus the travel time to
//! the observed crossing, so a subject that slows down gets `k < 0`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conflict::{predict_path, CiKey, ConflictInstant, PathPredictor, PredictedPath};
use crate::error::{Error, Result};
use crate::predictors::path_crossing;
use crate::trajectory::{fit_smoothing_spline, ParametricCurve, Scene, Trajectory, UserKind};

/// Points on each side of the decision step used by the two fits.
const WINDOW: usize = 3;

/// Reaction classes, indexed in the fixed order used by the model:
/// no reaction (baseline), prudent/decelerate, aggressive/accelerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reaction {
    NoReaction,
    Prudent,
    Aggressive,
}

impl Reaction {
    pub const ALL: [Reaction; 3] = [Reaction::NoReaction, Reaction::Prudent, Reaction::Aggressive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Reaction> {
        Reaction::ALL.get(i).copied()
    }

    /// Short code for a user kind: NRP/PRU/AGG or NRV/DEC/ACC.
    pub fn code(self, kind: UserKind) -> &'static str {
        match (kind, self) {
            (UserKind::Pedestrian, Reaction::NoReaction) => "NRP",
            (UserKind::Pedestrian, Reaction::Prudent) => "PRU",
            (UserKind::Pedestrian, Reaction::Aggressive) => "AGG",
            (UserKind::Vehicle, Reaction::NoReaction) => "NRV",
            (UserKind::Vehicle, Reaction::Prudent) => "DEC",
            (UserKind::Vehicle, Reaction::Aggressive) => "ACC",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Reaction::NoReaction => "NoReaction",
            Reaction::Prudent => "Prudent",
            Reaction::Aggressive => "Aggressive",
        }
    }
}

impl fmt::Display for Reaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reaction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "NoReaction" | "NR" | "NRP" | "NRV" => Ok(Reaction::NoReaction),
            "Prudent" | "PR" | "PRU" | "DEC" | "Dec" => Ok(Reaction::Prudent),
            "Aggressive" | "AG" | "AGG" | "ACC" | "Acc" => Ok(Reaction::Aggressive),
            other => Err(Error::InvalidInput(format!("unknown reaction class `{other}`"))),
        }
    }
}

/// Three-way split of `k`; `|k| == threshold` counts as no reaction.
pub fn classify(k: f64, threshold: f64) -> Reaction {
    if k < -threshold {
        Reaction::Prudent
    } else if k > threshold {
        Reaction::Aggressive
    } else {
        Reaction::NoReaction
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelSettings {
    /// Steps between the conflict instant and the decision step.
    pub reaction_delay: usize,
    /// Classification threshold on `|k|`, seconds.
    pub threshold: f64,
    /// Smoothing of the expected and observed fits.
    pub smoothing: f64,
    /// How far the fitted curves are followed looking for a crossing.
    pub horizon: f64,
    pub sub_grid: f64,
}

impl Default for LabelSettings {
    fn default() -> Self {
        LabelSettings {
            reaction_delay: 3,
            threshold: 0.25,
            smoothing: 1e-3,
            horizon: 30.0,
            sub_grid: 0.1,
        }
    }
}

pub fn expected_trajectory(traj: &Trajectory, i: usize, smoothing: f64) -> Result<ParametricCurve> {
    if i < WINDOW || i >= traj.len() {
        return Err(Error::InsufficientData(format!(
            "expected trajectory of `{}` at index {i} needs indices {}..={i}",
            traj.user_id(),
            i as i64 - WINDOW as i64
        )));
    }
    fit_smoothing_spline(traj.window(i - WINDOW, i)?, smoothing)
}

pub fn observed_trajectory(traj: &Trajectory, i: usize, smoothing: f64) -> Result<ParametricCurve> {
    if i + WINDOW >= traj.len() {
        return Err(Error::InsufficientData(format!(
            "observed trajectory of `{}` at index {i} needs indices {i}..={}",
            traj.user_id(),
            i + WINDOW
        )));
    }
    fit_smoothing_spline(traj.window(i, i + WINDOW)?, smoothing)
}

fn sample_curve(curve: &ParametricCurve, id: &str, origin: f64, settings: &LabelSettings) -> Result<PredictedPath> {
    let count = (settings.horizon / settings.sub_grid).round() as usize + 1;
    let samples = (0..count)
        .map(|k| curve.position(origin + k as f64 * settings.sub_grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictedPath {
        user_id: id.to_string(),
        origin,
        dt: settings.sub_grid,
        samples,
    })
}

/// k-statistic of `subject` for the conflict at local index `i`.
pub fn k_statistic(
    subject: &Trajectory,
    other_path: &PredictedPath,
    i: usize,
    settings: &LabelSettings,
) -> Result<f64> {
    let d = i + settings.reaction_delay;
    let expected = expected_trajectory(subject, d, settings.smoothing)?;
    let observed = observed_trajectory(subject, d, settings.smoothing)?;
    let origin = subject.points()[d].t;
    let expected = sample_curve(&expected, subject.user_id(), origin, settings)?;
    let observed = sample_curve(&observed, subject.user_id(), origin, settings)?;
    let (_, t_expected, _) = path_crossing(&expected, other_path).ok_or(Error::NoCrossing)?;
    let (_, t_observed, _) = path_crossing(&observed, other_path).ok_or(Error::NoCrossing)?;
    Ok(t_expected - t_observed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionLabel {
    pub key: CiKey,
    pub user_kind: UserKind,
    pub k: f64,
    pub class: Reaction,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labeling {
    /// Ordered by conflict key, pedestrian before vehicle.
    pub labels: Vec<ReactionLabel>,
    /// (conflict, subject kind) cases without a crossing on either curve.
    pub dropped_no_crossing: usize,
    /// Cases where the subject's track ends too early or starts too late.
    pub dropped_insufficient: usize,
}

/// Labels one subject of a conflict instant. The other user's path is the
/// one predicted at the conflict step.
pub fn label_subject(
    ci: &ConflictInstant,
    subject_kind: UserKind,
    scene: &Scene,
    settings: &LabelSettings,
    predictor: &PathPredictor,
) -> Result<ReactionLabel> {
    let (subject_id, other_id) = match subject_kind {
        UserKind::Pedestrian => (&ci.ped_id, &ci.veh_id),
        UserKind::Vehicle => (&ci.veh_id, &ci.ped_id),
    };
    let find = |id: &str| {
        let tr = scene
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("conflict refers to unknown user `{id}`")))?;
        let i = tr
            .index_of_step(ci.ts)
            .ok_or_else(|| Error::InsufficientData(format!("`{id}` not tracked at step {}", ci.ts)))?;
        Ok::<_, Error>((tr, i))
    };
    let (subject, i) = find(subject_id)?;
    let (other, j) = find(other_id)?;
    let other_path = predict_path(other, j, predictor)?;
    let k = k_statistic(subject, &other_path, i, settings)?;
    Ok(ReactionLabel {
        key: ci.key(),
        user_kind: subject_kind,
        k,
        class: classify(k, settings.threshold),
    })
}

pub fn label_conflicts(
    cis: &[ConflictInstant],
    scene: &Scene,
    settings: &LabelSettings,
    predictor: &PathPredictor,
) -> Result<Labeling> {
    if !(settings.threshold > 0.0) {
        return Err(Error::InvalidInput(format!(
            "k threshold must be positive, got {}",
            settings.threshold
        )));
    }
    let results: Vec<Result<ReactionLabel>> = cis
        .par_iter()
        .flat_map_iter(|ci| {
            [UserKind::Pedestrian, UserKind::Vehicle]
                .into_iter()
                .map(move |kind| label_subject(ci, kind, scene, settings, predictor))
        })
        .collect();

    let mut out = Labeling::default();
    for r in results {
        match r {
            Ok(label) => out.labels.push(label),
            Err(Error::NoCrossing) => out.dropped_no_crossing += 1,
            Err(Error::InsufficientData(_)) | Err(Error::OutOfRange { .. }) => out.dropped_insufficient += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
