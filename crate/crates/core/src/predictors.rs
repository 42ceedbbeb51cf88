//! Explanatory variables of a conflict instant.
//!
//! Every variable describes the pedestrian-vehicle pair at the detection step
//! `ts`, so the same vector feeds both the pedestrian and the vehicle model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conflict::{predict_path, ConflictInstant, PathPredictor, PredictedPath};
use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::trajectory::{Scene, UserKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Predictor {
    MinDist,
    TimeMinDist,
    ActDist,
    OrtDist,
    TimeDelayXP,
    SpeedVeh,
    AccVeh,
    SpeedPed,
    AccPed,
    CPConfNr,
    PCConfNr,
    CarAhead,
}

impl Predictor {
    pub const ALL: [Predictor; 12] = [
        Predictor::MinDist,
        Predictor::TimeMinDist,
        Predictor::ActDist,
        Predictor::OrtDist,
        Predictor::TimeDelayXP,
        Predictor::SpeedVeh,
        Predictor::AccVeh,
        Predictor::SpeedPed,
        Predictor::AccPed,
        Predictor::CPConfNr,
        Predictor::PCConfNr,
        Predictor::CarAhead,
    ];

    /// Column name used in every exported table.
    pub fn name(self) -> &'static str {
        match self {
            Predictor::MinDist => "MinDist",
            Predictor::TimeMinDist => "TimeMinDist",
            Predictor::ActDist => "ActDist",
            Predictor::OrtDist => "OrtDist",
            Predictor::TimeDelayXP => "TimeDelayXP",
            Predictor::SpeedVeh => "SpeedVeh",
            Predictor::AccVeh => "AccVeh",
            Predictor::SpeedPed => "SpeedPed",
            Predictor::AccPed => "AccPed",
            Predictor::CPConfNr => "CPConfNr",
            Predictor::PCConfNr => "PCConfNr",
            Predictor::CarAhead => "CarAhead",
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Predictor::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown predictor `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictorVector {
    pub min_dist: f64,
    pub time_min_dist: f64,
    pub act_dist: f64,
    pub ort_dist: f64,
    /// Pedestrian minus vehicle travel time to the crossing point; negative
    /// when the vehicle reaches it later.
    pub time_delay_xp: f64,
    pub speed_veh: f64,
    pub acc_veh: f64,
    pub speed_ped: f64,
    pub acc_ped: f64,
    pub cp_conf_nr: u32,
    pub pc_conf_nr: u32,
    pub car_ahead: bool,
}

impl PredictorVector {
    pub fn get(&self, p: Predictor) -> f64 {
        match p {
            Predictor::MinDist => self.min_dist,
            Predictor::TimeMinDist => self.time_min_dist,
            Predictor::ActDist => self.act_dist,
            Predictor::OrtDist => self.ort_dist,
            Predictor::TimeDelayXP => self.time_delay_xp,
            Predictor::SpeedVeh => self.speed_veh,
            Predictor::AccVeh => self.acc_veh,
            Predictor::SpeedPed => self.speed_ped,
            Predictor::AccPed => self.acc_ped,
            Predictor::CPConfNr => self.cp_conf_nr as f64,
            Predictor::PCConfNr => self.pc_conf_nr as f64,
            Predictor::CarAhead => f64::from(u8::from(self.car_ahead)),
        }
    }

    pub fn set(&mut self, p: Predictor, value: f64) {
        match p {
            Predictor::MinDist => self.min_dist = value,
            Predictor::TimeMinDist => self.time_min_dist = value,
            Predictor::ActDist => self.act_dist = value,
            Predictor::OrtDist => self.ort_dist = value,
            Predictor::TimeDelayXP => self.time_delay_xp = value,
            Predictor::SpeedVeh => self.speed_veh = value,
            Predictor::AccVeh => self.acc_veh = value,
            Predictor::SpeedPed => self.speed_ped = value,
            Predictor::AccPed => self.acc_ped = value,
            Predictor::CPConfNr => self.cp_conf_nr = value as u32,
            Predictor::PCConfNr => self.pc_conf_nr = value as u32,
            Predictor::CarAhead => self.car_ahead = value != 0.0,
        }
    }

    /// Values of `columns`, in order.
    pub fn select(&self, columns: &[Predictor]) -> Vec<f64> {
        columns.iter().map(|&p| self.get(p)).collect()
    }
}

/// Where the two predicted paths cross, and when each user gets there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingPoint {
    pub exists: bool,
    pub x: f64,
    pub y: f64,
    /// Pedestrian travel time to the point, seconds.
    pub t_ped: f64,
    pub t_veh: f64,
}

impl CrossingPoint {
    pub const NONE: CrossingPoint = CrossingPoint {
        exists: false,
        x: f64::NAN,
        y: f64::NAN,
        t_ped: f64::NAN,
        t_veh: f64::NAN,
    };
}

/// First spatial intersection of two sampled paths along `a`, with the time
/// offsets at which each path reaches it.
pub(crate) fn path_crossing(a: &PredictedPath, b: &PredictedPath) -> Option<(Point, f64, f64)> {
    let (i, s, j, u) = geometry::first_polyline_intersection(&a.samples, &b.samples)?;
    let (p0, p1) = (a.samples[i], a.samples[i + 1]);
    let point = (p0.0 + s * (p1.0 - p0.0), p0.1 + s * (p1.1 - p0.1));
    Some((point, (i as f64 + s) * a.dt, (j as f64 + u) * b.dt))
}

pub fn crossing_point(ped_path: &PredictedPath, veh_path: &PredictedPath) -> CrossingPoint {
    match path_crossing(ped_path, veh_path) {
        Some(((x, y), t_ped, t_veh)) => CrossingPoint {
            exists: true,
            x,
            y,
            t_ped,
            t_veh,
        },
        None => CrossingPoint::NONE,
    }
}

pub fn time_delay_xp(xp: &CrossingPoint) -> Result<f64> {
    if xp.exists {
        Ok(xp.t_ped - xp.t_veh)
    } else {
        Err(Error::NoCrossing)
    }
}

/// Distance from the pedestrian's position to the vehicle's predicted path.
pub fn ort_dist(ped_pos: Point, veh_path: &PredictedPath) -> f64 {
    geometry::point_polyline_distance(ped_pos, &veh_path.samples)
}

/// Number of conflict instants at step `ts` that involve `user_id`.
pub fn count_simultaneous(cis: &[ConflictInstant], user_id: &str, ts: i64) -> usize {
    cis.iter()
        .filter(|ci| ci.ts == ts && (ci.ped_id == user_id || ci.veh_id == user_id))
        .count()
}

/// Precomputed [`count_simultaneous`] for every `(user, step)`.
#[derive(Debug, Clone, Default)]
pub struct SimultaneousCounts(BTreeMap<(String, i64), u32>);

impl SimultaneousCounts {
    pub fn new(cis: &[ConflictInstant]) -> Self {
        let mut map = BTreeMap::new();
        for ci in cis {
            *map.entry((ci.ped_id.clone(), ci.ts)).or_insert(0) += 1;
            *map.entry((ci.veh_id.clone(), ci.ts)).or_insert(0) += 1;
        }
        SimultaneousCounts(map)
    }

    pub fn get(&self, user_id: &str, ts: i64) -> u32 {
        self.0.get(&(user_id.to_string(), ts)).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarAheadMode {
    /// Another vehicle in front of the subject.
    #[default]
    Ahead,
    /// Another vehicle following the subject.
    Behind,
}

impl FromStr for CarAheadMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ahead" => Ok(CarAheadMode::Ahead),
            "behind" => Ok(CarAheadMode::Behind),
            other => Err(Error::InvalidInput(format!("unknown car-ahead mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarAheadRule {
    pub mode: CarAheadMode,
    /// Longitudinal range along the predicted heading, meters.
    pub range: f64,
    /// Maximum lateral offset from the heading line, meters.
    pub lateral: f64,
}

impl Default for CarAheadRule {
    fn default() -> Self {
        CarAheadRule {
            mode: CarAheadMode::Ahead,
            range: 15.0,
            lateral: 2.0,
        }
    }
}

/// Whether another vehicle is within range in front of (or, in
/// [`CarAheadMode::Behind`], behind) vehicle `veh_id` at step `ts`, measured
/// along its predicted heading.
pub fn car_ahead(scene: &Scene, veh_id: &str, ts: i64, rule: &CarAheadRule, predictor: &PathPredictor) -> bool {
    let Some(subject) = scene.get(veh_id) else {
        return false;
    };
    let Some(i) = subject.index_of_step(ts) else {
        return false;
    };
    let Ok(path) = predict_path(subject, i, predictor) else {
        return false;
    };
    let origin = path.start();
    let end = *path.samples.last().expect("non-empty path");
    let dir = (end.0 - origin.0, end.1 - origin.1);
    let len = dir.0.hypot(dir.1);
    if len < 1e-9 {
        return false;
    }
    let dir = (dir.0 / len, dir.1 / len);

    scene
        .present(UserKind::Vehicle, ts)
        .filter(|(tr, _)| tr.user_id() != veh_id)
        .any(|(tr, j)| {
            let p = tr.points()[j];
            let rel = (p.x - origin.0, p.y - origin.1);
            let along = rel.0 * dir.0 + rel.1 * dir.1;
            let across = (rel.0 * dir.1 - rel.1 * dir.0).abs();
            let in_range = match rule.mode {
                CarAheadMode::Ahead => along > 0.0 && along <= rule.range,
                CarAheadMode::Behind => along < 0.0 && -along <= rule.range,
            };
            in_range && across <= rule.lateral
        })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorSettings {
    pub predictor: PathPredictor,
    pub car_ahead: CarAheadRule,
    /// `TimeDelayXP` used when the predicted paths never cross.
    pub no_crossing_delay: f64,
}

impl Default for PredictorSettings {
    fn default() -> Self {
        PredictorSettings {
            predictor: PathPredictor::default(),
            car_ahead: CarAheadRule::default(),
            no_crossing_delay: 0.0,
        }
    }
}

pub fn compute_predictors(
    ci: &ConflictInstant,
    scene: &Scene,
    counts: &SimultaneousCounts,
    settings: &PredictorSettings,
) -> Result<PredictorVector> {
    let lookup = |id: &str| {
        let tr = scene
            .get(id)
            .ok_or_else(|| Error::InvalidInput(format!("conflict refers to unknown user `{id}`")))?;
        let i = tr
            .index_of_step(ci.ts)
            .ok_or_else(|| Error::InsufficientData(format!("user `{id}` is not tracked at step {}", ci.ts)))?;
        Ok::<_, Error>((tr, i))
    };
    let (ped, pi) = lookup(&ci.ped_id)?;
    let (veh, vi) = lookup(&ci.veh_id)?;
    let ped_path = predict_path(ped, pi, &settings.predictor)?;
    let veh_path = predict_path(veh, vi, &settings.predictor)?;

    let ped_pos = ped.points()[pi];
    let veh_pos = veh.points()[vi];
    let xp = crossing_point(&ped_path, &veh_path);

    Ok(PredictorVector {
        min_dist: ci.min_dist,
        time_min_dist: ci.time_min_dist,
        act_dist: ped_pos.distance(&veh_pos),
        ort_dist: ort_dist((ped_pos.x, ped_pos.y), &veh_path),
        time_delay_xp: time_delay_xp(&xp).unwrap_or(settings.no_crossing_delay),
        speed_veh: veh.speed_at(vi)?,
        acc_veh: veh.accel_at(vi)?,
        speed_ped: ped.speed_at(pi)?,
        acc_ped: ped.accel_at(pi)?,
        cp_conf_nr: counts.get(&ci.veh_id, ci.ts),
        pc_conf_nr: counts.get(&ci.ped_id, ci.ts),
        car_ahead: car_ahead(scene, &ci.veh_id, ci.ts, &settings.car_ahead, &settings.predictor),
    })
}

/// [`compute_predictors`] for every instant, in input order.
pub fn compute_all(
    cis: &[ConflictInstant],
    scene: &Scene,
    settings: &PredictorSettings,
) -> Vec<Result<PredictorVector>> {
    let counts = SimultaneousCounts::new(cis);
    cis.par_iter()
        .map(|ci| compute_predictors(ci, scene, &counts, settings))
        .collect()
}
