//! Tracked road users and their kinematics on the tracking grid.

mod spline;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use spline::{fit_smoothing_spline, ParametricCurve};

/// Relative tolerance on the spacing between consecutive track points.
const STEP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UserKind {
    #[serde(rename = "ped", alias = "pedestrian")]
    Pedestrian,
    #[serde(rename = "veh", alias = "vehicle")]
    Vehicle,
}

impl UserKind {
    /// Short tag used in trajectory files.
    pub fn tag(self) -> &'static str {
        match self {
            UserKind::Pedestrian => "ped",
            UserKind::Vehicle => "veh",
        }
    }
}

impl fmt::Display for UserKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UserKind::Pedestrian => "pedestrian",
            UserKind::Vehicle => "vehicle",
        })
    }
}

impl FromStr for UserKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ped" | "pedestrian" => Ok(UserKind::Pedestrian),
            "veh" | "vehicle" => Ok(UserKind::Vehicle),
            other => Err(Error::InvalidInput(format!("unknown user kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl TrackPoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        TrackPoint { t, x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &TrackPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One road user's ground-plane track sampled at a constant step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    user_id: String,
    kind: UserKind,
    step: f64,
    points: Vec<TrackPoint>,
}

impl Trajectory {
    pub fn new(user_id: impl Into<String>, kind: UserKind, step: f64, points: Vec<TrackPoint>) -> Result<Self> {
        let user_id = user_id.into();
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
        }
        if points.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "trajectory `{user_id}` has {} point(s), need at least 2",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "trajectory `{user_id}` has a non-finite point at t = {}",
                p.t
            )));
        }
        for w in points.windows(2) {
            let dt = w[1].t - w[0].t;
            if (dt - step).abs() > STEP_TOLERANCE * step.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "trajectory `{user_id}`: spacing {dt} between t = {} and t = {} differs from step {step}",
                    w[0].t, w[1].t
                )));
            }
        }
        let first = points[0].t / step;
        if (first - first.round()).abs() > 1e-6 {
            return Err(Error::InvalidInput(format!(
                "trajectory `{user_id}` starts at t = {} which is not a multiple of the step {step}",
                points[0].t
            )));
        }
        Ok(Trajectory {
            user_id,
            kind,
            step,
            points,
        })
    }

    pub fn user_id(&self) -> &str {
        &self.user_id
    }

    pub fn kind(&self) -> UserKind {
        self.kind
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[TrackPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Global time-step number of the first point (`t / step`).
    pub fn first_step(&self) -> i64 {
        (self.points[0].t / self.step).round() as i64
    }

    pub fn last_step(&self) -> i64 {
        self.first_step() + self.points.len() as i64 - 1
    }

    /// Local index of global time step `ts`, if the user is tracked then.
    pub fn index_of_step(&self, ts: i64) -> Option<usize> {
        let i = ts - self.first_step();
        (0..self.points.len() as i64).contains(&i).then_some(i as usize)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.points.len() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                index: i,
                len: self.points.len(),
            })
        }
    }

    /// Speed at index `i`: central difference inside, one-sided at the ends.
    pub fn speed_at(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let n = self.points.len();
        let (a, b) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        let dt = (b - a) as f64 * self.step;
        Ok(self.points[a].distance(&self.points[b]) / dt)
    }

    /// Signed rate of change of speed at index `i`, differencing [`Self::speed_at`]
    /// the same way. Negative means decelerating.
    pub fn accel_at(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let n = self.points.len();
        let (a, b) = match i {
            0 => (0, 1),
            i if i == n - 1 => (n - 2, n - 1),
            i => (i - 1, i + 1),
        };
        let dt = (b - a) as f64 * self.step;
        Ok((self.speed_at(b)? - self.speed_at(a)?) / dt)
    }

    /// Points with indices `start..=end`.
    pub fn window(&self, start: usize, end: usize) -> Result<&[TrackPoint]> {
        self.check_index(end)?;
        Ok(&self.points[start..=end])
    }
}

/// All trajectories of one observation period, addressable by user id.
#[derive(Debug, Clone, Default)]
pub struct Scene {
    trajectories: Vec<Trajectory>,
    index: BTreeMap<String, usize>,
}

impl Scene {
    pub fn new(trajectories: Vec<Trajectory>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, tr) in trajectories.iter().enumerate() {
            if index.insert(tr.user_id().to_string(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate user id `{}`", tr.user_id())));
            }
        }
        Ok(Scene { trajectories, index })
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn get(&self, user_id: &str) -> Option<&Trajectory> {
        self.index.get(user_id).map(|&i| &self.trajectories[i])
    }

    /// Users of `kind` tracked at global step `ts`, with their local index.
    pub fn present(&self, kind: UserKind, ts: i64) -> impl Iterator<Item = (&Trajectory, usize)> + '_ {
        self.trajectories
            .iter()
            .filter(move |tr| tr.kind() == kind)
            .filter_map(move |tr| tr.index_of_step(ts).map(|i| (tr, i)))
    }
}
