//! Path prediction and conflict-instant detection.
//!
//! At every tracking step the last few observed points of each user are
//! fitted with a cubic spline and continued over the prediction horizon.
//! A pedestrian-vehicle pair whose predicted simultaneous distance drops
//! below the threshold produces a [`ConflictInstant`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::trajectory::{fit_smoothing_spline, Trajectory, UserKind};

/// Settings for [`predict_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPredictor {
    /// Prediction horizon in seconds.
    pub horizon: f64,
    /// Number of observed points fitted, ending at the current one.
    pub history: usize,
    /// Spacing of the predicted samples in seconds.
    pub sub_grid: f64,
    pub smoothing: f64,
}

impl Default for PathPredictor {
    fn default() -> Self {
        PathPredictor {
            horizon: 8.0,
            history: 4,
            sub_grid: 0.1,
            smoothing: 0.0,
        }
    }
}

impl PathPredictor {
    fn sample_count(&self) -> Result<usize> {
        if !(self.horizon > 0.0) || !(self.sub_grid > 0.0) {
            return Err(Error::InvalidInput(format!(
                "horizon ({}) and sub-grid ({}) must be positive",
                self.horizon, self.sub_grid
            )));
        }
        let m = (self.horizon / self.sub_grid).round();
        if (m * self.sub_grid - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "horizon {} is not a multiple of the sub-grid {}",
                self.horizon, self.sub_grid
            )));
        }
        Ok(m as usize + 1)
    }
}

/// Positions sampled on a uniform grid starting at the prediction instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedPath {
    pub user_id: String,
    /// Absolute time of the first sample.
    pub origin: f64,
    /// Sample spacing in seconds.
    pub dt: f64,
    pub samples: Vec<Point>,
}

impl PredictedPath {
    pub fn horizon(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.dt
    }

    /// Time offset (from `origin`) of sample `k`.
    pub fn offset(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn start(&self) -> Point {
        self.samples[0]
    }

    fn same_grid(&self, other: &PredictedPath) -> bool {
        self.samples.len() == other.samples.len()
            && (self.dt - other.dt).abs() <= 1e-12
            && (self.origin - other.origin).abs() <= 1e-9
    }
}

/// Fits the last `history` points up to index `i` and samples the
/// continuation over `[t_i, t_i + horizon]`.
pub fn predict_path(traj: &Trajectory, i: usize, predictor: &PathPredictor) -> Result<PredictedPath> {
    if i >= traj.len() {
        return Err(Error::OutOfRange {
            index: i,
            len: traj.len(),
        });
    }
    if predictor.history < 2 || i + 1 < predictor.history {
        return Err(Error::InsufficientData(format!(
            "user `{}` has {} point(s) up to index {i}, prediction needs {}",
            traj.user_id(),
            i + 1,
            predictor.history
        )));
    }
    let count = predictor.sample_count()?;
    let window = traj.window(i + 1 - predictor.history, i)?;
    let curve = fit_smoothing_spline(window, predictor.smoothing)?;
    let origin = window[window.len() - 1].t;
    let samples = (0..count)
        .map(|k| curve.position(origin + k as f64 * predictor.sub_grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictedPath {
        user_id: traj.user_id().to_string(),
        origin,
        dt: predictor.sub_grid,
        samples,
    })
}

/// Minimum simultaneous-time distance between two predicted paths and its
/// time offset.
///
/// Between consecutive samples both users move linearly, so the relative
/// position is linear in time and each interval is minimized in closed form.
/// Ties go to the earliest offset.
pub fn min_dist(a: &PredictedPath, b: &PredictedPath) -> Result<(f64, f64)> {
    if !a.same_grid(b) {
        return Err(Error::InvalidInput(format!(
            "paths of `{}` and `{}` are not on the same sub-grid",
            a.user_id, b.user_id
        )));
    }
    let rel: Vec<Point> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(p, q)| (p.0 - q.0, p.1 - q.1))
        .collect();
    let norm = |r: Point| (r.0 * r.0 + r.1 * r.1).sqrt();

    let mut best = (norm(rel[0]), 0.0);
    for k in 0..rel.len() - 1 {
        let (r0, r1) = (rel[k], rel[k + 1]);
        let dr = (r1.0 - r0.0, r1.1 - r0.1);
        let len2 = dr.0 * dr.0 + dr.1 * dr.1;
        let s = if len2 > 0.0 {
            (-(r0.0 * dr.0 + r0.1 * dr.1) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let d = norm((r0.0 + s * dr.0, r0.1 + s * dr.1));
        if d < best.0 {
            best = (d, (k as f64 + s) * a.dt);
        }
    }
    Ok(best)
}

/// A tracking step at which a pedestrian and a vehicle are predicted to come
/// closer than the conflict threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictInstant {
    /// Global time-step number (`t / step`).
    pub ts: i64,
    pub ped_id: String,
    pub veh_id: String,
    pub min_dist: f64,
    /// Offset of the minimum from the prediction instant, seconds.
    pub time_min_dist: f64,
}

impl ConflictInstant {
    pub fn key(&self) -> CiKey {
        CiKey {
            ts: self.ts,
            ped_id: self.ped_id.clone(),
            veh_id: self.veh_id.clone(),
        }
    }
}

/// Join key shared by the conflict, predictor and label tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CiKey {
    pub ts: i64,
    pub ped_id: String,
    pub veh_id: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detection {
    /// Sorted by `(ts, ped_id, veh_id)`.
    pub instants: Vec<ConflictInstant>,
    /// Co-present pedestrian-vehicle pairs scanned.
    pub pairs_scanned: usize,
    /// Co-present pairs skipped because one user lacked prediction history.
    pub pairs_skipped: usize,
}

/// Scans every tracking step and every co-present pedestrian-vehicle pair.
pub fn detect_conflict_instants(trajs: &[Trajectory], threshold: f64, predictor: &PathPredictor) -> Result<Detection> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidInput(format!(
            "conflict threshold must be positive, got {threshold}"
        )));
    }
    predictor.sample_count()?;

    let mut by_kind: BTreeMap<UserKind, Vec<&Trajectory>> = BTreeMap::new();
    for tr in trajs {
        by_kind.entry(tr.kind()).or_default().push(tr);
    }
    let mut peds = by_kind.remove(&UserKind::Pedestrian).unwrap_or_default();
    let mut vehs = by_kind.remove(&UserKind::Vehicle).unwrap_or_default();
    if peds.is_empty() || vehs.is_empty() {
        return Ok(Detection::default());
    }
    peds.sort_by(|a, b| a.user_id().cmp(b.user_id()));
    vehs.sort_by(|a, b| a.user_id().cmp(b.user_id()));

    let first = trajs.iter().map(Trajectory::first_step).min().unwrap_or(0);
    let last = trajs.iter().map(Trajectory::last_step).max().unwrap_or(-1);

    let per_step: Vec<Detection> = (first..=last)
        .into_par_iter()
        .map(|ts| {
            // `None` marks a user present at `ts` without enough history.
            let paths = |users: &[&Trajectory]| -> Vec<Option<PredictedPath>> {
                users
                    .iter()
                    .filter_map(|tr| tr.index_of_step(ts).map(|i| predict_path(tr, i, predictor).ok()))
                    .collect()
            };
            let ped_paths = paths(&peds);
            let veh_paths = paths(&vehs);
            let mut out = Detection::default();
            for pp in &ped_paths {
                for vp in &veh_paths {
                    out.pairs_scanned += 1;
                    let (Some(pp), Some(vp)) = (pp, vp) else {
                        out.pairs_skipped += 1;
                        continue;
                    };
                    let (d, t) = min_dist(pp, vp).expect("paths predicted on one grid");
                    if d < threshold {
                        out.instants.push(ConflictInstant {
                            ts,
                            ped_id: pp.user_id.clone(),
                            veh_id: vp.user_id.clone(),
                            min_dist: d,
                            time_min_dist: t,
                        });
                    }
                }
            }
            out
        })
        .collect();

    Ok(per_step.into_iter().fold(Detection::default(), |mut acc, d| {
        acc.instants.extend(d.instants);
        acc.pairs_scanned += d.pairs_scanned;
        acc.pairs_skipped += d.pairs_skipped;
        acc
    }))
}

/// Consecutive conflict instants of one pedestrian-vehicle pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictSituation {
    pub ped_id: String,
    pub veh_id: String,
    pub instants: Vec<ConflictInstant>,
}

impl ConflictSituation {
    pub fn first_step(&self) -> i64 {
        self.instants[0].ts
    }
}

/// Groups instants of the same pair whose step gaps are at most `max_gap`.
/// Situations are ordered by first step, then pedestrian, then vehicle.
pub fn group_conflicts(cis: &[ConflictInstant], max_gap: i64) -> Vec<ConflictSituation> {
    let mut by_pair: BTreeMap<(&str, &str), Vec<&ConflictInstant>> = BTreeMap::new();
    for ci in cis {
        by_pair.entry((&ci.ped_id, &ci.veh_id)).or_default().push(ci);
    }
    let mut situations = Vec::new();
    for ((ped, veh), mut list) in by_pair {
        list.sort_by_key(|ci| ci.ts);
        list.dedup_by_key(|ci| ci.ts);
        let mut current: Vec<ConflictInstant> = Vec::new();
        for ci in list {
            if let Some(prev) = current.last() {
                if ci.ts - prev.ts > max_gap {
                    situations.push(ConflictSituation {
                        ped_id: ped.to_string(),
                        veh_id: veh.to_string(),
                        instants: std::mem::take(&mut current),
                    });
                }
            }
            current.push(ci.clone());
        }
        if !current.is_empty() {
            situations.push(ConflictSituation {
                ped_id: ped.to_string(),
                veh_id: veh.to_string(),
                instants: current,
            });
        }
    }
    situations.sort_by(|a, b| (a.first_step(), &a.ped_id, &a.veh_id).cmp(&(b.first_step(), &b.ped_id, &b.veh_id)));
    situations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TrackPoint;

    fn line(id: &str, kind: UserKind, start: Point, vel: Point, n: usize) -> Trajectory {
        let pts = (0..n)
            .map(|i| {
                let t = i as f64 * 0.5;
                TrackPoint::new(t, start.0 + vel.0 * t, start.1 + vel.1 * t)
            })
            .collect();
        Trajectory::new(id, kind, 0.5, pts).unwrap()
    }

    fn path(id: &str, start: Point, vel: Point) -> PredictedPath {
        PredictedPath {
            user_id: id.into(),
            origin: 0.0,
            dt: 0.1,
            samples: (0..=80)
                .map(|k| {
                    let t = k as f64 * 0.1;
                    (start.0 + vel.0 * t, start.1 + vel.1 * t)
                })
                .collect(),
        }
    }

    #[test]
    fn stationary_prediction() {
        let tr = line("p", UserKind::Pedestrian, (2.0, 3.0), (0.0, 0.0), 6);
        let p = predict_path(&tr, 5, &PathPredictor::default()).unwrap();
        assert_eq!(p.samples.len(), 81);
        assert!(p
            .samples
            .iter()
            .all(|&(x, y)| (x - 2.0).abs() < 1e-12 && (y - 3.0).abs() < 1e-12));
    }

    #[test]
    fn uniform_prediction_is_linear() {
        let tr = line("p", UserKind::Pedestrian, (0.0, 0.0), (1.0, 0.0), 6);
        let p = predict_path(&tr, 5, &PathPredictor::default()).unwrap();
        assert!((p.samples[80].0 - (2.5 + 8.0)).abs() < 1e-6);
        assert!((p.origin - 2.5).abs() < 1e-12);
    }

    #[test]
    fn curving_history_heads_along_end_tangent() {
        let pts = (0..4)
            .map(|i| {
                let t = i as f64 * 0.5;
                TrackPoint::new(t, 3.0 * t.sin(), 3.0 - 3.0 * t.cos())
            })
            .collect();
        let tr = Trajectory::new("v", UserKind::Vehicle, 0.5, pts).unwrap();
        let p = predict_path(&tr, 3, &PathPredictor::default()).unwrap();
        let heading = (p.samples[1].1 - p.samples[0].1).atan2(p.samples[1].0 - p.samples[0].0);
        // Tangent from dense differencing of the fitted spline.
        let curve = fit_smoothing_spline(tr.points(), 0.0).unwrap();
        let e = 1e-6;
        let (x0, y0) = curve.position(1.5 - e).unwrap();
        let (x1, y1) = curve.position(1.5).unwrap();
        let tangent = (y1 - y0).atan2(x1 - x0);
        assert!((heading - tangent).abs() < 1e-6, "{heading} vs {tangent}");
    }

    #[test]
    fn prediction_needs_history() {
        let tr = line("p", UserKind::Pedestrian, (0.0, 0.0), (1.0, 0.0), 6);
        assert!(matches!(
            predict_path(&tr, 2, &PathPredictor::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn min_dist_examples() {
        let a = path("a", (0.0, 0.0), (0.0, 0.0));
        let b = path("b", (3.0, 0.0), (0.0, 0.0));
        assert_eq!(min_dist(&a, &b).unwrap(), (3.0, 0.0));
        assert_eq!(min_dist(&a, &a).unwrap(), (0.0, 0.0));

        let c = path("c", (0.0, 0.0), (1.0, 0.0));
        let d = path("d", (16.0, 0.0), (-1.0, 0.0));
        let (dist, t) = min_dist(&c, &d).unwrap();
        assert!(dist.abs() < 1e-9 && (t - 8.0).abs() < 1e-9);
        // Brute force over the sub-grid instants agrees.
        let brute = c
            .samples
            .iter()
            .zip(&d.samples)
            .enumerate()
            .map(|(k, (p, q))| (((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt(), k as f64 * 0.1))
            .fold((f64::INFINITY, 0.0), |best, x| if x.0 < best.0 { x } else { best });
        assert!(brute.0 < 1e-9 && (brute.1 - 8.0).abs() < 1e-9);
    }

    #[test]
    fn min_dist_rejects_mismatched_grid() {
        let a = path("a", (0.0, 0.0), (0.0, 0.0));
        let mut b = path("b", (3.0, 0.0), (0.0, 0.0));
        b.origin = 0.5;
        assert!(matches!(min_dist(&a, &b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn detection_filters_pair_types() {
        let trajs = vec![
            line("p1", UserKind::Pedestrian, (0.0, 0.0), (1.0, 0.0), 10),
            line("p2", UserKind::Pedestrian, (1.0, 0.0), (1.0, 0.0), 10),
        ];
        let d = detect_conflict_instants(&trajs, 5.0, &PathPredictor::default()).unwrap();
        assert!(d.instants.is_empty());
    }

    #[test]
    fn parallel_paths_never_conflict() {
        let trajs = vec![
            line("p", UserKind::Pedestrian, (0.0, 0.0), (1.0, 0.0), 10),
            line("v", UserKind::Vehicle, (0.0, 10.0), (1.0, 0.0), 10),
        ];
        let d = detect_conflict_instants(&trajs, 5.0, &PathPredictor::default()).unwrap();
        assert!(d.instants.is_empty());
        assert_eq!(d.pairs_scanned, 10);
        assert_eq!(d.pairs_skipped, 3);
    }

    #[test]
    fn converging_pair_conflicts_every_step() {
        let trajs = vec![
            line("p", UserKind::Pedestrian, (0.0, -4.0), (0.0, 1.0), 8),
            line("v", UserKind::Vehicle, (-20.0, 0.0), (5.0, 0.0), 8),
        ];
        let d = detect_conflict_instants(&trajs, 5.0, &PathPredictor::default()).unwrap();
        // Steps 3..=7 have history; both reach the origin at t = 4.
        assert_eq!(d.instants.iter().map(|c| c.ts).collect::<Vec<_>>(), vec![3, 4, 5, 6, 7]);
        for ci in &d.instants {
            assert!(ci.min_dist < 1e-9);
            let expected = 4.0 - ci.ts as f64 * 0.5;
            assert!((ci.time_min_dist - expected.max(0.0)).abs() < 1e-9);
        }
    }

    fn ci(ts: i64, ped: &str, veh: &str) -> ConflictInstant {
        ConflictInstant {
            ts,
            ped_id: ped.into(),
            veh_id: veh.into(),
            min_dist: 1.0,
            time_min_dist: 1.0,
        }
    }

    #[test]
    fn grouping_rules() {
        let one: Vec<_> = (0..5).map(|t| ci(t, "p", "v")).collect();
        let s = group_conflicts(&one, 2);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].instants.len(), 5);

        let bursts: Vec<_> = (0..3).chain(13..16).map(|t| ci(t, "p", "v")).collect();
        assert_eq!(group_conflicts(&bursts, 2).len(), 2);

        let mixed: Vec<_> = (0..6)
            .map(|t| if t % 2 == 0 { ci(t, "p1", "v") } else { ci(t, "p2", "v") })
            .collect();
        let s = group_conflicts(&mixed, 2);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].ped_id.as_str(), s[1].ped_id.as_str()), ("p1", "p2"));
    }
}
