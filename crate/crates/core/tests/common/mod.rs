//! Random scenes shared by the integration tests.
#![allow(dead_code)]

use conflict_choice::trajectory::{Scene, TrackPoint, Trajectory, UserKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 0.5;

/// A user moving from `start` with a slowly turning heading and a constant
/// speed change.
pub fn track(id: &str, kind: UserKind, first_step: i64, len: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let (x0, y0) = (rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
    let (speed, acc): (f64, f64) = match kind {
        UserKind::Pedestrian => (rng.random_range(0.6..1.8), rng.random_range(-0.1..0.1)),
        UserKind::Vehicle => (rng.random_range(3.0..9.0), rng.random_range(-0.6..0.6)),
    };
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let turn = rng.random_range(-0.08..0.08);
    let (mut x, mut y) = (x0, y0);
    let mut pts = Vec::with_capacity(len);
    for j in 0..len {
        let t = (first_step + j as i64) as f64 * STEP;
        pts.push(TrackPoint::new(t, x, y));
        let tau = j as f64 * STEP;
        let v = (speed + acc * tau).max(0.2);
        let h = heading + turn * tau;
        x += v * STEP * h.cos();
        y += v * STEP * h.sin();
    }
    Trajectory::new(id, kind, STEP, pts).unwrap()
}

/// `n` users (at least one of each kind) with staggered starts.
pub fn random_tracks(n: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|u| {
            let kind = match u {
                0 => UserKind::Pedestrian,
                1 => UserKind::Vehicle,
                _ if rng.random_bool(0.5) => UserKind::Pedestrian,
                _ => UserKind::Vehicle,
            };
            let first = rng.random_range(0..6);
            let len = rng.random_range(10..20);
            let id = format!("{}{u}", kind.tag());
            track(&id, kind, first, len, &mut rng)
        })
        .collect()
}

pub fn random_scene(n: usize, seed: u64) -> Scene {
    Scene::new(random_tracks(n, seed)).unwrap()
}

/// Rotation by `angle` followed by translation.
pub fn transform(tracks: &[Trajectory], angle: f64, shift: (f64, f64)) -> Vec<Trajectory> {
    let (c, s) = (angle.cos(), angle.sin());
    tracks
        .iter()
        .map(|tr| {
            let pts = tr
                .points()
                .iter()
                .map(|p| TrackPoint::new(p.t, c * p.x - s * p.y + shift.0, s * p.x + c * p.y + shift.1))
                .collect();
            Trajectory::new(tr.user_id(), tr.kind(), tr.step(), pts).unwrap()
        })
        .collect()
}
