mod common;

use conflict_choice::trajectory::{fit_smoothing_spline, TrackPoint, Trajectory, UserKind};
use proptest::prelude::*;

fn points(n: usize, coords: &[(f64, f64)]) -> Vec<TrackPoint> {
    (0..n)
        .map(|i| TrackPoint::new(i as f64 * 0.5, coords[i].0, coords[i].1))
        .collect()
}

proptest! {
    #[test]
    fn interpolates_knots(coords in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 4..9)) {
        let pts = points(coords.len(), &coords);
        let curve = fit_smoothing_spline(&pts, 0.0).unwrap();
        for p in &pts {
            let (x, y) = curve.position(p.t).unwrap();
            prop_assert!((x - p.x).abs() < 1e-9 && (y - p.y).abs() < 1e-9);
        }
    }

    #[test]
    fn continuous_past_last_knot(
        coords in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 4..9),
        smoothing in prop_oneof![Just(0.0), 1e-4..1.0f64],
    ) {
        let pts = points(coords.len(), &coords);
        let curve = fit_smoothing_spline(&pts, smoothing).unwrap();
        let t_max = curve.domain().1;
        let left = curve.position(t_max).unwrap();
        let right = curve.position(t_max + 1e-13).unwrap();
        prop_assert!((left.0 - right.0).abs() < 1e-9 && (left.1 - right.1).abs() < 1e-9);
    }

    #[test]
    fn speed_ignores_rigid_motion(seed in 0u64..1000, angle in 0.0..6.3f64, dx in -100.0..100.0f64, dy in -100.0..100.0f64) {
        let tracks = common::random_tracks(3, seed);
        let moved = common::transform(&tracks, angle, (dx, dy));
        for (a, b) in tracks.iter().zip(&moved) {
            for i in 0..a.len() {
                prop_assert!((a.speed_at(i).unwrap() - b.speed_at(i).unwrap()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn uniform_speed_has_no_acceleration(speed in 0.1..15.0f64, heading in 0.0..6.3f64, turn in prop_oneof![Just(0.0), -0.3..0.3f64], n in 3usize..20) {
        // Equal arc lengths per step along a circle (or a line).
        let pts = (0..n)
            .map(|i| {
                let t = i as f64 * 0.5;
                let (x, y) = if turn == 0.0 {
                    (speed * t * heading.cos(), speed * t * heading.sin())
                } else {
                    let r = speed / turn;
                    let th = heading + turn * t;
                    (r * (th.sin() - heading.sin()), -r * (th.cos() - heading.cos()))
                };
                TrackPoint::new(t, x, y)
            })
            .collect();
        let tr = Trajectory::new("u", UserKind::Vehicle, 0.5, pts).unwrap();
        // On a circle only central speeds are exact, so skip indices next
        // to the ends.
        let skip = usize::from(turn != 0.0);
        for i in 1 + skip..n - 1 - skip {
            prop_assert!(tr.accel_at(i).unwrap().abs() < 1e-9);
        }
    }
}

#[test]
fn braking_track_continues_slower() {
    // x = 6t - 1.5t^2: speed 6 m/s falling to 1.5 m/s at t = 1.5.
    let pts: Vec<TrackPoint> = (0..4)
        .map(|i| {
            let t = i as f64 * 0.5;
            TrackPoint::new(t, 6.0 * t - 1.5 * t * t, 0.0)
        })
        .collect();
    let tr = Trajectory::new("v", UserKind::Vehicle, 0.5, pts.clone()).unwrap();
    let curve = fit_smoothing_spline(&pts, 0.0).unwrap();
    let t_max = curve.domain().1;
    let dense = |t: f64| {
        let (a, b) = (curve.position(t - 0.005).unwrap(), curve.position(t + 0.005).unwrap());
        (b.0 - a.0).hypot(b.1 - a.1) / 0.01
    };
    let ahead = dense(t_max + 1.0);
    assert!((ahead - 1.5).abs() < 1e-9, "{ahead}");
    assert!(ahead < tr.speed_at(3).unwrap());
    assert!(ahead < dense(0.5));
}
