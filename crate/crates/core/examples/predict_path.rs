//! Fits the last four observed positions of two road users, continues them
//! over the horizon and reports how close the predicted paths come.
//!
//! cargo run --example predict_path

use conflict_choice::conflict::{min_dist, predict_path, PathPredictor};
use conflict_choice::trajectory::{fit_smoothing_spline, TrackPoint, Trajectory, UserKind};

fn track(id: &str, kind: UserKind, f: impl Fn(f64) -> (f64, f64)) -> conflict_choice::Result<Trajectory> {
    let points = (0..8)
        .map(|i| {
            let t = 0.5 * i as f64;
            let (x, y) = f(t);
            TrackPoint::new(t, x, y)
        })
        .collect();
    Trajectory::new(id, kind, 0.5, points)
}

fn main() -> conflict_choice::Result<()> {
    // A vehicle braking at 1 m/s² and a pedestrian walking toward its lane.
    let veh = track("v1", UserKind::Vehicle, |t| (-40.0 + 9.0 * t - 0.5 * t * t, 0.0))?;
    let ped = track("p1", UserKind::Pedestrian, |t| (0.0, -9.0 + 1.3 * t))?;

    let last = veh.len() - 1;
    let curve = fit_smoothing_spline(veh.window(last - 3, last)?, 0.0)?;
    let (vx, vy) = curve.velocity(veh.points()[last].t)?;
    println!(
        "vehicle speed at t = 3.5 s from the spline: {:.3} m/s (exact 5.5)",
        vx.hypot(vy)
    );

    let predictor = PathPredictor::default();
    let vp = predict_path(&veh, last, &predictor)?;
    let pp = predict_path(&ped, ped.len() - 1, &predictor)?;
    println!("{} samples every {} s from t = {}", vp.samples.len(), vp.dt, vp.origin);
    for k in (0..vp.samples.len()).step_by(20) {
        let (x, y) = vp.samples[k];
        println!("  t + {:4.1} s  vehicle ({x:7.2}, {y:5.2})", vp.offset(k));
    }
    let (d, t) = min_dist(&vp, &pp)?;
    println!("closest approach {d:.2} m, {t:.2} s ahead");
    Ok(())
}
