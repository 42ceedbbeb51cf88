//! Acceptance checks. Runs as a plain binary so every criterion prints its
//! own PASS/FAIL line; exits non-zero if any fails.

use std::time::{Duration, Instant};

use conflict_choice::conflict::{min_dist, predict_path, PathPredictor, PredictedPath};
use conflict_choice::evaluation::{misclassification_rate, ConfusionMatrix};
use conflict_choice::labeling::{classify, k_statistic, LabelSettings, Reaction};
use conflict_choice::mnl::{
    backward_select_traced, fit, goodness_of_fit, log_likelihood, log_likelihood_gradient, predict_proba, reference,
    simulate_choices, softmax, FitOptions, FittedModel, LabeledDataset, ModelSpec, SelectionCriterion,
};
use conflict_choice::pipeline::{cmd_synthesize, run_pipeline};
use conflict_choice::predictors::{Predictor, PredictorVector};
use conflict_choice::synth::mixed_scene;
use conflict_choice::trajectory::{fit_smoothing_spline, Scene, TrackPoint, Trajectory, UserKind};
use conflict_choice::PipelineConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Predictor draws for the reference vehicle model, within ranges seen in
/// shared-space conflicts.
fn vehicle_rows(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let delay = Normal::new(0.0, 2.0).unwrap();
    let acc_veh = Normal::new(0.0, 0.8).unwrap();
    let acc_ped = Normal::new(0.0, 0.4).unwrap();
    (0..n)
        .map(|_| {
            vec![
                rng.random_range(0.0..5.0),  // MinDist
                rng.random_range(0.0..8.0),  // TimeMinDist
                rng.random_range(0.0..8.0),  // OrtDist
                delay.sample(rng),           // TimeDelayXP
                rng.random_range(0.0..10.0), // SpeedVeh
                acc_veh.sample(rng),         // AccVeh
                acc_ped.sample(rng),         // AccPed
            ]
        })
        .collect()
}

fn dataset(columns: &[Predictor], rows: &[Vec<f64>], outcomes: &[Reaction]) -> LabeledDataset {
    let mut data = LabeledDataset::new(columns.to_vec());
    for (r, c) in rows.iter().zip(outcomes) {
        data.push(r, *c).unwrap();
    }
    data
}

fn softmax_reference() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sum = 0.0f64;
    let mut worst_shift = 0.0f64;
    for model in [reference::vehicle_model(), reference::pedestrian_model()] {
        for _ in 0..1000 {
            let mut x = PredictorVector::default();
            for p in Predictor::ALL {
                x.set(p, rng.random_range(-50.0..50.0));
            }
            let probs = predict_proba(&model, &x).map_err(|e| e.to_string())?;
            ensure(
                probs.iter().all(|&v| v > 0.0),
                format!("non-positive probability {probs:?}"),
            )?;
            worst_sum = worst_sum.max((probs.iter().sum::<f64>() - 1.0).abs());
            let u = model.utilities(&x.select(&model.spec.predictors));
            let c = rng.random_range(-100.0..100.0);
            let shifted = softmax(u.map(|v| v + c));
            for (a, b) in probs.iter().zip(shifted) {
                worst_shift = worst_shift.max((a - b).abs());
            }
        }
    }
    // At x = 0 only the intercepts remain.
    let p0 = predict_proba(&reference::vehicle_model(), &PredictorVector::default()).unwrap();
    let z = 1.0 + 0.196f64.exp() + (-0.309f64).exp();
    let want = [1.0 / z, 0.196f64.exp() / z, (-0.309f64).exp() / z];
    let at_zero = p0.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(worst_sum <= 1e-12, format!("sum off by {worst_sum:e}"))?;
    ensure(
        worst_shift <= 1e-12,
        format!("shift changes probabilities by {worst_shift:e}"),
    )?;
    ensure(
        at_zero <= 1e-12,
        format!("intercept-only probabilities off by {at_zero:e}"),
    )?;
    Ok(format!(
        "max |sum - 1| {worst_sum:.1e}, max shift change {worst_shift:.1e}"
    ))
}

fn coefficient_recovery() -> Check {
    let truth = reference::vehicle_model();
    let columns = truth.spec.predictors.clone();
    let true_params = truth.parameters();
    let mut good = 0;
    let mut worst_z = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = vehicle_rows(50_000, &mut rng);
        let outcomes = simulate_choices(&truth, &rows, &mut rng).map_err(|e| e.to_string())?;
        let fitted = fit(
            &dataset(&columns, &rows, &outcomes),
            &truth.spec,
            &FitOptions::default(),
        )
        .map_err(|e| format!("seed {seed}: {e}"))?;
        let ses: Vec<f64> = fitted
            .alternatives
            .iter()
            .flat_map(|a| std::iter::once(a.intercept_se).chain(a.std_errors.iter().copied()))
            .collect();
        let max_z = fitted
            .parameters()
            .iter()
            .zip(&true_params)
            .zip(&ses)
            .map(|((est, t), se)| ((est - t) / se).abs())
            .fold(0.0, f64::max);
        if max_z <= 3.0 {
            good += 1;
        }
        worst_z.push(max_z);
    }
    let worst = worst_z.iter().cloned().fold(0.0, f64::max);
    ensure(
        good >= 19,
        format!("{good}/20 repetitions within 3 SE (largest |error|/SE {worst:.2})"),
    )?;
    Ok(format!("{good}/20 repetitions with every coefficient within 3 SE"))
}

fn gradient_check() -> Check {
    let truth = reference::vehicle_model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows = vehicle_rows(200, &mut rng);
    let outcomes = simulate_choices(&truth, &rows, &mut rng).map_err(|e| e.to_string())?;
    let data = dataset(&truth.spec.predictors, &rows, &outcomes);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let theta: Vec<f64> = (0..truth.spec.n_params())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let analytic = log_likelihood_gradient(&data, &theta);
        let h = 1e-5;
        let numeric: Vec<f64> = (0..theta.len())
            .map(|j| {
                let mut up = theta.clone();
                let mut down = theta.clone();
                up[j] += h;
                down[j] -= h;
                (log_likelihood(&data, &up) - log_likelihood(&data, &down)) / (2.0 * h)
            })
            .collect();
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        worst = worst.max(diff / norm.max(1.0));
    }
    ensure(worst <= 1e-6, format!("relative error {worst:.2e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn curved_track(id: &str, kind: UserKind, rng: &mut ChaCha8Rng) -> Trajectory {
    // A gently curving track so the prediction is not trivially linear.
    let (x0, y0) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
    let speed = match kind {
        UserKind::Pedestrian => rng.random_range(0.5..2.0),
        UserKind::Vehicle => rng.random_range(2.0..9.0),
    };
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let turn = rng.random_range(-0.2..0.2);
    let pts = (0..4)
        .map(|i| {
            let t = i as f64 * 0.5;
            let h = heading + turn * t;
            TrackPoint::new(t, x0 + speed * t * h.cos(), y0 + speed * t * h.sin())
        })
        .collect();
    Trajectory::new(id, kind, 0.5, pts).unwrap()
}

fn min_dist_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let predictor = PathPredictor::default();
    let (mut worst_d, mut worst_t) = (0.0f64, 0.0f64);
    for scene in 0..100 {
        let p = curved_track("p", UserKind::Pedestrian, &mut rng);
        let v = curved_track("v", UserKind::Vehicle, &mut rng);
        let pp = predict_path(&p, 3, &predictor).map_err(|e| e.to_string())?;
        let vp = predict_path(&v, 3, &predictor).map_err(|e| e.to_string())?;
        let (d, t) = min_dist(&pp, &vp).map_err(|e| e.to_string())?;

        // Dense enumeration on the fitted curves themselves.
        let cp = fit_smoothing_spline(p.points(), 0.0).unwrap();
        let cv = fit_smoothing_spline(v.points(), 0.0).unwrap();
        let origin = p.points()[3].t;
        let (mut bd, mut bt) = (f64::INFINITY, 0.0);
        for j in 0..=800 {
            let tau = j as f64 * 0.01;
            let a = cp.position(origin + tau).unwrap();
            let b = cv.position(origin + tau).unwrap();
            let dist = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            if dist < bd {
                bd = dist;
                bt = tau;
            }
        }
        worst_d = worst_d.max((d - bd).abs());
        worst_t = worst_t.max((t - bt).abs());
        ensure(
            (d - bd).abs() <= 1e-3 && (t - bt).abs() <= 0.1,
            format!("scene {scene}: module ({d:.5}, {t:.3}) vs dense ({bd:.5}, {bt:.3})"),
        )?;
    }
    Ok(format!("100 scenes, max |dd| {worst_d:.1e} m, max |dt| {worst_t:.2} s"))
}

/// Arrival time at distance `dist` for motion at speed `v` that changes at
/// rate `a` for the 1.5 s of the observed window and then continues at its
/// end speed (what the observed fit reproduces).
fn observed_arrival(v: f64, a: f64, dist: f64) -> f64 {
    let end = 1.5 * v + 1.125 * a;
    if dist <= end {
        if a == 0.0 {
            dist / v
        } else {
            (-v + (v * v + 2.0 * a * dist).sqrt()) / a
        }
    } else {
        1.5 + (dist - end) / (v + 1.5 * a)
    }
}

/// Rate `a` giving k = `target` for speed `v` and crossing distance `dist`.
fn rate_for(v: f64, dist: f64, target: f64) -> f64 {
    let k = |a: f64| dist / v - observed_arrival(v, a, dist);
    let (mut lo, mut hi) = if target < 0.0 {
        (-v / 1.5 * 0.999, 0.0)
    } else {
        (0.0, 100.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // k grows with a.
        if k(mid) < target {
            lo = mid
        } else {
            hi = mid
        }
    }
    0.5 * (lo + hi)
}

fn labeling_oracle() -> Check {
    let settings = LabelSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let step = 0.5;
    let (i, d) = (4usize, 7usize);
    let td = d as f64 * step;
    let mut correct = 0;
    let mut worst = 0.0f64;
    for case in 0..50 {
        let (want, target) = match case % 3 {
            0 => (Reaction::Prudent, -rng.random_range(0.5..1.5)),
            1 => (Reaction::Aggressive, rng.random_range(0.5..1.5)),
            _ => (Reaction::NoReaction, 0.0),
        };
        let kind = if case % 2 == 0 {
            UserKind::Pedestrian
        } else {
            UserKind::Vehicle
        };
        let v = match kind {
            UserKind::Pedestrian => rng.random_range(0.8..2.0),
            UserKind::Vehicle => rng.random_range(3.0..9.0),
        };
        let dist = 2.0 * v + rng.random_range(0.5..8.0);
        let a = if target == 0.0 { 0.0 } else { rate_for(v, dist, target) };
        let closed = dist / v - observed_arrival(v, a, dist);
        ensure(
            (closed - target).abs() < 1e-9,
            format!("case {case}: construction gives {closed}"),
        )?;

        // Random placement and heading of the whole case.
        let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (ox, oy) = (rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0));
        let (c, s) = (heading.cos(), heading.sin());
        let place = |along: f64, across: f64| (ox + along * c - across * s, oy + along * s + across * c);
        let pts = (0..14)
            .map(|n| {
                let t = n as f64 * step;
                let along = if t <= td {
                    v * t
                } else {
                    v * t + 0.5 * a * (t - td).powi(2)
                };
                let (x, y) = place(along, 0.0);
                TrackPoint::new(t, x, y)
            })
            .collect();
        let subject = Trajectory::new("s", kind, step, pts).unwrap();
        // The other user's path: a line across the subject's course.
        let x_along = v * td + dist;
        let line = PredictedPath {
            user_id: "o".into(),
            origin: i as f64 * step,
            dt: 0.1,
            samples: (0..=80).map(|n| place(x_along, -20.0 + n as f64 * 0.5)).collect(),
        };
        let k = k_statistic(&subject, &line, i, &settings).map_err(|e| format!("case {case}: {e}"))?;
        worst = worst.max((k - closed).abs());
        if classify(k, settings.threshold) == want {
            correct += 1;
        }
    }
    ensure(correct == 50, format!("{correct}/50 classified as scripted"))?;
    Ok(format!(
        "50/50 classified as scripted, max |k - closed form| {worst:.1e} s"
    ))
}

fn misclassification_arithmetic() -> Check {
    let vehicle = ConfusionMatrix::from_counts([[125, 57, 14], [22, 420, 22], [21, 55, 92]]);
    let pedestrian = ConfusionMatrix::from_counts([[262, 27, 49], [24, 117, 71], [54, 39, 199]]);
    let rv = misclassification_rate(&vehicle).map_err(|e| e.to_string())?;
    let rp = misclassification_rate(&pedestrian).map_err(|e| e.to_string())?;
    ensure(
        (rv - 0.231).abs() <= 1e-3 && (rp - 0.313).abs() <= 1e-3,
        format!("{rv:.4} / {rp:.4}"),
    )?;
    Ok(format!("vehicles {rv:.4}, pedestrians {rp:.4}"))
}

fn degrees_of_freedom() -> Check {
    let spec = ModelSpec::full(UserKind::Vehicle);
    ensure(
        spec.predictors.len() == 11,
        format!("{} vehicle predictors", spec.predictors.len()),
    )?;
    let p = spec.predictors.len();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let truth = FittedModel::from_coefficients(
        spec.clone(),
        (0.2, (0..p).map(|_| rng.random_range(-0.5..0.5)).collect()),
        (-0.3, (0..p).map(|_| rng.random_range(-0.5..0.5)).collect()),
    )
    .unwrap();
    let rows: Vec<Vec<f64>> = (0..3000)
        .map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let outcomes = simulate_choices(&truth, &rows, &mut rng).unwrap();
    let model = fit(
        &dataset(&spec.predictors, &rows, &outcomes),
        &spec,
        &FitOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let gof = goodness_of_fit(&model);
    ensure(gof.df == 22, format!("df = {}", gof.df))?;
    Ok(format!("df = {}, chi2 = {:.1}", gof.df, gof.chi2))
}

fn diagonal_fraction(cm: &ConfusionMatrix) -> f64 {
    cm.correct() as f64 / cm.total() as f64
}

fn end_to_end() -> Check {
    let seed = 7;
    let config = PipelineConfig {
        seed,
        ..Default::default()
    };
    let run = || -> Result<_, String> {
        let tracks = cmd_synthesize(&mixed_scene(20, seed), &config).map_err(|e| e.to_string())?;
        let scene = Scene::new(tracks).map_err(|e| e.to_string())?;
        run_pipeline(&scene, &config).map_err(|e| e.to_string())
    };
    let first = run()?;
    let second = run()?;
    let a = first.artifacts().map_err(|e| e.to_string())?;
    let b = second.artifacts().map_err(|e| e.to_string())?;
    ensure(a == b, "artifacts differ between two runs")?;
    let fv = diagonal_fraction(&first.vehicle.evaluation.confusion);
    let fp = diagonal_fraction(&first.pedestrian.evaluation.confusion);
    ensure(
        fv > 0.9 && fp > 0.9,
        format!("diagonal fraction vehicles {fv:.3}, pedestrians {fp:.3}"),
    )?;
    Ok(format!(
        "{} artifacts identical; diagonal fraction vehicles {fv:.3}, pedestrians {fp:.3}",
        a.len()
    ))
}

fn noise_dropped_first() -> Check {
    let truth = reference::vehicle_model();
    let mut columns = truth.spec.predictors.clone();
    columns.push(Predictor::SpeedPed);
    let spec = ModelSpec::new(UserKind::Vehicle, columns.clone()).unwrap();
    let noise = Normal::new(1.3, 0.3).unwrap();
    let mut first = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let rows = vehicle_rows(5000, &mut rng);
        let outcomes = simulate_choices(&truth, &rows, &mut rng).unwrap();
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|mut r| {
                r.push(noise.sample(&mut rng));
                r
            })
            .collect();
        let data = dataset(&columns, &rows, &outcomes);
        let selection = backward_select_traced(&data, &spec, &SelectionCriterion::default(), &FitOptions::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        if selection.steps.first().map(|s| s.dropped) == Some(Predictor::SpeedPed) {
            first += 1;
        }
    }
    ensure(first >= 19, format!("noise dropped first in {first}/20"))?;
    Ok(format!("noise dropped first in {first}/20"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "softmax with reference models",
            Duration::from_secs(1),
            softmax_reference,
        ),
        ("coefficient recovery", Duration::from_secs(120), coefficient_recovery),
        ("log-likelihood gradient", Duration::from_secs(5), gradient_check),
        ("minimum distance oracle", Duration::from_secs(10), min_dist_oracle),
        ("labeling oracle", Duration::from_secs(10), labeling_oracle),
        (
            "misclassification arithmetic",
            Duration::from_secs(1),
            misclassification_arithmetic,
        ),
        ("degrees of freedom", Duration::from_secs(1), degrees_of_freedom),
        ("end-to-end synthetic scene", Duration::from_secs(60), end_to_end),
        (
            "noise predictor dropped first",
            Duration::from_secs(120),
            noise_dropped_first,
        ),
    ];
    let mut failed = 0;
    for (n, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = result.and_then(|m| {
            if elapsed <= budget {
                Ok(m)
            } else {
                Err(format!("{m}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(m) => println!("criterion {}: PASS {name} ({elapsed:.2?}): {m}", n + 1),
            Err(m) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({elapsed:.2?}): {m}", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
