//! The predictor vector of every conflict instant of a scripted crossing.
//!
//! cargo run --example predictors

use conflict_choice::conflict::detect_conflict_instants;
use conflict_choice::predictors::{compute_all, Predictor};
use conflict_choice::synth::{synthesize, AgentScript, Maneuver, ScenarioSpec};
use conflict_choice::trajectory::{Scene, UserKind};
use conflict_choice::PipelineConfig;

fn main() -> conflict_choice::Result<()> {
    let config = PipelineConfig::default();
    let spec = ScenarioSpec {
        seed: 0,
        noise_sd: 0.0,
        agents: vec![
            AgentScript {
                id: "v1".into(),
                kind: UserKind::Vehicle,
                t0: 0.0,
                duration: 12.0,
                start: [-56.0, -1.5],
                heading_deg: 0.0,
                speed: 7.0,
                maneuver: Maneuver::Decelerate {
                    at: 1.0,
                    rate: 0.8,
                    min_speed: 2.0,
                },
            },
            AgentScript {
                id: "p1".into(),
                kind: UserKind::Pedestrian,
                t0: 0.0,
                duration: 12.0,
                start: [0.0, -11.9],
                heading_deg: 90.0,
                speed: 1.3,
                maneuver: Maneuver::Uniform,
            },
        ],
    };
    let scene = Scene::new(synthesize(&spec, config.step)?)?;
    let detection = detect_conflict_instants(scene.trajectories(), config.threshold, &config.path_predictor())?;
    let vectors = compute_all(&detection.instants, &scene, &config.predictor_settings());

    print!("{:>4}", "ts");
    for p in Predictor::ALL {
        print!(" {:>11}", p.name());
    }
    println!();
    for (ci, v) in detection.instants.iter().zip(vectors) {
        let v = v?;
        print!("{:>4}", ci.ts);
        for p in Predictor::ALL {
            print!(" {:>11.3}", v.get(p));
        }
        println!();
    }
    Ok(())
}
