//! k-statistics of a braking, an accelerating and a steady vehicle facing the
//! same pedestrian.
//!
//! cargo run --example label_reactions

use conflict_choice::conflict::predict_path;
use conflict_choice::labeling::{classify, k_statistic, LabelSettings};
use conflict_choice::synth::{synthesize, AgentScript, Maneuver, ScenarioSpec};
use conflict_choice::trajectory::UserKind;
use conflict_choice::PipelineConfig;

fn main() -> conflict_choice::Result<()> {
    let config = PipelineConfig::default();
    let settings = LabelSettings::default();
    let ped = AgentScript {
        id: "p".into(),
        kind: UserKind::Pedestrian,
        t0: 0.0,
        duration: 12.0,
        start: [0.0, -11.9],
        heading_deg: 90.0,
        speed: 1.3,
        maneuver: Maneuver::Uniform,
    };
    let scripts = [
        (
            "brakes",
            Maneuver::Decelerate {
                at: 2.0,
                rate: 1.5,
                min_speed: 1.0,
            },
        ),
        (
            "speeds up",
            Maneuver::Accelerate {
                at: 2.0,
                rate: 1.5,
                max_speed: 14.0,
            },
        ),
        ("keeps pace", Maneuver::Uniform),
    ];
    for (what, maneuver) in scripts {
        let veh = AgentScript {
            id: "v".into(),
            kind: UserKind::Vehicle,
            t0: 0.0,
            duration: 12.0,
            start: [-63.0, -1.5],
            heading_deg: 0.0,
            speed: 7.0,
            maneuver,
        };
        let spec = ScenarioSpec {
            seed: 0,
            noise_sd: 0.0,
            agents: vec![veh, ped.clone()],
        };
        let tracks = synthesize(&spec, config.step)?;
        let (v, p) = (&tracks[0], &tracks[1]);
        println!("vehicle {what}:");
        for i in 3..6 {
            let other = predict_path(p, i, &config.path_predictor())?;
            let k = k_statistic(v, &other, i, &settings)?;
            println!(
                "  conflict at t = {:.1} s: k = {k:+.3} s -> {}",
                v.points()[i].t,
                classify(k, settings.threshold).code(UserKind::Vehicle)
            );
        }
    }
    Ok(())
}
