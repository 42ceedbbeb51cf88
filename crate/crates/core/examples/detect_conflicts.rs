//! Scripts two crossings, finds their conflict instants and groups them
//! into situations.
//!
//! cargo run --example detect_conflicts

use conflict_choice::conflict::{detect_conflict_instants, group_conflicts};
use conflict_choice::io::format_conflicts;
use conflict_choice::synth::{synthesize, AgentScript, Maneuver, ScenarioSpec};
use conflict_choice::trajectory::UserKind;
use conflict_choice::PipelineConfig;

fn agent(id: &str, kind: UserKind, t0: f64, start: [f64; 2], heading_deg: f64, speed: f64) -> AgentScript {
    AgentScript {
        id: id.into(),
        kind,
        t0,
        duration: 14.0,
        start,
        heading_deg,
        speed,
        maneuver: Maneuver::Uniform,
    }
}

fn main() -> conflict_choice::Result<()> {
    let config = PipelineConfig::default();
    let spec = ScenarioSpec {
        seed: 0,
        noise_sd: 0.0,
        agents: vec![
            // Meets p1 at the origin 7 s after starting.
            agent("v1", UserKind::Vehicle, 0.0, [-49.0, 0.0], 0.0, 7.0),
            agent("p1", UserKind::Pedestrian, 0.0, [0.0, -9.1], 90.0, 1.3),
            // A later pair meeting near (12, 3).
            agent("v2", UserKind::Vehicle, 2.0, [-30.0, 3.0], 0.0, 6.0),
            agent("p2", UserKind::Pedestrian, 2.0, [12.0, -5.0], 90.0, 1.2),
        ],
    };
    let trajectories = synthesize(&spec, config.step)?;
    let detection = detect_conflict_instants(&trajectories, config.threshold, &config.path_predictor())?;
    println!(
        "{} pairs scanned, {} skipped, {} conflict instants",
        detection.pairs_scanned,
        detection.pairs_skipped,
        detection.instants.len()
    );
    print!("{}", format_conflicts(&detection.instants, config.step));
    for s in group_conflicts(&detection.instants, config.group_gap) {
        println!(
            "situation {}-{}: {} instants from step {}",
            s.ped_id,
            s.veh_id,
            s.instants.len(),
            s.first_step()
        );
    }
    Ok(())
}
