//! Turns a scenario file into a trajectory CSV and reads it back.
//!
//! cargo run --example synthesize -- [scenario.toml] [out.csv]

use std::path::PathBuf;

use conflict_choice::io::{format_trajectories, read_trajectories, write_text};
use conflict_choice::synth::{synthesize, ScenarioSpec};

const SCENARIO: &str = r#"
seed = 4
noise_sd = 0.05

[[agent]]
id = "v1"
kind = "veh"
t0 = 0.0
duration = 10.0
start = [-50.0, -1.5]
heading_deg = 0.0
speed = 8.0
maneuver = { type = "decelerate", at = 2.0, rate = 2.0, min_speed = 1.0 }

[[agent]]
id = "p1"
kind = "ped"
t0 = 0.5
duration = 10.0
start = [0.0, -9.0]
heading_deg = 90.0
speed = 1.2
maneuver = { type = "curve", at = 3.0, yaw_rate = 0.1 }
"#;

fn main() -> conflict_choice::Result<()> {
    let mut args = std::env::args().skip(1);
    let spec = match args.next() {
        Some(path) => ScenarioSpec::load(&PathBuf::from(path))?,
        None => ScenarioSpec::from_toml(SCENARIO)?,
    };
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("synthesized.csv"));

    let trajectories = synthesize(&spec, 0.5)?;
    write_text(&out, &format_trajectories(&trajectories))?;
    let scene = read_trajectories(&out, 0.5)?;
    for tr in scene.trajectories() {
        let speeds: Vec<String> = (0..tr.len())
            .step_by(4)
            .map(|i| format!("{:.2}", tr.speed_at(i).unwrap_or(f64::NAN)))
            .collect();
        println!(
            "{} ({}) {} points, speed every 2 s: {}",
            tr.user_id(),
            tr.kind(),
            tr.len(),
            speeds.join(" ")
        );
    }
    println!("written to {}", out.display());
    Ok(())
}
