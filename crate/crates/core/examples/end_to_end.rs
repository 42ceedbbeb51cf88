//! Synthesizes a mixed scene, runs every stage and writes the artifacts.
//!
//! cargo run --example end_to_end -- [out_dir] [seed]

use conflict_choice::pipeline::{cmd_synthesize, run_pipeline};
use conflict_choice::synth::mixed_scene;
use conflict_choice::trajectory::{Scene, UserKind};
use conflict_choice::PipelineConfig;

fn main() -> conflict_choice::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next();
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let config = PipelineConfig {
        seed,
        ..Default::default()
    };
    let scene = Scene::new(cmd_synthesize(&mixed_scene(20, seed), &config)?)?;
    let result = run_pipeline(&scene, &config)?;

    print!("{}", result.summary());
    for kind in [UserKind::Vehicle, UserKind::Pedestrian] {
        let k = result.kind(kind);
        println!("\n{}", k.fit.report.split("# Resolved").next().unwrap_or_default());
        println!(
            "confusion (rows observed, columns predicted): {:?}",
            k.evaluation.confusion.counts
        );
    }
    if let Some(dir) = out {
        result.write_to(std::path::Path::new(&dir))?;
        println!("artifacts written to {dir}");
    }
    Ok(())
}
