use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conflict_choice::io;
use conflict_choice::mnl::{read_model, write_model, ModelSpec};
use conflict_choice::pipeline::{cmd_build_dataset, cmd_detect, cmd_evaluate, cmd_fit, cmd_synthesize, run_pipeline};
use conflict_choice::predictors::Predictor;
use conflict_choice::synth::{mixed_scene, ScenarioSpec};
use conflict_choice::trajectory::{Scene, UserKind};
use conflict_choice::{Error, PipelineConfig, Result};

/// Conflict detection, reaction labeling and reaction-choice models for
/// pedestrian-vehicle trajectories.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Settings {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set horizon=6`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Tracking step, seconds.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Prediction horizon, seconds.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Conflict distance threshold, meters.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Reaction threshold on |k|, seconds.
    #[arg(long, global = true)]
    k_threshold: Option<f64>,
    /// Share of rows used for fitting.
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    /// Seed of the train/test split and of generated scenes.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

impl Settings {
    /// Named flags win over `--set`, which wins over the file.
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut sets = self.sets.clone();
        let named = [
            ("step", self.step),
            ("horizon", self.horizon),
            ("threshold", self.threshold),
            ("k_threshold", self.k_threshold),
            ("train_fraction", self.train_fraction),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                sets.push(format!("{key}={v:?}"));
            }
        }
        if let Some(seed) = self.seed {
            sets.push(format!("seed={seed}"));
        }
        PipelineConfig::resolve(self.config.as_deref(), &sets)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find conflict instants in a trajectory file.
    Detect {
        /// CSV with user_id, kind, t, x, y.
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute predictors and reaction labels for every conflict instant.
    BuildDataset {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        conflicts: PathBuf,
        /// Receives dataset_ped.csv and dataset_veh.csv.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Estimate a reaction-choice model on the training split.
    Fit {
        /// One user kind's rows, as written by build-dataset.
        #[arg(long)]
        dataset: PathBuf,
        /// Comma-separated predictor names; without it, all predictors
        /// followed by backward selection.
        #[arg(long, value_delimiter = ',')]
        predictors: Option<Vec<String>>,
        /// Model file.
        #[arg(long)]
        out: PathBuf,
        /// Coefficient tables; printed when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Confusion matrix on the test split, and per-situation timelines.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate trajectories from a scenario file or a random mixed scene.
    Synthesize {
        /// TOML scenario with [[agent]] entries.
        #[arg(long, conflicts_with = "mixed", required_unless_present = "mixed")]
        scenario: Option<PathBuf>,
        /// Number of agents of a generated mixed scene.
        #[arg(long)]
        mixed: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// All stages, from trajectories to evaluation.
    Pipeline {
        #[arg(long)]
        trajectories: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn dataset_kind(rows: &[conflict_choice::dataset::DatasetRow], path: &Path) -> Result<UserKind> {
    rows.first()
        .map(|r| r.user_kind)
        .ok_or_else(|| Error::InvalidInput(format!("{}: dataset has no rows", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.settings.resolve()?;
    match cli.command {
        Command::Detect { trajectories, out } => {
            let scene = io::read_trajectories(&trajectories, config.step)?;
            let detection = cmd_detect(&scene, &config)?;
            io::write_text(&out, &io::format_conflicts(&detection.instants, config.step))?;
            eprintln!("{} conflict instants", detection.instants.len());
        }
        Command::BuildDataset {
            trajectories,
            conflicts,
            out_dir,
        } => {
            let scene = io::read_trajectories(&trajectories, config.step)?;
            let cis = io::read_conflicts(&conflicts)?;
            let dataset = cmd_build_dataset(&scene, &cis, &config)?;
            for kind in [UserKind::Pedestrian, UserKind::Vehicle] {
                let path = out_dir.join(format!("dataset_{}.csv", kind.tag()));
                io::write_text(&path, &io::format_dataset(dataset.rows(kind), config.step))?;
            }
            eprintln!(
                "{} pedestrian rows, {} vehicle rows; dropped: {} predictors, {} no crossing, {} short track",
                dataset.pedestrian.len(),
                dataset.vehicle.len(),
                dataset.dropped_predictors,
                dataset.dropped_no_crossing,
                dataset.dropped_insufficient
            );
        }
        Command::Fit {
            dataset,
            predictors,
            out,
            report,
        } => {
            let rows = io::read_dataset(&dataset)?;
            let kind = dataset_kind(&rows, &dataset)?;
            let spec = predictors
                .map(|names| {
                    let cols = names
                        .iter()
                        .map(|n| n.trim().parse::<Predictor>())
                        .collect::<Result<Vec<_>>>()?;
                    ModelSpec::new(kind, cols)
                })
                .transpose()?;
            let fitted = cmd_fit(&rows, kind, spec.as_ref(), &config)?;
            write_model(&fitted.model, &out)?;
            match report {
                Some(path) => io::write_text(&path, &fitted.report)?,
                None => print!("{}", fitted.report),
            }
        }
        Command::Evaluate {
            model,
            dataset,
            out_dir,
        } => {
            let model = read_model(&model)?;
            let rows = io::read_dataset(&dataset)?;
            let evaluation = cmd_evaluate(&model, &rows, &config)?;
            let tag = model.spec.user_kind.tag();
            io::write_text(
                &out_dir.join(format!("confusion_{tag}.csv")),
                &io::format_confusion(&evaluation.confusion, model.spec.user_kind),
            )?;
            io::write_text(
                &out_dir.join(format!("timelines_{tag}.csv")),
                &io::format_timelines_csv(&evaluation.timelines),
            )?;
            io::write_text(
                &out_dir.join(format!("timelines_{tag}.json")),
                &io::format_timelines_json(&evaluation.timelines)?,
            )?;
            println!(
                "misclassification rate {:.4} on {} test rows",
                evaluation.misclassification_rate, evaluation.n_test
            );
        }
        Command::Synthesize { scenario, mixed, out } => {
            let spec = match (scenario, mixed) {
                (Some(path), _) => ScenarioSpec::load(&path)?,
                (None, Some(n)) => mixed_scene(n, config.seed),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let trajectories = cmd_synthesize(&spec, &config)?;
            io::write_text(&out, &io::format_trajectories(&trajectories))?;
        }
        Command::Pipeline { trajectories, out_dir } => {
            let scene: Scene = io::read_trajectories(&trajectories, config.step)?;
            let output = run_pipeline(&scene, &config)?;
            output.write_to(&out_dir)?;
            print!("{}", output.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
