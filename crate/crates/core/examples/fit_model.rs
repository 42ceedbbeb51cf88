//! Draws reactions from the calibrated vehicle model, refits it and prints
//! the coefficient table.
//!
//! cargo run --release --example fit_model -- [rows] [seed]

use conflict_choice::mnl::{fit, reference, simulate_choices, FitOptions, LabeledDataset};
use conflict_choice::report::coefficient_table;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> conflict_choice::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let truth = reference::vehicle_model();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Normal::new(0.0, 1.0).expect("valid normal");
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| truth.spec.predictors.iter().map(|_| x.sample(&mut rng)).collect())
        .collect();
    let choices = simulate_choices(&truth, &rows, &mut rng)?;

    let mut data = LabeledDataset::new(truth.spec.predictors.clone());
    for (row, choice) in rows.iter().zip(choices) {
        data.push(row, choice)?;
    }
    let model = fit(&data, &truth.spec, &FitOptions::default())?;
    print!(
        "{}",
        coefficient_table(&model, "Vehicle model refitted on simulated reactions")
    );

    println!("\n{:<16} {:>9} {:>9}", "term", "true", "estimate");
    for (block, name) in [(0, "DEC"), (1, "ACC")] {
        let (t, e) = (&truth.alternatives[block], &model.alternatives[block]);
        println!(
            "{:<16} {:>9.3} {:>9.3}",
            format!("{name} const"),
            t.intercept,
            e.intercept
        );
        for (j, p) in truth.spec.predictors.iter().enumerate() {
            println!(
                "{:<16} {:>9.3} {:>9.3}",
                format!("{name} {}", p.name()),
                t.coefficients[j],
                e.coefficients[j]
            );
        }
    }
    Ok(())
}
