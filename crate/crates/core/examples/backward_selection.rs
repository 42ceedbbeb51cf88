//! Backward elimination on simulated data with one irrelevant predictor.
//!
//! cargo run --release --example backward_selection

use conflict_choice::mnl::{
    backward_select_traced, simulate_choices, FitOptions, FittedModel, LabeledDataset, ModelSpec, SelectionCriterion,
};
use conflict_choice::predictors::Predictor;
use conflict_choice::report::selection_table;
use conflict_choice::trajectory::UserKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> conflict_choice::Result<()> {
    use Predictor::*;
    // SpeedPed has zero coefficients in both alternatives.
    let spec = ModelSpec::new(UserKind::Vehicle, vec![MinDist, SpeedVeh, AccVeh, SpeedPed])?;
    let truth = FittedModel::from_coefficients(
        spec.clone(),
        (-0.5, vec![-0.8, 0.6, -1.2, 0.0]),
        (-1.0, vec![0.4, -0.7, 1.1, 0.0]),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Normal::new(0.0, 1.0).expect("valid normal");
    let rows: Vec<Vec<f64>> = (0..4000)
        .map(|_| (0..4).map(|_| x.sample(&mut rng)).collect())
        .collect();
    let choices = simulate_choices(&truth, &rows, &mut rng)?;
    let mut data = LabeledDataset::new(spec.predictors.clone());
    for (row, c) in rows.iter().zip(choices) {
        data.push(row, c)?;
    }

    let criterion = SelectionCriterion::default();
    let selection = backward_select_traced(&data, &spec, &criterion, &FitOptions::default())?;
    print!(
        "{}",
        selection_table(&selection.full, &selection.steps, criterion.min_chi2_ratio)
    );
    println!(
        "kept: {}",
        selection
            .spec()
            .predictors
            .iter()
            .map(|p| p.name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}
