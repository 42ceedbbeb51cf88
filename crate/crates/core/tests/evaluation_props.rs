use conflict_choice::evaluation::{confusion, misclassification_rate, split, ConfusionMatrix};
use conflict_choice::mnl::{fit, simulate_choices, FitOptions, FittedModel, LabeledDataset, ModelSpec};
use conflict_choice::predictors::Predictor;
use conflict_choice::trajectory::UserKind;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn data(n: usize, seed: u64) -> (FittedModel, LabeledDataset) {
    use Predictor::*;
    let spec = ModelSpec::new(UserKind::Vehicle, vec![MinDist, SpeedVeh, AccPed]).unwrap();
    let truth =
        FittedModel::from_coefficients(spec, (-0.2, vec![-0.9, 0.4, 1.5]), (0.1, vec![0.6, -1.1, -0.8])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Normal::new(0.0, 1.5).unwrap();
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| x.sample(&mut rng)).collect()).collect();
    let outcomes = simulate_choices(&truth, &rows, &mut rng).unwrap();
    let mut d = LabeledDataset::new(truth.spec.predictors.clone());
    for (r, c) in rows.iter().zip(outcomes) {
        d.push(r, c).unwrap();
    }
    (truth, d)
}

proptest! {
    #[test]
    fn rate_is_a_fraction(counts in prop::array::uniform3(prop::array::uniform3(0u64..1000))) {
        let cm = ConfusionMatrix::from_counts(counts);
        prop_assume!(cm.total() > 0);
        let r = misclassification_rate(&cm).unwrap();
        prop_assert!((0.0..=1.0).contains(&r));
        let off_diagonal = (0..3).any(|i| (0..3).any(|j| i != j && counts[i][j] > 0));
        prop_assert_eq!(r == 0.0, !off_diagonal);
    }

    #[test]
    fn rescaled_column_changes_nothing(seed in 0u64..500, column in 0usize..3, c in 0.01..100.0f64) {
        let (truth, test) = data(300, seed);
        let name = truth.spec.predictors[column];
        let mut scaled_model = truth.clone();
        for alt in &mut scaled_model.alternatives {
            alt.coefficients[column] /= c;
        }
        let mut scaled = test.clone();
        scaled.scale_column(name, c).unwrap();
        for i in 0..test.len() {
            let a = truth.predict_row(test.row(i)).unwrap();
            let b = scaled_model.predict_row(scaled.row(i)).unwrap();
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
        prop_assert_eq!(confusion(&truth, &test).unwrap(), confusion(&scaled_model, &scaled).unwrap());
    }
}

#[test]
fn row_order_does_not_matter() {
    let (_, all) = data(3000, 1);
    let (train, test) = split(&all, 0.7, 3).unwrap();
    let model = fit(&train, &train_spec(&train), &FitOptions::default()).unwrap();
    let base = confusion(&model, &test).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let mut order: Vec<usize> = (0..test.len()).collect();
        order.shuffle(&mut rng);
        let shuffled = confusion(&model, &test.subset(&order)).unwrap();
        assert_eq!(shuffled, base);
        assert_eq!(shuffled.observed_totals(), base.observed_totals());
        assert_eq!(shuffled.predicted_totals(), base.predicted_totals());
    }
}

fn train_spec(d: &LabeledDataset) -> ModelSpec {
    ModelSpec::new(UserKind::Vehicle, d.columns().to_vec()).unwrap()
}

#[test]
fn split_is_seeded_and_complete() {
    let (_, all) = data(1000, 2);
    let (a, b) = split(&all, 0.7, 11).unwrap();
    let (c, d) = split(&all, 0.7, 11).unwrap();
    assert_eq!(a, c);
    assert_eq!(b, d);
    assert_eq!(a.len() + b.len(), all.len());
    assert_eq!(a.len(), 700);
    let (e, _) = split(&all, 0.7, 12).unwrap();
    assert_ne!(a, e);
}
