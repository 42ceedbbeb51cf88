//! Drawing outcomes from a fitted or reference model.

use rand::Rng;

use super::FittedModel;
use crate::error::Result;
use crate::labeling::Reaction;

/// Inverse-CDF draw from a probability triple.
pub fn draw_choice<R: Rng + ?Sized>(p: &[f64; 3], rng: &mut R) -> Reaction {
    let u: f64 = rng.random();
    if u < p[0] {
        Reaction::NoReaction
    } else if u < p[0] + p[1] {
        Reaction::Prudent
    } else {
        Reaction::Aggressive
    }
}

/// One draw per row; rows are in the model's predictor order.
pub fn simulate_choices<R: Rng + ?Sized>(model: &FittedModel, rows: &[Vec<f64>], rng: &mut R) -> Result<Vec<Reaction>> {
    rows.iter()
        .map(|r| Ok(draw_choice(&model.predict_row(r)?, rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frequencies_match_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = [0.2, 0.5, 0.3];
        let mut n = [0usize; 3];
        for _ in 0..100_000 {
            n[draw_choice(&p, &mut rng).index()] += 1;
        }
        for k in 0..3 {
            // about 4.5 binomial standard deviations
            assert!((n[k] as f64 / 1e5 - p[k]).abs() < 0.007, "{n:?}");
        }
    }
}
