use nalgebra::{DMatrix, DVector};

use super::LabeledDataset;
use crate::labeling::Reaction;

/// Log-likelihood with its derivatives at one parameter vector.
pub(crate) struct Evaluation {
    pub log_likelihood: f64,
    pub gradient: DVector<f64>,
    /// Hessian of the log-likelihood (negative semidefinite).
    pub hessian: Option<DMatrix<f64>>,
    /// Largest absolute non-baseline utility over the rows.
    pub max_utility: f64,
}

fn log_sum_exp(u1: f64, u2: f64) -> f64 {
    let m = 0f64.max(u1).max(u2);
    m + ((-m).exp() + (u1 - m).exp() + (u2 - m).exp()).ln()
}

/// Evaluates the multinomial log-likelihood. Rows are accumulated in order,
/// so results are bit-reproducible for a given dataset.
pub(crate) fn evaluate(data: &LabeledDataset, theta: &[f64], with_hessian: bool) -> Evaluation {
    let p = data.columns().len();
    let q = p + 1;
    assert_eq!(theta.len(), 2 * q, "parameter vector length");
    let (t1, t2) = theta.split_at(q);

    let mut ll = 0.0;
    let mut grad = DVector::zeros(2 * q);
    let mut a11 = DMatrix::<f64>::zeros(q, q);
    let mut a22 = DMatrix::<f64>::zeros(q, q);
    let mut a12 = DMatrix::<f64>::zeros(q, q);
    let mut max_utility = 0f64;
    let mut xt = vec![1.0; q];

    for (row, y) in data.rows() {
        xt[1..].copy_from_slice(row);
        let u1: f64 = t1.iter().zip(&xt).map(|(b, x)| b * x).sum();
        let u2: f64 = t2.iter().zip(&xt).map(|(b, x)| b * x).sum();
        max_utility = max_utility.max(u1.abs()).max(u2.abs());
        let lse = log_sum_exp(u1, u2);
        ll += match y {
            Reaction::NoReaction => 0.0,
            Reaction::Prudent => u1,
            Reaction::Aggressive => u2,
        } - lse;
        let m1 = (u1 - lse).exp();
        let m2 = (u2 - lse).exp();
        let r1 = f64::from(u8::from(y == Reaction::Prudent)) - m1;
        let r2 = f64::from(u8::from(y == Reaction::Aggressive)) - m2;
        for j in 0..q {
            grad[j] += r1 * xt[j];
            grad[q + j] += r2 * xt[j];
        }
        if with_hessian {
            let (w11, w22, w12) = (m1 * (1.0 - m1), m2 * (1.0 - m2), -m1 * m2);
            for j in 0..q {
                for k in j..q {
                    let xx = xt[j] * xt[k];
                    a11[(j, k)] += w11 * xx;
                    a22[(j, k)] += w22 * xx;
                    a12[(j, k)] += w12 * xx;
                }
            }
        }
    }

    let hessian = with_hessian.then(|| {
        let mut h = DMatrix::zeros(2 * q, 2 * q);
        for j in 0..q {
            for k in j..q {
                h[(j, k)] = -a11[(j, k)];
                h[(k, j)] = -a11[(j, k)];
                h[(q + j, q + k)] = -a22[(j, k)];
                h[(q + k, q + j)] = -a22[(j, k)];
                h[(j, q + k)] = -a12[(j, k)];
                h[(q + k, j)] = -a12[(j, k)];
                h[(k, q + j)] = -a12[(j, k)];
                h[(q + j, k)] = -a12[(j, k)];
            }
        }
        h
    });

    Evaluation {
        log_likelihood: ll,
        gradient: grad,
        hessian,
        max_utility,
    }
}

/// Log-likelihood at `theta = [a_p, b_p.., a_g, b_g..]`.
pub fn log_likelihood(data: &LabeledDataset, theta: &[f64]) -> f64 {
    evaluate(data, theta, false).log_likelihood
}

/// Analytic gradient of [`log_likelihood`].
pub fn log_likelihood_gradient(data: &LabeledDataset, theta: &[f64]) -> Vec<f64> {
    evaluate(data, theta, false).gradient.iter().copied().collect()
}

/// Log-likelihood of the intercept-only model, in closed form.
pub(crate) fn null_log_likelihood(counts: [usize; 3]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64 / n as f64).ln())
        .sum()
}
