//! Maximum-likelihood estimation by damped Newton-Raphson.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::likelihood::{evaluate, null_log_likelihood};
use super::{AlternativeFit, FittedModel, LabeledDataset, ModelSpec};
use crate::error::{Error, Result};
use crate::labeling::Reaction;

/// Utilities beyond this mean fitted probabilities of numerically 0 or 1.
const SEPARATION_UTILITY: f64 = 35.0;
/// Standard errors of standardized coefficients beyond this mean a flat
/// direction of the likelihood.
const SEPARATION_SE: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence threshold on the gradient max-norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Fit on centered and scaled columns, then map back to the original
    /// scale.
    pub standardize: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_iter: 100,
            standardize: false,
        }
    }
}

/// Per-iteration record of a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitTrace {
    /// Log-likelihood at the start and after every accepted step.
    pub log_likelihoods: Vec<f64>,
    pub gradient_norms: Vec<f64>,
    pub newton_steps: usize,
    pub gradient_steps: usize,
}

pub fn fit(data: &LabeledDataset, spec: &ModelSpec, options: &FitOptions) -> Result<FittedModel> {
    fit_traced(data, spec, options).map(|(m, _)| m)
}

struct ColumnStats {
    means: Vec<f64>,
    sds: Vec<f64>,
}

fn column_stats(data: &LabeledDataset) -> ColumnStats {
    let p = data.columns().len();
    let n = data.len() as f64;
    let mut means = vec![0.0; p];
    for (row, _) in data.rows() {
        for j in 0..p {
            means[j] += row[j];
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut sds = vec![0.0; p];
    for (row, _) in data.rows() {
        for j in 0..p {
            sds[j] += (row[j] - means[j]).powi(2);
        }
    }
    sds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    ColumnStats { means, sds }
}

fn check_rank(data: &LabeledDataset, stats: &ColumnStats) -> Result<()> {
    let names = |idx: &mut dyn Iterator<Item = usize>| -> Vec<String> {
        idx.map(|j| data.columns()[j].name().to_string()).collect()
    };
    let p = data.columns().len();
    let constant: Vec<usize> = (0..p)
        .filter(|&j| stats.sds[j] <= 1e-12 * stats.means[j].abs().max(1.0))
        .collect();
    if !constant.is_empty() {
        return Err(Error::DegenerateFit {
            reason: "constant column(s), collinear with the intercept".into(),
            columns: names(&mut constant.into_iter()),
        });
    }
    let mut corr = DMatrix::zeros(p, p);
    for (row, _) in data.rows() {
        for j in 0..p {
            let zj = (row[j] - stats.means[j]) / stats.sds[j];
            for k in j..p {
                corr[(j, k)] += zj * (row[k] - stats.means[k]) / stats.sds[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            corr[(j, k)] = corr[(k, j)];
        }
    }
    corr /= data.len() as f64;
    let eig = SymmetricEigen::new(corr);
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one column");
    let lmax = eig.eigenvalues.max();
    if lmin <= 1e-10 * lmax {
        let v = eig.eigenvectors.column(imin);
        return Err(Error::DegenerateFit {
            reason: "linearly dependent columns".into(),
            columns: names(&mut (0..p).filter(|&j| v[j].abs() > 0.1)),
        });
    }
    Ok(())
}

fn standardized(data: &LabeledDataset, stats: &ColumnStats) -> LabeledDataset {
    let mut out = LabeledDataset::new(data.columns().to_vec());
    let mut buf = vec![0.0; data.columns().len()];
    for (row, y) in data.rows() {
        for (j, v) in row.iter().enumerate() {
            buf[j] = (v - stats.means[j]) / stats.sds[j];
        }
        out.push(&buf, y).expect("finite standardized row");
    }
    out
}

/// Linear map from standardized-scale parameters to original-scale ones.
fn unstandardize_map(stats: &ColumnStats) -> DMatrix<f64> {
    let p = stats.means.len();
    let q = p + 1;
    let mut t = DMatrix::zeros(2 * q, 2 * q);
    for block in 0..2 {
        let o = block * q;
        t[(o, o)] = 1.0;
        for j in 0..p {
            t[(o, o + 1 + j)] = -stats.means[j] / stats.sds[j];
            t[(o + 1 + j, o + 1 + j)] = 1.0 / stats.sds[j];
        }
    }
    t
}

fn separation_error(data: &LabeledDataset, stats: &ColumnStats, theta: &[f64]) -> Error {
    let p = data.columns().len();
    let q = p + 1;
    let scaled: Vec<f64> = (0..p)
        .map(|j| theta[1 + j].abs().max(theta[q + 1 + j].abs()) * stats.sds[j])
        .collect();
    let top = scaled.iter().copied().fold(0.0, f64::max);
    Error::DegenerateFit {
        reason: "separation: fitted probabilities numerically 0 or 1".into(),
        columns: (0..p)
            .filter(|&j| scaled[j] >= 0.5 * top)
            .map(|j| data.columns()[j].name().to_string())
            .collect(),
    }
}

/// Like [`fit`], also returning the iteration record.
pub fn fit_traced(data: &LabeledDataset, spec: &ModelSpec, options: &FitOptions) -> Result<(FittedModel, FitTrace)> {
    let data = data.select(&spec.predictors)?;
    let counts = data.class_counts();
    if let Some(missing) = Reaction::ALL.into_iter().find(|r| counts[r.index()] == 0) {
        return Err(Error::DegenerateFit {
            reason: format!("no observations of class {missing}"),
            columns: Vec::new(),
        });
    }
    let stats = column_stats(&data);
    check_rank(&data, &stats)?;
    let work = if options.standardize {
        standardized(&data, &stats)
    } else {
        data.clone()
    };

    let p = data.columns().len();
    let q = p + 1;
    let n = data.len() as f64;
    let mut theta = vec![0.0; 2 * q];
    theta[0] = (counts[1] as f64 / counts[0] as f64).ln();
    theta[q] = (counts[2] as f64 / counts[0] as f64).ln();

    let mut trace = FitTrace::default();
    let mut current = evaluate(&work, &theta, true);
    trace.log_likelihoods.push(current.log_likelihood);
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let gnorm = current.gradient.amax();
        trace.gradient_norms.push(gnorm);
        if gnorm < options.tol {
            converged = true;
            break;
        }
        if iterations >= options.max_iter {
            break;
        }
        iterations += 1;

        let info = -current.hessian.take().expect("hessian requested");
        let (direction, newton) = match info.cholesky() {
            Some(chol) => (chol.solve(&current.gradient), true),
            None => (current.gradient.clone() / current.gradient.norm().max(1.0), false),
        };
        let slope = current.gradient.dot(&direction);
        let ll = current.log_likelihood;
        let slack = 1e-13 * ll.abs().max(n);

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(direction.iter()).map(|(t, d)| t + step * d).collect();
            let eval = evaluate(&work, &trial, true);
            let improved = eval.log_likelihood >= ll;
            // Full Newton steps in the quadratic regime may lose a few ulps.
            let rounding = newton && step == 1.0 && slope < 1e-8 && eval.log_likelihood >= ll - slack;
            if eval.log_likelihood.is_finite() && (improved || rounding) {
                accepted = Some((trial, eval));
                break;
            }
            step *= 0.5;
        }
        let Some((next, eval)) = accepted else {
            break;
        };
        if newton {
            trace.newton_steps += 1;
        } else {
            trace.gradient_steps += 1;
        }
        theta = next;
        current = eval;
        trace.log_likelihoods.push(current.log_likelihood);
    }

    if !converged {
        if current.max_utility > SEPARATION_UTILITY {
            return Err(separation_error(&work, &column_stats(&work), &theta));
        }
        return Err(Error::NotConverged {
            iterations,
            gradient_norm: current.gradient.amax(),
            log_likelihood: current.log_likelihood,
        });
    }
    let info = -current
        .hessian
        .take()
        .unwrap_or_else(|| evaluate(&work, &theta, true).hessian.expect("hessian requested"));
    let mut covariance = info
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::DegenerateFit {
            reason: "information matrix is singular at the optimum".into(),
            columns: data.columns().iter().map(|c| c.name().to_string()).collect(),
        })?;
    if current.max_utility > SEPARATION_UTILITY {
        // Converged only because the probabilities saturated.
        let work_stats = column_stats(&work);
        let flat = (0..2).any(|b| {
            (0..p).any(|j| {
                let i = b * q + 1 + j;
                covariance[(i, i)].sqrt() * work_stats.sds[j] > SEPARATION_SE
            })
        });
        if flat {
            return Err(separation_error(&work, &work_stats, &theta));
        }
    }
    let mut theta = DVector::from_vec(theta);
    if options.standardize {
        let t = unstandardize_map(&stats);
        theta = &t * theta;
        covariance = &t * covariance * t.transpose();
    }

    let alt = |block: usize| {
        let o = block * q;
        AlternativeFit {
            intercept: theta[o],
            coefficients: (0..p).map(|j| theta[o + 1 + j]).collect(),
            intercept_se: covariance[(o, o)].sqrt(),
            std_errors: (0..p).map(|j| covariance[(o + 1 + j, o + 1 + j)].sqrt()).collect(),
        }
    };
    let model = FittedModel {
        spec: spec.clone(),
        alternatives: [alt(0), alt(1)],
        deviance: -2.0 * current.log_likelihood,
        null_deviance: -2.0 * null_log_likelihood(counts),
        n_obs: data.len(),
        converged,
        iterations,
    };
    Ok((model, trace))
}
