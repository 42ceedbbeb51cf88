//! Wald z-tests and the likelihood-ratio goodness of fit.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use super::FittedModel;
use crate::labeling::Reaction;
use crate::predictors::Predictor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Intercept,
    Predictor(Predictor),
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Term::Intercept => f.write_str("Intercept"),
            Term::Predictor(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTest {
    pub alternative: Reaction,
    pub term: Term,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    /// Two-sided tail probability under the standard normal.
    pub p: f64,
}

fn z_test(alternative: Reaction, term: Term, estimate: f64, std_error: f64) -> CoefficientTest {
    let z = if estimate == 0.0 { 0.0 } else { estimate / std_error };
    let normal = Normal::standard();
    let p = (2.0 * normal.sf(z.abs())).min(1.0);
    CoefficientTest {
        alternative,
        term,
        estimate,
        std_error,
        z,
        p,
    }
}

/// One test per estimated parameter, prudent block first, intercept first
/// within each block.
pub fn z_tests(model: &FittedModel) -> Vec<CoefficientTest> {
    let mut out = Vec::with_capacity(model.spec.n_params());
    for (alt, class) in model.alternatives.iter().zip([Reaction::Prudent, Reaction::Aggressive]) {
        out.push(z_test(class, Term::Intercept, alt.intercept, alt.intercept_se));
        for ((&p, &b), &se) in model.spec.predictors.iter().zip(&alt.coefficients).zip(&alt.std_errors) {
            out.push(z_test(class, Term::Predictor(p), b, se));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    /// Likelihood-ratio statistic against the intercept-only model.
    pub chi2: f64,
    /// Slope coefficients across both alternatives.
    pub df: usize,
    pub p: f64,
}

pub fn goodness_of_fit(model: &FittedModel) -> GoodnessOfFit {
    let chi2 = (model.null_deviance - model.deviance).max(0.0);
    let df = 2 * model.spec.predictors.len();
    let p = if chi2 == 0.0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .expect("positive degrees of freedom")
            .sf(chi2)
    };
    GoodnessOfFit { chi2, df, p }
}
