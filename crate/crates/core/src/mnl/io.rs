//! Plain-text model files.
//!
//! ```text
//! conflict-choice-model 1
//! user_kind veh
//! predictors MinDist AccVeh
//! n_obs 1200
//! converged true
//! iterations 6
//! deviance 2210.5
//! null_deviance 2634.1
//! alternative Prudent
//! Intercept 0.196 0.05
//! MinDist -0.402 0.06
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a written model
//! gives back identical values (NaN included).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AlternativeFit, FittedModel, ModelSpec};
use crate::error::{Error, Result};
use crate::predictors::Predictor;
use crate::trajectory::UserKind;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "conflict-choice-model";

pub fn format_model(model: &FittedModel) -> String {
    let mut s = String::new();
    let names: Vec<&str> = model.spec.predictors.iter().map(|p| p.name()).collect();
    writeln!(s, "{MAGIC} {MODEL_FORMAT_VERSION}").unwrap();
    writeln!(s, "user_kind {}", model.spec.user_kind.tag()).unwrap();
    writeln!(s, "predictors {}", names.join(" ")).unwrap();
    writeln!(s, "n_obs {}", model.n_obs).unwrap();
    writeln!(s, "converged {}", model.converged).unwrap();
    writeln!(s, "iterations {}", model.iterations).unwrap();
    writeln!(s, "deviance {:?}", model.deviance).unwrap();
    writeln!(s, "null_deviance {:?}", model.null_deviance).unwrap();
    for (alt, label) in model.alternatives.iter().zip(["Prudent", "Aggressive"]) {
        writeln!(s, "alternative {label}").unwrap();
        writeln!(s, "Intercept {:?} {:?}", alt.intercept, alt.intercept_se).unwrap();
        for ((n, b), se) in names.iter().zip(&alt.coefficients).zip(&alt.std_errors) {
            writeln!(s, "{n} {b:?} {se:?}").unwrap();
        }
    }
    s
}

struct Lines<'a> {
    path: PathBuf,
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: u64,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: self.line,
            message: message.into(),
        }
    }

    /// Next non-blank line split on whitespace, checking the leading key.
    fn fields(&mut self, key: &str) -> Result<Vec<&'a str>> {
        loop {
            let Some((i, l)) = self.iter.next() else {
                return Err(self.err(format!("unexpected end of file, expected `{key}`")));
            };
            self.line = i as u64 + 1;
            let mut f: Vec<&str> = l.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if f[0] != key {
                return Err(self.err(format!("expected `{key}`, found `{}`", f[0])));
            }
            f.remove(0);
            return Ok(f);
        }
    }

    fn value<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let f = self.fields(key)?;
        match f.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad value for `{key}`: `{v}`"))),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }

    fn pair(&mut self, key: &str) -> Result<(f64, f64)> {
        let f = self.fields(key)?;
        let parse = |v: &str| v.parse::<f64>().map_err(|_| self.err(format!("bad number `{v}`")));
        match f.as_slice() {
            [a, b] => Ok((parse(a)?, parse(b)?)),
            _ => Err(self.err(format!("`{key}` takes an estimate and a standard error"))),
        }
    }
}

/// Parses a model document; `path` is only used in error messages.
pub fn parse_model(text: &str, path: impl Into<PathBuf>) -> Result<FittedModel> {
    let mut r = Lines {
        path: path.into(),
        iter: text.lines().enumerate(),
        line: 0,
    };
    let version: u32 = r.value(MAGIC)?;
    if version != MODEL_FORMAT_VERSION {
        return Err(r.err(format!("unsupported model format version {version}")));
    }
    let kind: UserKind = r.value("user_kind")?;
    let predictors = r
        .fields("predictors")?
        .iter()
        .map(|n| n.parse::<Predictor>())
        .collect::<Result<Vec<_>>>()
        .map_err(|e| r.err(e.to_string()))?;
    let spec = ModelSpec::new(kind, predictors).map_err(|e| r.err(e.to_string()))?;
    let n_obs = r.value("n_obs")?;
    let converged = r.value("converged")?;
    let iterations = r.value("iterations")?;
    let deviance = r.value("deviance")?;
    let null_deviance = r.value("null_deviance")?;
    let mut alt = |label: &str| -> Result<AlternativeFit> {
        let f = r.fields("alternative")?;
        if f != [label] {
            return Err(r.err(format!("expected alternative {label}")));
        }
        let (intercept, intercept_se) = r.pair("Intercept")?;
        let mut coefficients = Vec::new();
        let mut std_errors = Vec::new();
        for p in &spec.predictors {
            let (b, se) = r.pair(p.name())?;
            coefficients.push(b);
            std_errors.push(se);
        }
        Ok(AlternativeFit {
            intercept,
            coefficients,
            intercept_se,
            std_errors,
        })
    };
    let alternatives = [alt("Prudent")?, alt("Aggressive")?];
    if let Some((i, l)) = r.iter.find(|(_, l)| !l.trim().is_empty()) {
        r.line = i as u64 + 1;
        return Err(r.err(format!("trailing content `{}`", l.trim())));
    }
    Ok(FittedModel {
        spec,
        alternatives,
        deviance,
        null_deviance,
        n_obs,
        converged,
        iterations,
    })
}

pub fn write_model(model: &FittedModel, path: &Path) -> Result<()> {
    std::fs::write(path, format_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<FittedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path)
}
