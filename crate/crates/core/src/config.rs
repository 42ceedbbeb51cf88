//! Pipeline configuration: a versioned TOML document where every key is
//! optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conflict::PathPredictor;
use crate::error::{Error, Result};
use crate::labeling::LabelSettings;
use crate::mnl::{FitOptions, SelectionCriterion};
use crate::predictors::{CarAheadMode, CarAheadRule, PredictorSettings};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    /// Tracking step, seconds.
    pub step: f64,
    /// Prediction horizon, seconds.
    pub horizon: f64,
    /// Observed points used for each prediction.
    pub history: usize,
    /// Spacing of predicted samples, seconds.
    pub sub_grid: f64,
    /// Conflict distance threshold, meters.
    pub threshold: f64,
    /// Largest step gap inside one conflict situation.
    pub group_gap: i64,
    /// Steps between conflict and decision.
    pub reaction_delay: usize,
    /// Reaction threshold on k, seconds.
    pub k_threshold: f64,
    /// How far the labeling curves are followed looking for a crossing.
    pub label_horizon: f64,
    pub car_ahead_mode: CarAheadMode,
    pub car_ahead_range: f64,
    pub car_ahead_lateral: f64,
    /// TimeDelayXP when the predicted paths never cross.
    pub no_crossing_delay: f64,
    pub prediction_smoothing: f64,
    pub labeling_smoothing: f64,
    pub train_fraction: f64,
    pub seed: u64,
    /// Split by conflict situation instead of by row.
    pub split_by_situation: bool,
    pub mle_tol: f64,
    pub mle_max_iter: usize,
    pub standardize: bool,
    pub backward_selection: bool,
    pub selection_ratio: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let rule = CarAheadRule::default();
        PipelineConfig {
            version: CONFIG_VERSION,
            step: 0.5,
            horizon: 8.0,
            history: 4,
            sub_grid: 0.1,
            threshold: 5.0,
            group_gap: 2,
            reaction_delay: 3,
            k_threshold: 0.25,
            label_horizon: LabelSettings::default().horizon,
            car_ahead_mode: rule.mode,
            car_ahead_range: rule.range,
            car_ahead_lateral: rule.lateral,
            no_crossing_delay: 0.0,
            prediction_smoothing: 0.0,
            labeling_smoothing: 1e-3,
            train_fraction: 0.7,
            seed: 0,
            split_by_situation: false,
            mle_tol: 1e-8,
            mle_max_iter: 100,
            standardize: false,
            backward_selection: true,
            selection_ratio: SelectionCriterion::default().min_chi2_ratio,
        }
    }
}

fn config_error(message: impl Into<String>) -> Error {
    Error::InvalidInput(format!("config: {}", message.into()))
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| config_error(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Defaults, then the file, then each assignment in order.
    pub fn resolve(file: Option<&Path>, assignments: &[String]) -> Result<Self> {
        let mut config = match file {
            Some(path) => Self::load(path)?,
            None => Self::default(),
        };
        for a in assignments {
            config.set(a)?;
        }
        Ok(config)
    }

    /// Applies `key=value`, where the value is read as a TOML literal (bare
    /// words are taken as strings).
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| config_error(format!("expected key=value, got `{assignment}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let mut table = toml::Table::try_from(&*self).expect("config serializes");
        if !table.contains_key(key) {
            return Err(config_error(format!("unknown key `{key}`")));
        }
        table.insert(key.to_string(), parsed);
        let updated: PipelineConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| config_error(format!("{key}: {}", e.message())))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(config_error(format!("unsupported version {}", self.version)));
        }
        let positive = [
            ("step", self.step),
            ("horizon", self.horizon),
            ("sub_grid", self.sub_grid),
            ("threshold", self.threshold),
            ("k_threshold", self.k_threshold),
            ("label_horizon", self.label_horizon),
            ("car_ahead_range", self.car_ahead_range),
            ("car_ahead_lateral", self.car_ahead_lateral),
            ("mle_tol", self.mle_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(config_error(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("prediction_smoothing", self.prediction_smoothing),
            ("labeling_smoothing", self.labeling_smoothing),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_error(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.history < 2 {
            return Err(config_error("history needs at least 2 points"));
        }
        if self.reaction_delay == 0 || self.mle_max_iter == 0 || self.group_gap < 1 {
            return Err(config_error(
                "reaction_delay, group_gap and mle_max_iter must be positive",
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(config_error(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.selection_ratio > 0.0 && self.selection_ratio <= 1.0) {
            return Err(config_error(format!(
                "selection_ratio must lie in (0, 1], got {}",
                self.selection_ratio
            )));
        }
        if !self.no_crossing_delay.is_finite() {
            return Err(config_error("no_crossing_delay must be finite"));
        }
        Ok(())
    }

    pub fn path_predictor(&self) -> PathPredictor {
        PathPredictor {
            horizon: self.horizon,
            history: self.history,
            sub_grid: self.sub_grid,
            smoothing: self.prediction_smoothing,
        }
    }

    pub fn predictor_settings(&self) -> PredictorSettings {
        PredictorSettings {
            predictor: self.path_predictor(),
            car_ahead: CarAheadRule {
                mode: self.car_ahead_mode,
                range: self.car_ahead_range,
                lateral: self.car_ahead_lateral,
            },
            no_crossing_delay: self.no_crossing_delay,
        }
    }

    pub fn label_settings(&self) -> LabelSettings {
        LabelSettings {
            reaction_delay: self.reaction_delay,
            threshold: self.k_threshold,
            smoothing: self.labeling_smoothing,
            horizon: self.label_horizon,
            sub_grid: self.sub_grid,
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            tol: self.mle_tol,
            max_iter: self.mle_max_iter,
            standardize: self.standardize,
        }
    }

    pub fn selection_criterion(&self) -> SelectionCriterion {
        SelectionCriterion {
            min_chi2_ratio: self.selection_ratio,
        }
    }
}
