//! The analysis stages as callable commands, shared by the binary and the
//! examples. Each command returns in-memory artifacts; [`PipelineOutput`]
//! writes them to a directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::config::PipelineConfig;
use crate::conflict::{
    detect_conflict_instants, group_conflicts, CiKey, ConflictInstant, ConflictSituation, Detection,
};
use crate::dataset::{build_dataset, to_labeled, DatasetRow, ReactionDataset};
use crate::error::{Error, Result};
use crate::evaluation::{confusion, split_groups, split_indices, timeline, ConfusionMatrix, SituationTimeline};
use crate::io;
use crate::mnl::{backward_select_traced, fit, format_model, FittedModel, ModelSpec, SelectionStep};
use crate::predictors::Predictor;
use crate::report::{coefficient_table, selection_table};
use crate::synth::{synthesize, ScenarioSpec};
use crate::trajectory::{Scene, Trajectory, UserKind};

pub fn cmd_detect(scene: &Scene, config: &PipelineConfig) -> Result<Detection> {
    config.validate()?;
    detect_conflict_instants(scene.trajectories(), config.threshold, &config.path_predictor())
}

pub fn cmd_build_dataset(scene: &Scene, cis: &[ConflictInstant], config: &PipelineConfig) -> Result<ReactionDataset> {
    config.validate()?;
    build_dataset(cis, scene, &config.predictor_settings(), &config.label_settings())
}

pub fn cmd_synthesize(spec: &ScenarioSpec, config: &PipelineConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    synthesize(spec, config.step)
}

/// Situation number of every row: rows of the same pedestrian-vehicle pair
/// separated by at most `group_gap` steps share one.
pub fn situation_ids(rows: &[DatasetRow], group_gap: i64) -> Vec<usize> {
    let situations = situations_of(rows, group_gap);
    let mut id = BTreeMap::new();
    for (n, s) in situations.iter().enumerate() {
        for ci in &s.instants {
            id.insert(ci.key(), n);
        }
    }
    rows.iter().map(|r| id[&r.key]).collect()
}

fn situations_of(rows: &[DatasetRow], group_gap: i64) -> Vec<ConflictSituation> {
    let cis: Vec<ConflictInstant> = rows
        .iter()
        .map(|r| ConflictInstant {
            ts: r.key.ts,
            ped_id: r.key.ped_id.clone(),
            veh_id: r.key.veh_id.clone(),
            min_dist: r.predictors.min_dist,
            time_min_dist: r.predictors.time_min_dist,
        })
        .collect();
    group_conflicts(&cis, group_gap)
}

/// Train and test row indices under the configured split.
pub fn split_rows(rows: &[DatasetRow], config: &PipelineConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    if config.split_by_situation {
        split_groups(
            &situation_ids(rows, config.group_gap),
            config.train_fraction,
            config.seed,
        )
    } else {
        split_indices(rows.len(), config.train_fraction, config.seed)
    }
}

fn pick(rows: &[DatasetRow], idx: &[usize]) -> Vec<DatasetRow> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutput {
    pub model: FittedModel,
    /// Candidate columns left out because they are constant in the training
    /// rows.
    pub constant_columns: Vec<Predictor>,
    pub full: Option<FittedModel>,
    pub steps: Vec<SelectionStep>,
    pub n_train: usize,
    pub report: String,
}

/// Fits the model of `kind` on the training part of `rows`. Without an
/// explicit `spec` the full variable set is used, minus columns that are
/// constant in training, followed by backward selection when enabled.
pub fn cmd_fit(
    rows: &[DatasetRow],
    kind: UserKind,
    spec: Option<&ModelSpec>,
    config: &PipelineConfig,
) -> Result<FitOutput> {
    config.validate()?;
    if let Some(r) = rows.iter().find(|r| r.user_kind != kind) {
        return Err(Error::Schema(format!(
            "dataset row ({}, {}, {}) is for {}, expected {kind}",
            r.key.ts, r.key.ped_id, r.key.veh_id, r.user_kind
        )));
    }
    let (train_idx, _) = split_rows(rows, config)?;
    let train = pick(rows, &train_idx);

    let mut constant_columns = Vec::new();
    let candidate = match spec {
        Some(s) => {
            if s.user_kind != kind {
                return Err(Error::Schema(format!(
                    "model spec is for {}, data for {kind}",
                    s.user_kind
                )));
            }
            s.clone()
        }
        None => {
            let full = ModelSpec::full(kind);
            let varying: Vec<Predictor> = full
                .predictors
                .iter()
                .copied()
                .filter(|&p| {
                    let first = train.first().map(|r| r.predictors.get(p));
                    let varies = train.iter().any(|r| Some(r.predictors.get(p)) != first);
                    if !varies {
                        constant_columns.push(p);
                    }
                    varies
                })
                .collect();
            ModelSpec::new(kind, varying)?
        }
    };
    let data = to_labeled(&train, &candidate.predictors);
    let options = config.fit_options();

    let (model, full, steps) = if spec.is_none() && config.backward_selection {
        let sel = backward_select_traced(&data, &candidate, &config.selection_criterion(), &options)?;
        (sel.selected, Some(sel.full), sel.steps)
    } else {
        (fit(&data, &candidate, &options)?, None, Vec::new())
    };

    let mut report = String::new();
    if !constant_columns.is_empty() {
        let names: Vec<&str> = constant_columns.iter().map(|p| p.name()).collect();
        writeln!(report, "Constant in training data, left out: {}\n", names.join(", ")).unwrap();
    }
    if let Some(full) = &full {
        report.push_str(&coefficient_table(full, "full model"));
        report.push('\n');
        report.push_str(&selection_table(full, &steps, config.selection_ratio));
        report.push('\n');
    }
    report.push_str(&coefficient_table(&model, "calibrated on the training split"));
    report.push_str("\n# Resolved configuration\n");
    for line in config.to_toml().lines() {
        writeln!(report, "# {line}").unwrap();
    }

    Ok(FitOutput {
        model,
        constant_columns,
        full,
        steps,
        n_train: train.len(),
        report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutput {
    pub confusion: ConfusionMatrix,
    pub misclassification_rate: f64,
    pub n_test: usize,
    /// One per conflict situation of the dataset.
    pub timelines: Vec<SituationTimeline>,
}

/// Confusion matrix on the test part of `rows` (the complement of the split
/// used by [`cmd_fit`]) and timelines over all rows.
pub fn cmd_evaluate(model: &FittedModel, rows: &[DatasetRow], config: &PipelineConfig) -> Result<EvaluateOutput> {
    config.validate()?;
    if let Some(r) = rows.iter().find(|r| r.user_kind != model.spec.user_kind) {
        return Err(Error::Schema(format!(
            "model is for {} but the dataset has {} rows",
            model.spec.user_kind, r.user_kind
        )));
    }
    let (_, test_idx) = split_rows(rows, config)?;
    let test = pick(rows, &test_idx);
    let cm = confusion(model, &to_labeled(&test, &model.spec.predictors))?;
    let rate = cm.misclassification_rate()?;

    let by_key: BTreeMap<CiKey, &DatasetRow> = rows.iter().map(|r| (r.key.clone(), r)).collect();
    let timelines = situations_of(rows, config.group_gap)
        .iter()
        .map(|s| timeline(model, s, &by_key, config.step))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluateOutput {
        confusion: cm,
        misclassification_rate: rate,
        n_test: test.len(),
        timelines,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KindOutput {
    pub kind: UserKind,
    pub fit: FitOutput,
    pub evaluation: EvaluateOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub config: PipelineConfig,
    pub detection: Detection,
    pub dataset: ReactionDataset,
    pub pedestrian: KindOutput,
    pub vehicle: KindOutput,
}

impl PipelineOutput {
    pub fn kind(&self, kind: UserKind) -> &KindOutput {
        match kind {
            UserKind::Pedestrian => &self.pedestrian,
            UserKind::Vehicle => &self.vehicle,
        }
    }

    /// File name and contents of every artifact.
    pub fn artifacts(&self) -> Result<Vec<(String, String)>> {
        let step = self.config.step;
        let mut files = vec![
            ("config.toml".to_string(), self.config.to_toml()),
            (
                "conflicts.csv".to_string(),
                io::format_conflicts(&self.detection.instants, step),
            ),
        ];
        for k in [&self.pedestrian, &self.vehicle] {
            let tag = k.kind.tag();
            files.push((
                format!("dataset_{tag}.csv"),
                io::format_dataset(self.dataset.rows(k.kind), step),
            ));
            files.push((format!("model_{tag}.txt"), format_model(&k.fit.model)));
            files.push((format!("report_{tag}.txt"), k.fit.report.clone()));
            files.push((
                format!("confusion_{tag}.csv"),
                io::format_confusion(&k.evaluation.confusion, k.kind),
            ));
            files.push((
                format!("timelines_{tag}.csv"),
                io::format_timelines_csv(&k.evaluation.timelines),
            ));
            files.push((
                format!("timelines_{tag}.json"),
                io::format_timelines_json(&k.evaluation.timelines)?,
            ));
        }
        files.push(("summary.txt".to_string(), self.summary()));
        Ok(files)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let d = &self.detection;
        writeln!(s, "conflict instants: {}", d.instants.len()).unwrap();
        writeln!(
            s,
            "pairs scanned: {} (skipped for short history: {})",
            d.pairs_scanned, d.pairs_skipped
        )
        .unwrap();
        writeln!(
            s,
            "dropped, predictors unavailable: {}",
            self.dataset.dropped_predictors
        )
        .unwrap();
        writeln!(s, "dropped, no crossing: {}", self.dataset.dropped_no_crossing).unwrap();
        writeln!(s, "dropped, track too short: {}", self.dataset.dropped_insufficient).unwrap();
        for k in [&self.pedestrian, &self.vehicle] {
            let e = &k.evaluation;
            writeln!(
                s,
                "{}: rows {}, train {}, test {}, misclassification {:.4}, predictors {}",
                k.kind,
                self.dataset.rows(k.kind).len(),
                k.fit.n_train,
                e.n_test,
                e.misclassification_rate,
                k.fit
                    .model
                    .spec
                    .predictors
                    .iter()
                    .map(|p| p.name())
                    .collect::<Vec<_>>()
                    .join(" ")
            )
            .unwrap();
        }
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (name, text) in self.artifacts()? {
            io::write_text(&dir.join(name), &text)?;
        }
        Ok(())
    }
}

/// Detection, dataset construction, fitting and evaluation for both user
/// kinds.
pub fn run_pipeline(scene: &Scene, config: &PipelineConfig) -> Result<PipelineOutput> {
    let detection = cmd_detect(scene, config)?;
    let dataset = cmd_build_dataset(scene, &detection.instants, config)?;
    let run = |kind: UserKind| -> Result<KindOutput> {
        let rows = dataset.rows(kind);
        if rows.is_empty() {
            return Err(Error::InsufficientData(format!("no labeled {kind} rows")));
        }
        let fit = cmd_fit(rows, kind, None, config)?;
        let evaluation = cmd_evaluate(&fit.model, rows, config)?;
        Ok(KindOutput { kind, fit, evaluation })
    };
    Ok(PipelineOutput {
        config: config.clone(),
        pedestrian: run(UserKind::Pedestrian)?,
        vehicle: run(UserKind::Vehicle)?,
        detection,
        dataset,
    })
}
