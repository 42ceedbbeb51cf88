//! CSV and JSON files exchanged between pipeline stages. Every table has a
//! header row; floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Writer};

use crate::conflict::{CiKey, ConflictInstant};
use crate::dataset::DatasetRow;
use crate::error::{Error, Result};
use crate::evaluation::{ConfusionMatrix, SituationTimeline};
use crate::labeling::Reaction;
use crate::predictors::{Predictor, PredictorVector};
use crate::trajectory::{Scene, TrackPoint, Trajectory, UserKind};

pub const TRAJECTORY_HEADER: [&str; 5] = ["user_id", "kind", "t", "x", "y"];
pub const CI_HEADER: [&str; 6] = ["ts", "t", "ped_id", "veh_id", "min_dist", "time_min_dist"];

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Rows of a headed CSV document with 1-based line numbers, after checking
/// that every `required` column is present.
struct Table {
    path: PathBuf,
    columns: BTreeMap<String, usize>,
    rows: Vec<(u64, StringRecord)>,
}

impl Table {
    fn read(text: &str, path: &Path, required: &[&str]) -> Result<Table> {
        let mut reader = ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        let columns: BTreeMap<String, usize> = header.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        let missing: Vec<&str> = required.iter().copied().filter(|c| !columns.contains_key(*c)).collect();
        if !missing.is_empty() {
            return Err(Error::Schema(format!(
                "{}: missing column(s) {}",
                path.display(),
                missing.join(", ")
            )));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Table {
            path: path.to_path_buf(),
            columns,
            rows,
        })
    }

    fn err(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }

    fn field<'r>(&self, (line, rec): &'r (u64, StringRecord), column: &str) -> Result<&'r str> {
        rec.get(self.columns[column])
            .ok_or_else(|| self.err(*line, format!("missing value for `{column}`")))
    }

    fn parse<T: std::str::FromStr>(&self, row: &(u64, StringRecord), column: &str) -> Result<T> {
        let v = self.field(row, column)?;
        v.parse()
            .map_err(|_| self.err(row.0, format!("bad value `{v}` for `{column}`")))
    }

    fn number(&self, row: &(u64, StringRecord), column: &str) -> Result<f64> {
        let v: f64 = self.parse(row, column)?;
        if !v.is_finite() {
            return Err(self.err(row.0, format!("non-finite `{column}`")));
        }
        Ok(v)
    }
}

fn writer() -> Writer<Vec<u8>> {
    Writer::from_writer(Vec::new())
}

fn finish(w: Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// Parses a trajectory table. Rows of one user must share a kind and have
/// increasing times spaced by `step`. Users are ordered by id.
pub fn parse_trajectories(text: &str, path: &Path, step: f64) -> Result<Scene> {
    let table = Table::read(text, path, &TRAJECTORY_HEADER)?;
    let mut users: BTreeMap<String, (UserKind, u64, Vec<TrackPoint>)> = BTreeMap::new();
    for row in &table.rows {
        let id = table.field(row, "user_id")?;
        if id.is_empty() {
            return Err(table.err(row.0, "empty user_id"));
        }
        let kind: UserKind = table.parse(row, "kind")?;
        let p = TrackPoint::new(
            table.number(row, "t")?,
            table.number(row, "x")?,
            table.number(row, "y")?,
        );
        let entry = users.entry(id.to_string()).or_insert((kind, row.0, Vec::new()));
        if entry.0 != kind {
            return Err(table.err(row.0, format!("user `{id}` changes kind from {} to {kind}", entry.0)));
        }
        if let Some(prev) = entry.2.last() {
            if p.t <= prev.t {
                return Err(table.err(row.0, format!("rows of `{id}` are not sorted by t")));
            }
        }
        entry.2.push(p);
    }
    let trajectories = users
        .into_iter()
        .map(|(id, (kind, line, points))| {
            Trajectory::new(id, kind, step, points).map_err(|e| table.err(line, e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Scene::new(trajectories)
}

pub fn read_trajectories(path: &Path, step: f64) -> Result<Scene> {
    parse_trajectories(&read_text(path)?, path, step)
}

pub fn format_trajectories(trajectories: &[Trajectory]) -> String {
    let mut w = writer();
    w.write_record(TRAJECTORY_HEADER).expect("in-memory write");
    for tr in trajectories {
        for p in tr.points() {
            w.write_record([
                tr.user_id().to_string(),
                tr.kind().tag().to_string(),
                p.t.to_string(),
                p.x.to_string(),
                p.y.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn format_conflicts(cis: &[ConflictInstant], step: f64) -> String {
    let mut w = writer();
    w.write_record(CI_HEADER).expect("in-memory write");
    for ci in cis {
        w.write_record([
            ci.ts.to_string(),
            (ci.ts as f64 * step).to_string(),
            ci.ped_id.clone(),
            ci.veh_id.clone(),
            ci.min_dist.to_string(),
            ci.time_min_dist.to_string(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn parse_conflicts(text: &str, path: &Path) -> Result<Vec<ConflictInstant>> {
    let table = Table::read(text, path, &["ts", "ped_id", "veh_id", "min_dist", "time_min_dist"])?;
    table
        .rows
        .iter()
        .map(|row| {
            Ok(ConflictInstant {
                ts: table.parse(row, "ts")?,
                ped_id: table.field(row, "ped_id")?.to_string(),
                veh_id: table.field(row, "veh_id")?.to_string(),
                min_dist: table.number(row, "min_dist")?,
                time_min_dist: table.number(row, "time_min_dist")?,
            })
        })
        .collect()
}

pub fn read_conflicts(path: &Path) -> Result<Vec<ConflictInstant>> {
    parse_conflicts(&read_text(path)?, path)
}

fn dataset_header() -> Vec<&'static str> {
    let mut h = vec!["ts", "t", "ped_id", "veh_id", "user_kind"];
    h.extend(Predictor::ALL.iter().map(|p| p.name()));
    h.extend(["k", "class"]);
    h
}

fn predictor_field(v: &PredictorVector, p: Predictor) -> String {
    match p {
        Predictor::CPConfNr => v.cp_conf_nr.to_string(),
        Predictor::PCConfNr => v.pc_conf_nr.to_string(),
        Predictor::CarAhead => u8::from(v.car_ahead).to_string(),
        _ => v.get(p).to_string(),
    }
}

/// One user kind's rows: key columns, every predictor, k and the class code.
pub fn format_dataset(rows: &[DatasetRow], step: f64) -> String {
    let mut w = writer();
    w.write_record(dataset_header()).expect("in-memory write");
    for r in rows {
        let mut rec = vec![
            r.key.ts.to_string(),
            (r.key.ts as f64 * step).to_string(),
            r.key.ped_id.clone(),
            r.key.veh_id.clone(),
            r.user_kind.tag().to_string(),
        ];
        rec.extend(Predictor::ALL.iter().map(|&p| predictor_field(&r.predictors, p)));
        rec.push(r.k.to_string());
        rec.push(r.class.code(r.user_kind).to_string());
        w.write_record(rec).expect("in-memory write");
    }
    finish(w)
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<Vec<DatasetRow>> {
    let header = dataset_header();
    let required: Vec<&str> = header.iter().copied().filter(|h| *h != "t").collect();
    let table = Table::read(text, path, &required)?;
    table
        .rows
        .iter()
        .map(|row| {
            let mut predictors = PredictorVector::default();
            for p in Predictor::ALL {
                let v = table.number(row, p.name())?;
                let integral = matches!(p, Predictor::CPConfNr | Predictor::PCConfNr | Predictor::CarAhead);
                if integral && (v < 0.0 || v.fract() != 0.0 || (p == Predictor::CarAhead && v > 1.0)) {
                    return Err(table.err(row.0, format!("bad value {v} for `{p}`")));
                }
                predictors.set(p, v);
            }
            Ok(DatasetRow {
                key: CiKey {
                    ts: table.parse(row, "ts")?,
                    ped_id: table.field(row, "ped_id")?.to_string(),
                    veh_id: table.field(row, "veh_id")?.to_string(),
                },
                user_kind: table.parse(row, "user_kind")?,
                predictors,
                k: table.number(row, "k")?,
                class: table.parse::<Reaction>(row, "class")?,
            })
        })
        .collect()
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    parse_dataset(&read_text(path)?, path)
}

/// Observed classes in rows, predicted classes in columns.
pub fn format_confusion(cm: &ConfusionMatrix, kind: UserKind) -> String {
    let mut w = writer();
    let mut header = vec!["observed".to_string()];
    header.extend(Reaction::ALL.iter().map(|r| r.code(kind).to_string()));
    w.write_record(&header).expect("in-memory write");
    for r in Reaction::ALL {
        let mut rec = vec![r.code(kind).to_string()];
        rec.extend(cm.counts[r.index()].iter().map(|c| c.to_string()));
        w.write_record(rec).expect("in-memory write");
    }
    finish(w)
}

pub fn format_timelines_csv(timelines: &[SituationTimeline]) -> String {
    let mut w = writer();
    w.write_record([
        "ped_id",
        "veh_id",
        "user_kind",
        "ts",
        "t",
        "p_NR",
        "p_PR",
        "p_AG",
        "observed",
        "k",
    ])
    .expect("in-memory write");
    for tl in timelines {
        for p in &tl.series {
            w.write_record([
                tl.ped_id.clone(),
                tl.veh_id.clone(),
                tl.user_kind.tag().to_string(),
                p.ts.to_string(),
                p.t.to_string(),
                p.p_nr.to_string(),
                p.p_pr.to_string(),
                p.p_ag.to_string(),
                p.observed.code(tl.user_kind).to_string(),
                p.k.to_string(),
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn format_timelines_json(timelines: &[SituationTimeline]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(timelines)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("in.csv")
    }

    #[test]
    fn trajectory_round_trip() {
        let text = "user_id,kind,t,x,y\nv,veh,0,0,0\np,ped,0.5,1,2\nv,veh,0.5,1.5,0\np,ped,1,1,2.7\n";
        let scene = parse_trajectories(text, p(), 0.5).unwrap();
        assert_eq!(scene.trajectories().len(), 2);
        assert_eq!(scene.trajectories()[0].user_id(), "p");
        let again = parse_trajectories(&format_trajectories(scene.trajectories()), p(), 0.5).unwrap();
        assert_eq!(again.trajectories(), scene.trajectories());
    }

    #[test]
    fn parse_errors_report_lines() {
        let bad_number = "user_id,kind,t,x,y\nv,veh,0,0,0\nv,veh,0.5,abc,0\n";
        assert!(matches!(
            parse_trajectories(bad_number, p(), 0.5),
            Err(Error::Parse { line: 3, .. })
        ));
        let bad_kind = "user_id,kind,t,x,y\nv,bus,0,0,0\n";
        assert!(matches!(
            parse_trajectories(bad_kind, p(), 0.5),
            Err(Error::Parse { line: 2, .. })
        ));
        let unsorted = "user_id,kind,t,x,y\nv,veh,0.5,0,0\nv,veh,0,0,0\n";
        assert!(matches!(
            parse_trajectories(unsorted, p(), 0.5),
            Err(Error::Parse { line: 3, .. })
        ));
        let gap = "user_id,kind,t,x,y\nv,veh,0,0,0\nv,veh,1.0,0,0\n";
        assert!(matches!(
            parse_trajectories(gap, p(), 0.5),
            Err(Error::Parse { line: 2, .. })
        ));
        let short = "user_id,kind,t,x\nv,veh,0,0\n";
        assert!(matches!(parse_trajectories(short, p(), 0.5), Err(Error::Schema(_))));
    }

    #[test]
    fn conflicts_round_trip() {
        let cis = vec![ConflictInstant {
            ts: 7,
            ped_id: "p1".into(),
            veh_id: "v, 2".into(),
            min_dist: 0.1 + 0.2,
            time_min_dist: 1.7,
        }];
        assert_eq!(parse_conflicts(&format_conflicts(&cis, 0.5), p()).unwrap(), cis);
    }

    #[test]
    fn dataset_round_trip() {
        let row = DatasetRow {
            key: CiKey {
                ts: 3,
                ped_id: "p".into(),
                veh_id: "v".into(),
            },
            user_kind: UserKind::Pedestrian,
            predictors: PredictorVector {
                min_dist: 1.25,
                time_min_dist: 2.0,
                time_delay_xp: -0.7,
                cp_conf_nr: 2,
                pc_conf_nr: 1,
                car_ahead: true,
                ..Default::default()
            },
            k: -0.31,
            class: Reaction::Prudent,
        };
        let text = format_dataset(std::slice::from_ref(&row), 0.5);
        assert!(text.lines().next().unwrap().contains("MinDist,TimeMinDist,ActDist"));
        assert!(text.contains(",PRU\n"));
        assert_eq!(parse_dataset(&text, p()).unwrap(), vec![row]);
    }

    #[test]
    fn confusion_layout() {
        let cm = ConfusionMatrix::from_counts([[1, 2, 3], [4, 5, 6], [7, 8, 9]]);
        assert_eq!(
            format_confusion(&cm, UserKind::Vehicle),
            "observed,NRV,DEC,ACC\nNRV,1,2,3\nDEC,4,5,6\nACC,7,8,9\n"
        );
    }
}
