//! The pipeline's CSV formats: manifests, fold plans, prediction files,
//! view indexes, training logs, and evaluation reports. All files are UTF-8
//! with LF line endings and a header row; floats travel as 9-significant-
//! digit scientific notation.

use crate::error::{data, PipelineError, Result};
use crate::util::atomic_write;
use fundus_core::classify::{ProbVector, View};
use fundus_core::dataset::{FoldPlan, ManifestRecord, Role};
use fundus_core::metrics::EvalReport;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

/// 9 significant digits: enough to round-trip probabilities at the 1e-6
/// tolerance the readers enforce, compact enough to diff.
pub fn wire_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

fn check_header(path: &Path, reader: &mut csv::Reader<std::fs::File>, want: &[&str]) -> Result<()> {
    let got = reader.headers().map_err(|e| data(format!("{}: {e}", path.display())))?;
    let got: Vec<&str> = got.iter().collect();
    if got != want {
        return Err(data(format!(
            "{}: expected header {}, got {}",
            path.display(),
            want.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

fn row_error(path: &Path, line: u64, msg: impl std::fmt::Display) -> PipelineError {
    data(format!("{}:{line}: {msg}", path.display()))
}

/// The writers emit unquoted fields, so values carrying CSV metacharacters
/// are rejected at ingest rather than corrupted on the next write.
fn check_wire_safe(path: &Path, line: u64, what: &str, value: &str) -> Result<()> {
    if value.contains([',', '"', '\n', '\r']) {
        return Err(row_error(path, line, format!("{what} contains CSV metacharacters: {value:?}")));
    }
    Ok(())
}

/// Iterates records with their 1-based line numbers.
fn for_each_row(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
    width: usize,
    mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
) -> Result<()> {
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => return Ok(()),
            Ok(true) => {
                if record.len() != width {
                    return Err(row_error(
                        path,
                        line,
                        format!("expected {width} fields, got {}", record.len()),
                    ));
                }
                f(line, &record)?;
            }
            Err(e) => return Err(row_error(path, line, e)),
        }
    }
}

// ---------------------------------------------------------------- manifest

/// Reads `id,path,label`, validating uniqueness and the label domain.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["id", "path", "label"])?;
    let mut records = Vec::new();
    let mut seen: BTreeMap<String, u64> = BTreeMap::new();
    for_each_row(path, &mut reader, 3, |line, row| {
        let id = row[0].to_string();
        if id.is_empty() {
            return Err(row_error(path, line, "empty id"));
        }
        check_wire_safe(path, line, "id", &id)?;
        check_wire_safe(path, line, "path", &row[1])?;
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(row_error(
                path,
                line,
                format!("duplicate id {id} (first seen on line {first})"),
            ));
        }
        let label = match &row[2] {
            "0" => 0,
            "1" => 1,
            other => return Err(row_error(path, line, format!("label must be 0 or 1, got {other:?}"))),
        };
        records.push(ManifestRecord { id, path: row[1].to_string(), label });
        Ok(())
    })?;
    Ok(records)
}

pub fn write_manifest(path: &Path, records: &[ManifestRecord]) -> Result<()> {
    let mut out = String::from("id,path,label\n");
    for r in records {
        out.push_str(&format!("{},{},{}\n", r.id, r.path, r.label));
    }
    atomic_write(path, out.as_bytes())
}

// --------------------------------------------------------------- fold plan

/// Writes `id,fold,role`: one row per pool id per fold (role `train` or
/// `val`), then the fold-independent test rows with an empty fold field.
pub fn write_fold_plan(path: &Path, plan: &FoldPlan) -> Result<()> {
    let mut out = String::from("id,fold,role\n");
    for fold in 0..plan.k() {
        for (id, shard) in plan.pool() {
            let role = if *shard == Some(fold) { Role::Val } else { Role::Train };
            out.push_str(id);
            out.push(',');
            out.push_str(&fold.to_string());
            out.push(',');
            out.push_str(role.as_str());
            out.push('\n');
        }
    }
    for id in plan.test_ids() {
        out.push_str(id);
        out.push_str(",,test\n");
    }
    atomic_write(path, out.as_bytes())
}

/// Reads a fold plan back, reconstructing and validating the shard
/// structure: every pool id must appear once per fold and be `val` in at
/// most one of them; ids never marked `val` train in every fold. Pool
/// order is taken from the fold-0 block.
pub fn read_fold_plan(path: &Path) -> Result<FoldPlan> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["id", "fold", "role"])?;
    let mut max_fold = 0u32;
    let mut val_shard: BTreeMap<String, u32> = BTreeMap::new();
    let mut pool_order: Vec<String> = Vec::new();
    let mut fold0_seen: BTreeSet<String> = BTreeSet::new();
    let mut row_count: BTreeMap<String, u32> = BTreeMap::new();
    let mut test: Vec<String> = Vec::new();
    let mut test_seen: BTreeSet<String> = BTreeSet::new();
    for_each_row(path, &mut reader, 3, |line, row| {
        let id = row[0].to_string();
        check_wire_safe(path, line, "id", &id)?;
        let role = &row[2];
        if role == "test" {
            if !row[1].is_empty() {
                return Err(row_error(path, line, "test rows must leave the fold empty"));
            }
            if !test_seen.insert(id.clone()) {
                return Err(row_error(path, line, format!("duplicate test id {id}")));
            }
            test.push(id);
            return Ok(());
        }
        let fold: u32 = row[1]
            .parse()
            .map_err(|_| row_error(path, line, format!("bad fold index {:?}", &row[1])))?;
        max_fold = max_fold.max(fold);
        if fold == 0 {
            if !fold0_seen.insert(id.clone()) {
                return Err(row_error(path, line, format!("duplicate id {id} in fold 0")));
            }
            pool_order.push(id.clone());
        }
        match role {
            "val" => {
                if val_shard.insert(id.clone(), fold).is_some() {
                    return Err(row_error(path, line, format!("{id} is val in two folds")));
                }
            }
            "train" => {}
            other => return Err(row_error(path, line, format!("unknown role {other:?}"))),
        }
        *row_count.entry(id).or_insert(0) += 1;
        Ok(())
    })?;
    let k = max_fold + 1;
    if val_shard.is_empty() {
        return Err(data(format!("{}: no validation assignments found", path.display())));
    }
    for (id, count) in &row_count {
        if *count != k {
            return Err(data(format!(
                "{}: id {id} appears in {count} folds, expected {k}",
                path.display()
            )));
        }
    }
    // Every id occurs once per fold, so the fold-0 block is the complete
    // pool in its original order.
    if row_count.len() != pool_order.len() {
        return Err(data(format!("{}: pool ids missing from the fold 0 block", path.display())));
    }
    let pool: Vec<(String, Option<u32>)> = pool_order
        .into_iter()
        .map(|id| {
            let shard = val_shard.get(&id).copied();
            (id, shard)
        })
        .collect();
    // Seed is provenance of the original split and is not stored in the CSV.
    FoldPlan::from_parts(k, 0, pool, test)
        .map_err(|e| data(format!("{}: {e}", path.display())))
}

// ------------------------------------------------------------- predictions

/// View tag on the prediction wire: a concrete pipeline view or the fused
/// ensemble output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum WireView {
    View(View),
    Fused,
}

impl WireView {
    pub fn as_str(&self) -> &'static str {
        match self {
            WireView::View(v) => v.as_str(),
            WireView::Fused => "fused",
        }
    }

    pub fn parse(s: &str) -> Option<WireView> {
        if s == "fused" {
            return Some(WireView::Fused);
        }
        View::parse(s).map(WireView::View)
    }
}

/// One prediction row on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct WirePrediction {
    pub id: String,
    pub view: WireView,
    pub probs: ProbVector,
}

/// Writes `id,view,p0,p1` at 9 significant digits.
pub fn write_predictions(path: &Path, rows: &[WirePrediction]) -> Result<()> {
    let mut out = String::from("id,view,p0,p1\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.id,
            row.view.as_str(),
            wire_float(row.probs.p0()),
            wire_float(row.probs.p1())
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Reads predictions, enforcing the probability invariants (sum within
/// 1e-6 of 1) and (id, view) uniqueness.
pub fn read_predictions(path: &Path) -> Result<Vec<WirePrediction>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["id", "view", "p0", "p1"])?;
    let mut rows = Vec::new();
    let mut seen: BTreeSet<(String, WireView)> = BTreeSet::new();
    for_each_row(path, &mut reader, 4, |line, row| {
        let id = row[0].to_string();
        check_wire_safe(path, line, "id", &id)?;
        let view = WireView::parse(&row[1])
            .ok_or_else(|| row_error(path, line, format!("unknown view {:?}", &row[1])))?;
        let p0: f64 = row[2]
            .parse()
            .map_err(|_| row_error(path, line, format!("bad probability {:?}", &row[2])))?;
        let p1: f64 = row[3]
            .parse()
            .map_err(|_| row_error(path, line, format!("bad probability {:?}", &row[3])))?;
        let probs = ProbVector::new_normalized(p0, p1, 1e-6)
            .map_err(|e| row_error(path, line, e))?;
        if !seen.insert((id.clone(), view)) {
            return Err(row_error(path, line, format!("duplicate row for ({id}, {})", view.as_str())));
        }
        rows.push(WirePrediction { id, view, probs });
        Ok(())
    })?;
    Ok(rows)
}

// -------------------------------------------------------------- view index

/// One preprocessed sample in the `views.csv` index. Paths are relative to
/// the index's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewIndexRow {
    pub id: String,
    pub label: u8,
    pub original: PathBuf,
    pub cropped: PathBuf,
    pub polar: PathBuf,
    pub used_fallback: bool,
}

impl ViewIndexRow {
    pub fn view_path(&self, view: View) -> &Path {
        match view {
            View::Original => &self.original,
            View::Cropped => &self.cropped,
            View::Polar => &self.polar,
        }
    }
}

pub fn write_view_index(path: &Path, rows: &[ViewIndexRow]) -> Result<()> {
    let mut out = String::from("id,label,original,cropped,polar,used_fallback\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.id,
            r.label,
            r.original.display(),
            r.cropped.display(),
            r.polar.display(),
            u8::from(r.used_fallback)
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_view_index(path: &Path) -> Result<Vec<ViewIndexRow>> {
    let mut reader = csv_reader(path)?;
    check_header(
        path,
        &mut reader,
        &["id", "label", "original", "cropped", "polar", "used_fallback"],
    )?;
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for_each_row(path, &mut reader, 6, |line, row| {
        let id = row[0].to_string();
        check_wire_safe(path, line, "id", &id)?;
        for i in 2..5 {
            check_wire_safe(path, line, "path", &row[i])?;
        }
        if !seen.insert(id.clone()) {
            return Err(row_error(path, line, format!("duplicate id {id}")));
        }
        let label = match &row[1] {
            "0" => 0,
            "1" => 1,
            other => return Err(row_error(path, line, format!("label must be 0 or 1, got {other:?}"))),
        };
        let used_fallback = match &row[5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(row_error(path, line, format!("used_fallback must be 0 or 1, got {other:?}")))
            }
        };
        rows.push(ViewIndexRow {
            id,
            label,
            original: PathBuf::from(&row[2]),
            cropped: PathBuf::from(&row[3]),
            polar: PathBuf::from(&row[4]),
            used_fallback,
        });
        Ok(())
    })?;
    Ok(rows)
}

// ------------------------------------------------------------ training log

/// Per-epoch diagnostics written next to each trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainLogRow {
    pub epoch: u32,
    pub train_loss: f64,
    pub val_auc: Option<f64>,
}

pub fn write_train_log(path: &Path, rows: &[TrainLogRow]) -> Result<()> {
    let mut out = String::from("epoch,train_loss,val_auc\n");
    for r in rows {
        let auc = r.val_auc.map(wire_float).unwrap_or_default();
        out.push_str(&format!("{},{},{auc}\n", r.epoch, wire_float(r.train_loss)));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_train_log(path: &Path) -> Result<Vec<TrainLogRow>> {
    let mut reader = csv_reader(path)?;
    check_header(path, &mut reader, &["epoch", "train_loss", "val_auc"])?;
    let mut rows = Vec::new();
    for_each_row(path, &mut reader, 3, |line, row| {
        let epoch: u32 =
            row[0].parse().map_err(|_| row_error(path, line, "bad epoch"))?;
        let train_loss: f64 =
            row[1].parse().map_err(|_| row_error(path, line, "bad train_loss"))?;
        let val_auc = if row[2].is_empty() {
            None
        } else {
            Some(row[2].parse().map_err(|_| row_error(path, line, "bad val_auc"))?)
        };
        rows.push(TrainLogRow { epoch, train_loss, val_auc });
        Ok(())
    })?;
    Ok(rows)
}

// ----------------------------------------------------------------- reports

/// One evaluated prediction set: a fold/view pair in cross-validation, or a
/// standalone evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    /// Fold index, or `None` for single evaluations.
    pub fold: Option<u32>,
    pub view: WireView,
    pub report: EvalReport,
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = String::from("fold,view,auc,f1,tp,fp,tn,fn,threshold\n");
    for r in rows {
        let fold = r.fold.map(|f| f.to_string()).unwrap_or_default();
        let c = r.report.confusion;
        out.push_str(&format!(
            "{fold},{},{},{},{},{},{},{},{}\n",
            r.view.as_str(),
            wire_float(r.report.auc),
            wire_float(r.report.f1),
            c.true_pos,
            c.false_pos,
            c.true_neg,
            c.false_neg,
            wire_float(r.report.threshold)
        ));
    }
    atomic_write(path, out.as_bytes())
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    use fundus_core::metrics::Confusion;
    let mut reader = csv_reader(path)?;
    check_header(
        path,
        &mut reader,
        &["fold", "view", "auc", "f1", "tp", "fp", "tn", "fn", "threshold"],
    )?;
    let mut rows = Vec::new();
    for_each_row(path, &mut reader, 9, |line, row| {
        let fold = if row[0].is_empty() {
            None
        } else {
            Some(row[0].parse().map_err(|_| row_error(path, line, "bad fold"))?)
        };
        let view = WireView::parse(&row[1])
            .ok_or_else(|| row_error(path, line, format!("unknown view {:?}", &row[1])))?;
        let parse_f = |i: usize, what: &str| -> Result<f64> {
            row[i].parse().map_err(|_| row_error(path, line, format!("bad {what}")))
        };
        let parse_n = |i: usize, what: &str| -> Result<usize> {
            row[i].parse().map_err(|_| row_error(path, line, format!("bad {what}")))
        };
        rows.push(ReportRow {
            fold,
            view,
            report: EvalReport {
                auc: parse_f(2, "auc")?,
                f1: parse_f(3, "f1")?,
                confusion: Confusion {
                    true_pos: parse_n(4, "tp")?,
                    false_pos: parse_n(5, "fp")?,
                    true_neg: parse_n(6, "tn")?,
                    false_neg: parse_n(7, "fn")?,
                },
                threshold: parse_f(8, "threshold")?,
            },
        });
        Ok(())
    })?;
    Ok(rows)
}

pub fn report_to_json(row: &ReportRow) -> serde_json::Value {
    let c = row.report.confusion;
    serde_json::json!({
        "fold": row.fold,
        "view": row.view.as_str(),
        "auc": row.report.auc,
        "f1": row.report.f1,
        "tp": c.true_pos,
        "fp": c.false_pos,
        "tn": c.true_neg,
        "fn": c.false_neg,
        "threshold": row.report.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fundus_core::dataset::split_manifest;
    use fundus_core::metrics::Confusion;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().expect("create temp dir")
    }

    fn sample_manifest(n0: usize, n1: usize) -> Vec<ManifestRecord> {
        (0..n0 + n1)
            .map(|i| ManifestRecord {
                id: format!("img{i:04}"),
                path: format!("images/img{i:04}.png"),
                label: u8::from(i < n1),
            })
            .collect()
    }

    #[test]
    fn manifest_round_trip_and_line_numbered_errors() {
        let dir = tmp();
        let path = dir.path().join("manifest.csv");
        let records = sample_manifest(5, 2);
        write_manifest(&path, &records).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), records);

        let bad = dir.path().join("dup.csv");
        std::fs::write(&bad, "id,path,label\na,x.png,0\nb,y.png,1\na,z.png,0\n").unwrap();
        let err = read_manifest(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(":4:"), "{err}");

        let badlabel = dir.path().join("label.csv");
        std::fs::write(&badlabel, "id,path,label\na,x.png,2\n").unwrap();
        let err = read_manifest(&badlabel).unwrap_err();
        assert!(err.to_string().contains("label"), "{err}");

        let empty = dir.path().join("empty.csv");
        std::fs::write(&empty, "id,path,label\n").unwrap();
        assert_eq!(read_manifest(&empty).unwrap(), vec![]);
    }

    #[test]
    fn fold_plan_round_trip_preserves_membership() {
        let dir = tmp();
        let records = sample_manifest(40, 10);
        let plan = split_manifest(&records, 10, 5, 0.2, 3).unwrap();
        let path = dir.path().join("plan.csv");
        write_fold_plan(&path, &plan).unwrap();
        let back = read_fold_plan(&path).unwrap();
        assert_eq!(back.k(), plan.k());
        assert_eq!(back.test_len(), plan.test_len());
        for fold in 0..plan.k() {
            let a: Vec<&str> = plan.val_ids(fold).collect();
            let mut b: Vec<&str> = back.val_ids(fold).collect();
            b.sort_unstable();
            let mut a_sorted = a.clone();
            a_sorted.sort_unstable();
            assert_eq!(a_sorted, b, "fold {fold} val membership");
        }
        let a: BTreeSet<&str> = plan.test_ids().collect();
        let b: BTreeSet<&str> = back.test_ids().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn fold_plan_reader_rejects_inconsistent_plans() {
        let dir = tmp();
        let path = dir.path().join("bad.csv");
        // id `a` never serves as val.
        std::fs::write(
            &path,
            "id,fold,role\na,0,train\na,1,train\nb,0,val\nb,1,train\n",
        )
        .unwrap();
        let err = read_fold_plan(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);

        std::fs::write(&path, "id,fold,role\nb,0,val\nb,1,val\n").unwrap();
        let err = read_fold_plan(&path).unwrap_err();
        assert!(err.to_string().contains("two folds"), "{err}");

        std::fs::write(&path, "id,fold,role\nt,3,test\n").unwrap();
        assert!(read_fold_plan(&path).is_err());
    }

    #[test]
    fn prediction_round_trip_is_lossless_at_wire_precision() {
        let dir = tmp();
        let path = dir.path().join("preds.csv");
        let rows = vec![
            WirePrediction {
                id: "a".into(),
                view: WireView::View(View::Original),
                probs: ProbVector::new(2.05 / 3.0, 0.95 / 3.0).unwrap(),
            },
            WirePrediction {
                id: "b".into(),
                view: WireView::Fused,
                probs: ProbVector::new(0.125, 0.875).unwrap(),
            },
        ];
        write_predictions(&path, &rows).unwrap();
        let back = read_predictions(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (w, r) in rows.iter().zip(&back) {
            assert_eq!(w.id, r.id);
            assert_eq!(w.view, r.view);
            assert!((w.probs.p0() - r.probs.p0()).abs() < 1e-8);
            assert!((w.probs.p1() - r.probs.p1()).abs() < 1e-8);
        }
        // Write->read->write is byte-stable (the wire format is the fixpoint).
        write_predictions(&dir.path().join("again.csv"), &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir.path().join("again.csv")).unwrap()
        );
    }

    #[test]
    fn prediction_reader_enforces_probability_contract() {
        let dir = tmp();
        let path = dir.path().join("preds.csv");
        std::fs::write(&path, "id,view,p0,p1\na,original,0.5,0.3\n").unwrap();
        let err = read_predictions(&path).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains(":2:"), "{err}");

        std::fs::write(&path, "id,view,p0,p1\na,sideways,0.5,0.5\n").unwrap();
        assert!(read_predictions(&path).unwrap_err().to_string().contains("view"));

        std::fs::write(&path, "id,view,p0,p1\na,polar,0.5,0.5\na,polar,0.4,0.6\n").unwrap();
        assert!(read_predictions(&path).unwrap_err().to_string().contains("duplicate"));

        // A small drift within 1e-6 is accepted and renormalized.
        std::fs::write(&path, "id,view,p0,p1\na,polar,0.6000003,0.4\n").unwrap();
        let rows = read_predictions(&path).unwrap();
        assert!((rows[0].probs.p0() + rows[0].probs.p1() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn view_index_and_train_log_round_trip() {
        let dir = tmp();
        let rows = vec![ViewIndexRow {
            id: "x1".into(),
            label: 1,
            original: "original/x1.png".into(),
            cropped: "cropped/x1.png".into(),
            polar: "polar/x1.png".into(),
            used_fallback: true,
        }];
        let path = dir.path().join("views.csv");
        write_view_index(&path, &rows).unwrap();
        assert_eq!(read_view_index(&path).unwrap(), rows);

        let log = vec![
            TrainLogRow { epoch: 0, train_loss: 0.69, val_auc: Some(0.5) },
            TrainLogRow { epoch: 1, train_loss: 0.64, val_auc: None },
        ];
        let path = dir.path().join("log.csv");
        write_train_log(&path, &log).unwrap();
        let back = read_train_log(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[1].val_auc.is_none());
        assert!((back[0].train_loss - 0.69).abs() < 1e-8);
    }

    #[test]
    fn report_rows_round_trip() {
        let dir = tmp();
        let rows = vec![ReportRow {
            fold: Some(2),
            view: WireView::Fused,
            report: EvalReport {
                auc: 0.875,
                f1: 0.6,
                confusion: Confusion { true_pos: 3, false_pos: 1, true_neg: 10, false_neg: 3 },
                threshold: 0.5,
            },
        }];
        let path = dir.path().join("report.csv");
        write_report_csv(&path, &rows).unwrap();
        let back = read_report_csv(&path).unwrap();
        assert_eq!(back[0].fold, Some(2));
        assert_eq!(back[0].view, WireView::Fused);
        assert!((back[0].report.auc - 0.875).abs() < 1e-8);
        assert_eq!(back[0].report.confusion, rows[0].report.confusion);

        let json = report_to_json(&rows[0]);
        assert_eq!(json["view"], "fused");
        assert_eq!(json["tp"], 3);
    }
}
