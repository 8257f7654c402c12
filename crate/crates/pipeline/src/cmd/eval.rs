//! `fundus eval`: score one prediction file against manifest labels and
//! write a report in text, CSV, and JSONL forms.

use crate::csvio::{
    read_manifest, read_predictions, report_to_json, write_report_csv, ReportRow, WireView,
};
use crate::error::{data, usage, Result};
use crate::util::{atomic_write, ensure_dir, require_exists};
use crate::Ctx;
use fundus_core::classify::ProbVector;
use fundus_core::metrics::{evaluate, EvalReport};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// Prediction CSV (a single view or fused).
    #[arg(long)]
    pub predictions: PathBuf,
    /// Manifest carrying the truth labels.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Decision threshold on the positive-class probability
    /// (default from config: 0.5).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory; receives report.txt, report.csv, report.jsonl.
    #[arg(long)]
    pub out: PathBuf,
}

/// Renders the single-evaluation report text.
pub(crate) fn render_report(view: WireView, samples: usize, report: &EvalReport) -> String {
    let c = report.confusion;
    format!(
        "view {}\nsamples {samples}\nauc {:.6}\nf1 {:.6}\ntp {}\nfp {}\ntn {}\nfn {}\nthreshold {}\n",
        view.as_str(),
        report.auc,
        report.f1,
        c.true_pos,
        c.false_pos,
        c.true_neg,
        c.false_neg,
        report.threshold
    )
}

/// Scores `rows` (which must share one view tag) against `truth`.
pub(crate) fn eval_rows(
    rows: &[crate::csvio::WirePrediction],
    truth: &BTreeMap<String, u8>,
    threshold: f64,
    source: &Path,
) -> Result<(WireView, EvalReport)> {
    let mut views: Vec<WireView> = rows.iter().map(|r| r.view).collect();
    views.sort_unstable();
    views.dedup();
    match views.as_slice() {
        [] => Err(data(format!("{}: no prediction rows", source.display()))),
        [view] => {
            let predictions: BTreeMap<String, ProbVector> =
                rows.iter().map(|r| (r.id.clone(), r.probs)).collect();
            let report = evaluate(&predictions, truth, threshold)
                .map_err(|e| data(format!("{}: {e}", source.display())))?;
            Ok((*view, report))
        }
        many => Err(data(format!(
            "{}: mixed views in one evaluation ({}); fuse first or split by view",
            source.display(),
            many.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

pub fn run(args: &EvalArgs, ctx: &Ctx) -> Result<()> {
    require_exists(&args.predictions, "prediction file")?;
    require_exists(&args.manifest, "manifest")?;
    let threshold = args.threshold.unwrap_or(ctx.config.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(usage(format!("--threshold must be in [0, 1], got {threshold}")));
    }

    let rows = read_predictions(&args.predictions)?;
    let truth: BTreeMap<String, u8> =
        read_manifest(&args.manifest)?.into_iter().map(|r| (r.id, r.label)).collect();

    let (view, report) = eval_rows(&rows, &truth, threshold, &args.predictions)?;

    ensure_dir(&args.out)?;
    let text = render_report(view, rows.len(), &report);
    atomic_write(&args.out.join("report.txt"), text.as_bytes())?;
    let row = ReportRow { fold: None, view, report };
    write_report_csv(&args.out.join("report.csv"), std::slice::from_ref(&row))?;
    let json = format!("{}\n", report_to_json(&row));
    atomic_write(&args.out.join("report.jsonl"), json.as_bytes())?;

    print!("{text}");
    println!("reports -> {}", args.out.display());
    Ok(())
}
