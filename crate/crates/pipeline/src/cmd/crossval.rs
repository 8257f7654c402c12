//! `fundus crossval`: the full experiment on one manifest — split, per-fold
//! per-view training, test-set prediction, fusion, evaluation, and the
//! cross-fold "mean ± std" aggregate. Every artifact lands under `--out`.

use crate::checkpoint::{save, Checkpoint};
use crate::cmd::eval::eval_rows;
use crate::cmd::fuse::fuse_rows;
use crate::cmd::preprocess::build_views;
use crate::cmd::train::{fit, log_rows, rows_for_ids};
use crate::csvio::{
    read_manifest, read_view_index, report_to_json, write_fold_plan, write_predictions,
    write_report_csv, write_train_log, ReportRow, ViewIndexRow, WirePrediction, WireView,
};
use crate::error::{data, internal, usage, Result};
use crate::features::load_or_compute;
use crate::util::{atomic_write, ensure_dir, require_exists};
use crate::Ctx;
use fundus_core::classify::View;
use fundus_core::dataset::{split_manifest, FoldPlan, SplitError};
use fundus_core::metrics::{aggregate_folds, EvalReport};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct CrossvalArgs {
    /// Input manifest (id,path,label).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory manifest paths are relative to (default: the manifest's).
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Output directory for every artifact of the run.
    #[arg(long)]
    pub out: PathBuf,
    /// Reuse an existing preprocessed view directory (must contain
    /// views.csv) instead of preprocessing into `<out>/views`.
    #[arg(long)]
    pub views: Option<PathBuf>,
    /// Binary feature cache; reused when it matches the index and the
    /// feature settings, recomputed and overwritten otherwise.
    #[arg(long)]
    pub feature_cache: Option<PathBuf>,
}

/// Orders the four report tags as they appear in tables.
const TAGS: [WireView; 4] = [
    WireView::View(View::Original),
    WireView::View(View::Cropped),
    WireView::View(View::Polar),
    WireView::Fused,
];

/// The delegated split invariant, re-checked at the CLI boundary: validation
/// shards must be disjoint and cover the pool except for the sub-`k`
/// rounding remainder that trains in every fold.
fn assert_partition(plan: &FoldPlan) -> Result<()> {
    let pool_ids: BTreeSet<&str> = plan.pool().iter().map(|(id, _)| id.as_str()).collect();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for fold in 0..plan.k() {
        for id in plan.val_ids(fold) {
            if !seen.insert(id) {
                return Err(internal(format!("validation shards overlap on id {id}")));
            }
        }
    }
    if !seen.is_subset(&pool_ids) {
        return Err(internal("validation shards contain ids outside the pool"));
    }
    let leftover = pool_ids.len() - seen.len();
    if leftover >= plan.k() as usize {
        return Err(internal(format!(
            "{leftover} pool ids never serve as validation (limit {})",
            plan.k() - 1
        )));
    }
    Ok(())
}

fn render_fold_table(k: u32, rows: &[ReportRow]) -> String {
    let auc = |fold: u32, tag: WireView| -> f64 {
        rows.iter()
            .find(|r| r.fold == Some(fold) && r.view == tag)
            .map(|r| r.report.auc)
            .expect("report row for every fold/view pair")
    };
    let mut out = String::from("auc by fold (original cropped polar fused):\n");
    for fold in 0..k {
        let _ = write!(out, "fold {fold}:");
        for tag in TAGS {
            let _ = write!(out, " {:.6}", auc(fold, tag));
        }
        out.push('\n');
    }
    out
}

fn render_aggregates(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    for (title, pick) in [
        ("aggregate auc:", true),
        ("aggregate f1:", false),
    ] {
        out.push_str(title);
        out.push('\n');
        for tag in TAGS {
            let reports: Vec<EvalReport> = rows
                .iter()
                .filter(|r| r.view == tag && r.fold.is_some())
                .map(|r| r.report.clone())
                .collect();
            let agg = aggregate_folds(&reports);
            let stat = if pick { &agg.auc } else { &agg.f1 };
            let _ = writeln!(out, "{} {}", tag.as_str(), stat.render());
        }
    }
    out
}

pub fn run(args: &CrossvalArgs, ctx: &Ctx) -> Result<()> {
    require_exists(&args.manifest, "manifest")?;
    let records = read_manifest(&args.manifest)?;
    if records.is_empty() {
        return Err(data(format!("{}: manifest has no rows", args.manifest.display())));
    }
    ensure_dir(&args.out)?;
    atomic_write(
        &args.out.join("resolved_config.txt"),
        ctx.config.render_resolved().as_bytes(),
    )?;

    // Views: reuse or build.
    let (views_base, index_rows) = match &args.views {
        Some(dir) => {
            require_exists(&dir.join("views.csv"), "view index")?;
            (dir.clone(), read_view_index(&dir.join("views.csv"))?)
        }
        None => {
            let dir = args.out.join("views");
            let (rows, stats) =
                build_views(&args.manifest, args.image_root.as_deref(), None, &dir, ctx)?;
            println!(
                "preprocessed {} samples (fallbacks: {} = {:.2}%)",
                stats.samples,
                stats.fallbacks,
                100.0 * stats.rate()
            );
            (dir, rows)
        }
    };
    let views_csv = views_base.join("views.csv");
    let index: BTreeMap<String, ViewIndexRow> =
        index_rows.into_iter().map(|r| (r.id.clone(), r)).collect();
    for record in &records {
        match index.get(&record.id) {
            None => {
                return Err(data(format!(
                    "{}: no preprocessed views for manifest id {}",
                    views_csv.display(),
                    record.id
                )))
            }
            Some(row) if row.label != record.label => {
                return Err(data(format!(
                    "{}: label for id {} disagrees with the manifest",
                    views_csv.display(),
                    record.id
                )))
            }
            Some(_) => {}
        }
    }

    // Split, persist the plan, and re-assert the partition invariant here.
    let cfg = &ctx.config;
    let plan = split_manifest(&records, cfg.test_count, cfg.k, cfg.val_fraction, cfg.split_seed)
        .map_err(|e| match e {
            SplitError::ValFractionMismatch { .. } | SplitError::TooFewFolds(_) => {
                usage(e.to_string())
            }
            _ => data(format!("{}: {e}", args.manifest.display())),
        })?;
    assert_partition(&plan)?;
    write_fold_plan(&args.out.join("fold_plan.csv"), &plan)?;

    // One feature pass serves all folds, views, and the test predictions.
    let spec = cfg.train_config().spec;
    let manifest_rows: Vec<ViewIndexRow> =
        records.iter().map(|r| index[&r.id].clone()).collect();
    let features = load_or_compute(
        args.feature_cache.as_deref(),
        &views_base,
        &manifest_rows,
        spec,
        cfg.train_clahe,
        &ctx.pool,
    )?;

    let truth: BTreeMap<String, u8> =
        records.iter().map(|r| (r.id.clone(), r.label)).collect();
    let weights = cfg.ensemble_config()?;
    let augmenting = !cfg.augment_policy().is_identity();
    let models_dir = args.out.join("models");
    let logs_dir = args.out.join("logs");
    ensure_dir(&models_dir)?;
    ensure_dir(&logs_dir)?;

    let test_ids: Vec<&str> = plan.test_ids().collect();
    let mut report_rows: Vec<ReportRow> = Vec::new();
    for fold in 0..plan.k() {
        let train_ids: Vec<&str> = plan.train_ids(fold).collect();
        let val_ids: Vec<&str> = plan.val_ids(fold).collect();
        let train_rows = rows_for_ids(&index, &train_ids, &views_csv)?;
        let val_rows = rows_for_ids(&index, &val_ids, &views_csv)?;
        let pred_dir = args.out.join("predictions").join(format!("fold{fold}"));
        ensure_dir(&pred_dir)?;

        let mut view_predictions: Vec<WirePrediction> = Vec::new();
        for view in View::ALL {
            // The feature table already holds every sample; skip re-extraction
            // unless augmentation forces the image-space training path.
            let precomputed = if augmenting {
                None
            } else {
                Some((features.gather(&train_ids, view)?, features.gather(&val_ids, view)?))
            };
            let outcome = fit(&views_base, &train_rows, &val_rows, precomputed, view, None, ctx)?;
            let stem = format!("fold{fold}.{}", view.as_str());
            save(
                &models_dir.join(format!("{stem}.model")),
                &Checkpoint { model: outcome.model.clone(), clahe: cfg.train_clahe },
            )?;
            write_train_log(&logs_dir.join(format!("{stem}.csv")), &log_rows(&outcome))?;

            let mut preds = Vec::with_capacity(test_ids.len());
            for id in &test_ids {
                let feats = features
                    .get(id, view)
                    .ok_or_else(|| internal(format!("no features for test id {id}")))?;
                preds.push(WirePrediction {
                    id: String::from(*id),
                    view: WireView::View(view),
                    probs: outcome.model.predict_features(feats),
                });
            }
            let pred_path = pred_dir.join(format!("{}.csv", view.as_str()));
            write_predictions(&pred_path, &preds)?;
            let (tag, report) = eval_rows(&preds, &truth, cfg.threshold, &pred_path)?;
            report_rows.push(ReportRow { fold: Some(fold), view: tag, report });
            view_predictions.extend(preds);
        }

        let fused = fuse_rows(&view_predictions, &weights)?;
        let fused_path = pred_dir.join("fused.csv");
        write_predictions(&fused_path, &fused)?;
        let (tag, report) = eval_rows(&fused, &truth, cfg.threshold, &fused_path)?;
        report_rows.push(ReportRow { fold: Some(fold), view: tag, report });
    }

    // Reports: machine-readable rows plus the human table.
    write_report_csv(&args.out.join("report.csv"), &report_rows)?;
    let mut jsonl = String::new();
    for row in &report_rows {
        let _ = writeln!(jsonl, "{}", report_to_json(row));
    }
    atomic_write(&args.out.join("report.jsonl"), jsonl.as_bytes())?;

    let mut text = format!(
        "folds {}\npool {}\ntest {}\n\n",
        plan.k(),
        plan.pool().len(),
        plan.test_len()
    );
    text.push_str(&render_fold_table(plan.k(), &report_rows));
    text.push('\n');
    text.push_str(&render_aggregates(&report_rows));
    atomic_write(&args.out.join("report.txt"), text.as_bytes())?;

    print!("{}", render_aggregates(&report_rows));
    println!("artifacts -> {}", args.out.display());
    Ok(())
}
