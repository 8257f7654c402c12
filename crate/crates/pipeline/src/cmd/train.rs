//! `fundus train`: fit one per-view reference model on one fold of a plan,
//! checkpointing on best validation AUC, and write the model plus a per-epoch
//! log. Supports warm starts (`--init`) and stratified subsampling of the
//! training split (`--train-fraction`) for fine-tuning experiments.

use crate::checkpoint::{save, Checkpoint};
use crate::cmd::{check_fold, parse_view};
use crate::csvio::{read_fold_plan, read_view_index, write_train_log, TrainLogRow, ViewIndexRow};
use crate::error::{data, internal, usage, PipelineError, Result};
use crate::features::{compute_view, load_view_images};
use crate::util::require_exists;
use crate::Ctx;
use fundus_core::classify::{
    train_from, train_on_features, LabeledImage, LinearModel, TrainError, TrainOutcome, View,
};
use fundus_core::dataset::{subsample_fraction, ClassWeights, ManifestRecord};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// Preprocessed view directory (must contain views.csv).
    #[arg(long)]
    pub views: PathBuf,
    /// Fold-plan CSV from `fundus split`.
    #[arg(long)]
    pub fold_plan: PathBuf,
    /// Fold whose train/val split to use.
    #[arg(long)]
    pub fold: u32,
    /// View to train on.
    #[arg(long, value_parser = parse_view)]
    pub view: View,
    /// Output model path.
    #[arg(long)]
    pub out: PathBuf,
    /// Warm-start checkpoint; must match the configured feature spec.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Train on a stratified random fraction of the fold's training split.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Per-epoch log CSV (default: the model path with a .log.csv suffix).
    #[arg(long)]
    pub log: Option<PathBuf>,
}

/// Maps core training failures onto exit-code classes: bad splits are data
/// errors, bad hyperparameters usage errors, the rest internal.
pub(crate) fn train_error(e: TrainError) -> PipelineError {
    match e {
        TrainError::SingleClassTrainingSet | TrainError::EmptyTrainingSet => data(e.to_string()),
        TrainError::BadConfig(_) => usage(e.to_string()),
        TrainError::Feature(_) => data(e.to_string()),
        TrainError::ShapeMismatch { .. } | TrainError::NonFiniteParameters => {
            internal(e.to_string())
        }
    }
}

/// Looks up index rows for `ids`, failing loudly on gaps.
pub(crate) fn rows_for_ids<'a>(
    index: &'a BTreeMap<String, ViewIndexRow>,
    ids: &[&str],
    views_csv: &Path,
) -> Result<Vec<&'a ViewIndexRow>> {
    ids.iter()
        .map(|id| {
            index.get(*id).ok_or_else(|| {
                data(format!("{}: id {id} from the fold plan is missing", views_csv.display()))
            })
        })
        .collect()
}

/// Trains one view model from rows already resolved against a view index.
/// Shared with `crossval`. `train_feats`/`val_feats` short-circuit feature
/// extraction when the caller already holds a feature table.
pub(crate) fn fit(
    base: &Path,
    train_rows: &[&ViewIndexRow],
    val_rows: &[&ViewIndexRow],
    precomputed: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>,
    view: View,
    init: Option<&LinearModel>,
    ctx: &Ctx,
) -> Result<TrainOutcome> {
    let cfg = ctx.config.train_config();
    let policy = ctx.config.augment_policy();
    let train_labels: Vec<u8> = train_rows.iter().map(|r| r.label).collect();
    let val_labels: Vec<u8> = val_rows.iter().map(|r| r.label).collect();
    let weights = ClassWeights::from_labels(&train_labels)
        .map_err(|_| data("training split does not contain both classes"))?;

    if policy.is_identity() {
        let (train_feats, val_feats) = match precomputed {
            Some(pair) => pair,
            None => (
                compute_view(base, train_rows, view, cfg.spec, ctx.config.train_clahe, &ctx.pool)?,
                compute_view(base, val_rows, view, cfg.spec, ctx.config.train_clahe, &ctx.pool)?,
            ),
        };
        train_on_features(init, &train_feats, &train_labels, &val_feats, &val_labels, &weights, &cfg)
            .map_err(train_error)
    } else {
        // Augmentation needs pixels. Contrast equalization, when enabled, is
        // applied to the stored view before the geometric augmentations.
        let train_imgs =
            load_view_images(base, train_rows, view, ctx.config.train_clahe, &ctx.pool)?;
        let val_imgs = load_view_images(base, val_rows, view, ctx.config.train_clahe, &ctx.pool)?;
        let train_set: Vec<LabeledImage> = train_imgs
            .iter()
            .zip(&train_labels)
            .map(|(image, &label)| LabeledImage { image, label })
            .collect();
        let val_set: Vec<LabeledImage> = val_imgs
            .iter()
            .zip(&val_labels)
            .map(|(image, &label)| LabeledImage { image, label })
            .collect();
        train_from(init, &train_set, &val_set, &weights, &cfg, &policy).map_err(train_error)
    }
}

pub(crate) fn log_rows(outcome: &TrainOutcome) -> Vec<TrainLogRow> {
    outcome
        .history
        .iter()
        .enumerate()
        .map(|(epoch, stats)| TrainLogRow {
            epoch: epoch as u32,
            train_loss: stats.train_loss,
            val_auc: stats.val_auc,
        })
        .collect()
}

pub(crate) fn load_init(path: &Path, ctx: &Ctx) -> Result<LinearModel> {
    let ckpt = crate::checkpoint::load(path)?;
    let want = ctx.config.train_config().spec;
    if ckpt.model.spec != want {
        return Err(data(format!(
            "{}: checkpoint feature spec (downsample {}) disagrees with train.downsample {}",
            path.display(),
            ckpt.model.spec.downsample,
            want.downsample
        )));
    }
    if ckpt.clahe != ctx.config.train_clahe {
        return Err(data(format!(
            "{}: checkpoint was trained with clahe={}, but train.clahe={}",
            path.display(),
            ckpt.clahe,
            ctx.config.train_clahe
        )));
    }
    Ok(ckpt.model)
}

pub fn run(args: &TrainArgs, ctx: &Ctx) -> Result<()> {
    let views_csv = args.views.join("views.csv");
    require_exists(&views_csv, "view index")?;
    require_exists(&args.fold_plan, "fold plan")?;
    let plan = read_fold_plan(&args.fold_plan)?;
    check_fold(args.fold, plan.k())?;

    let index: BTreeMap<String, ViewIndexRow> =
        read_view_index(&views_csv)?.into_iter().map(|r| (r.id.clone(), r)).collect();

    let mut train_ids: Vec<&str> = plan.train_ids(args.fold).collect();
    let subsampled;
    if let Some(fraction) = args.train_fraction {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(usage(format!("--train-fraction must be in (0, 1], got {fraction}")));
        }
        let records: Vec<ManifestRecord> = rows_for_ids(&index, &train_ids, &views_csv)?
            .iter()
            .map(|r| ManifestRecord { id: r.id.clone(), path: String::new(), label: r.label })
            .collect();
        subsampled = subsample_fraction(&records, fraction, ctx.config.train_seed);
        train_ids = Vec::new();
        for r in &subsampled {
            train_ids.push(&r.id);
        }
    }
    let val_ids: Vec<&str> = plan.val_ids(args.fold).collect();
    let train_rows = rows_for_ids(&index, &train_ids, &views_csv)?;
    let val_rows = rows_for_ids(&index, &val_ids, &views_csv)?;

    let init = match &args.init {
        Some(path) => Some(load_init(path, ctx)?),
        None => None,
    };

    let outcome = fit(&args.views, &train_rows, &val_rows, None, args.view, init.as_ref(), ctx)?;

    save(&args.out, &Checkpoint { model: outcome.model.clone(), clahe: ctx.config.train_clahe })?;
    let log_path = args
        .log
        .clone()
        .unwrap_or_else(|| args.out.with_extension("log.csv"));
    write_train_log(&log_path, &log_rows(&outcome))?;

    let last = outcome.history.last().expect("at least one epoch");
    let val_auc = last.val_auc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into());
    println!(
        "trained {} fold {}: {} train / {} val, best epoch {}, final loss {:.6}, val auc {val_auc} -> {}",
        args.view.as_str(),
        args.fold,
        train_rows.len(),
        val_rows.len(),
        outcome.best_epoch,
        last.train_loss,
        args.out.display()
    );
    Ok(())
}
