//! `fundus predict`: run one model over one view for a chosen subset of a
//! fold plan (or every indexed sample) and write a prediction CSV.

use crate::checkpoint::load;
use crate::cmd::{check_fold, parse_view};
use crate::csvio::{
    read_fold_plan, read_view_index, write_predictions, ViewIndexRow, WirePrediction, WireView,
};
use crate::error::{usage, Result};
use crate::features::compute_view;
use crate::util::require_exists;
use crate::Ctx;
use fundus_core::classify::View;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Subset {
    /// The fold's training split.
    Train,
    /// The fold's validation shard.
    Val,
    /// The fold-independent held-out test split.
    Test,
    /// Every sample in the view index (no plan needed).
    All,
}

impl Subset {
    fn as_str(self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Val => "val",
            Subset::Test => "test",
            Subset::All => "all",
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct PredictArgs {
    /// Model checkpoint to apply.
    #[arg(long)]
    pub model: PathBuf,
    /// Preprocessed view directory (must contain views.csv).
    #[arg(long)]
    pub views: PathBuf,
    /// Which samples to score.
    #[arg(long, value_enum)]
    pub subset: Subset,
    /// Fold plan CSV (required for train/val/test subsets).
    #[arg(long)]
    pub fold_plan: Option<PathBuf>,
    /// Fold index (required for train/val subsets).
    #[arg(long)]
    pub fold: Option<u32>,
    /// View to score.
    #[arg(long, value_parser = parse_view)]
    pub view: View,
    /// Output prediction CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &PredictArgs, ctx: &Ctx) -> Result<()> {
    let views_csv = args.views.join("views.csv");
    require_exists(&views_csv, "view index")?;
    let ckpt = load(&args.model)?;

    let index_rows = read_view_index(&views_csv)?;
    let index: BTreeMap<String, ViewIndexRow> =
        index_rows.iter().map(|r| (r.id.clone(), r.clone())).collect();

    let ids: Vec<String> = match args.subset {
        Subset::All => index_rows.iter().map(|r| r.id.clone()).collect(),
        subset => {
            let plan_path = args.fold_plan.as_ref().ok_or_else(|| {
                usage(format!("--fold-plan is required for --subset {}", subset.as_str()))
            })?;
            require_exists(plan_path, "fold plan")?;
            let plan = read_fold_plan(plan_path)?;
            match subset {
                Subset::Test => plan.test_ids().map(String::from).collect(),
                Subset::Train | Subset::Val => {
                    let fold = args.fold.ok_or_else(|| {
                        usage(format!("--fold is required for --subset {}", subset.as_str()))
                    })?;
                    check_fold(fold, plan.k())?;
                    if subset == Subset::Train {
                        plan.train_ids(fold).map(String::from).collect()
                    } else {
                        plan.val_ids(fold).map(String::from).collect()
                    }
                }
                Subset::All => unreachable!(),
            }
        }
    };

    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let rows = super::train::rows_for_ids(&index, &id_refs, &views_csv)?;
    let feats = compute_view(&args.views, &rows, args.view, ckpt.model.spec, ckpt.clahe, &ctx.pool)?;
    let predictions: Vec<WirePrediction> = rows
        .iter()
        .zip(&feats)
        .map(|(row, f)| WirePrediction {
            id: row.id.clone(),
            view: WireView::View(args.view),
            probs: ckpt.model.predict_features(f),
        })
        .collect();

    write_predictions(&args.out, &predictions)?;
    println!(
        "wrote {} predictions ({}, {}) -> {}",
        predictions.len(),
        args.view.as_str(),
        args.subset.as_str(),
        args.out.display()
    );
    Ok(())
}
