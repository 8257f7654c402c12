//! `fundus split`: build the stratified test/k-fold plan for a manifest and
//! write it as a fold-plan CSV. Operates on ids and labels only; image files
//! are not touched.

use crate::csvio::{read_manifest, write_fold_plan};
use crate::error::{data, usage, Result};
use crate::util::require_exists;
use crate::Ctx;
use fundus_core::dataset::{split_manifest, SplitError};
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct SplitArgs {
    /// Input manifest (id,path,label).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Held-out test size (default from config: 10000).
    #[arg(long)]
    pub test_count: Option<usize>,
    /// Number of folds (default from config: 5).
    #[arg(long)]
    pub k: Option<u32>,
    /// Validation fraction of the pool; must equal 1/k (default 0.2).
    #[arg(long)]
    pub val_fraction: Option<f64>,
    /// Output fold-plan CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SplitArgs, ctx: &Ctx) -> Result<()> {
    require_exists(&args.manifest, "manifest")?;
    let test_count = args.test_count.unwrap_or(ctx.config.test_count);
    let k = args.k.unwrap_or(ctx.config.k);
    let val_fraction = args.val_fraction.unwrap_or(ctx.config.val_fraction);
    let seed = ctx.config.split_seed;
    if k < 2 {
        return Err(usage(format!("--k must be at least 2, got {k}")));
    }

    let records = read_manifest(&args.manifest)?;
    let plan = split_manifest(&records, test_count, k, val_fraction, seed).map_err(|e| {
        match e {
            SplitError::ValFractionMismatch { .. } | SplitError::TooFewFolds(_) => {
                usage(e.to_string())
            }
            _ => data(format!("{}: {e}", args.manifest.display())),
        }
    })?;

    write_fold_plan(&args.out, &plan)?;
    println!(
        "split {} ids (seed {seed}): pool {}, test {} -> {}",
        records.len(),
        plan.pool().len(),
        plan.test_len(),
        args.out.display()
    );
    for fold in 0..plan.k() {
        println!("fold {fold}: train {} val {}", plan.train_len(fold), plan.val_len(fold));
    }
    Ok(())
}
