//! `fundus fuse`: weighted-average per-view prediction files into one fused
//! prediction CSV. Weights come from the resolved configuration; ids missing
//! a view are renormalized over the views they do have.

use crate::csvio::{read_predictions, write_predictions, WirePrediction, WireView};
use crate::error::{data, Result};
use crate::util::require_exists;
use crate::Ctx;
use fundus_core::classify::{ProbVector, View};
use fundus_core::ensemble::{fuse, EnsembleConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(clap::Args, Debug)]
pub struct FuseArgs {
    /// Per-view prediction CSVs to combine.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Output fused prediction CSV.
    #[arg(long)]
    pub out: PathBuf,
}

/// Groups per-view rows by id (first-appearance order) and fuses each group.
/// Shared with `crossval`.
pub(crate) fn fuse_rows(
    rows: &[WirePrediction],
    weights: &EnsembleConfig,
) -> Result<Vec<WirePrediction>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, BTreeMap<View, ProbVector>> = BTreeMap::new();
    for row in rows {
        let view = match row.view {
            WireView::View(v) => v,
            WireView::Fused => {
                return Err(data(format!("{}: already fused; refusing to fuse again", row.id)))
            }
        };
        let group = groups.entry(&row.id).or_insert_with(|| {
            order.push(&row.id);
            BTreeMap::new()
        });
        if group.insert(view, row.probs).is_some() {
            return Err(data(format!("duplicate {} prediction for id {}", view.as_str(), row.id)));
        }
    }
    order
        .iter()
        .map(|id| {
            let probs = fuse(&groups[id], weights)
                .map_err(|e| data(format!("id {id}: {e}")))?;
            Ok(WirePrediction { id: String::from(*id), view: WireView::Fused, probs })
        })
        .collect()
}

pub fn run(args: &FuseArgs, ctx: &Ctx) -> Result<()> {
    let weights = ctx.config.ensemble_config()?;
    let mut rows = Vec::new();
    for input in &args.inputs {
        require_exists(input, "prediction file")?;
        rows.extend(read_predictions(input)?);
    }
    if rows.is_empty() {
        return Err(data("no prediction rows in the inputs"));
    }
    let fused = fuse_rows(&rows, &weights)?;
    write_predictions(&args.out, &fused)?;
    println!("fused {} ids from {} inputs -> {}", fused.len(), args.inputs.len(), args.out.display());
    Ok(())
}
