//! One module per subcommand. Each exposes a clap `Args` struct and a
//! `run(&args, &ctx)` entry point returning a [`crate::Result`].

pub mod crossval;
pub mod eval;
pub mod fuse;
pub mod predict;
pub mod preprocess;
pub mod split;
pub mod synth;
pub mod train;

use crate::error::{usage, Result};
use fundus_core::classify::View;
use std::path::{Path, PathBuf};

/// Resolves a manifest `path` column against the image root, which defaults
/// to the manifest's own directory.
pub(crate) fn image_path(manifest: &Path, image_root: Option<&Path>, rel: &str) -> PathBuf {
    let rel = Path::new(rel);
    if rel.is_absolute() {
        return rel.to_path_buf();
    }
    match image_root {
        Some(root) => root.join(rel),
        None => manifest.parent().unwrap_or(Path::new(".")).join(rel),
    }
}

/// clap value parser for `--view`.
pub(crate) fn parse_view(s: &str) -> std::result::Result<View, String> {
    View::parse(s).ok_or_else(|| format!("unknown view {s:?} (expected original|cropped|polar)"))
}

/// Fold index bounds check shared by train/predict.
pub(crate) fn check_fold(fold: u32, k: u32) -> Result<()> {
    if fold >= k {
        return Err(usage(format!("fold {fold} out of range for a {k}-fold plan")));
    }
    Ok(())
}
