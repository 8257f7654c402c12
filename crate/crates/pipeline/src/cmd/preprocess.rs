//! `fundus preprocess`: run segmentation-guided cropping over a manifest and
//! materialize the three model views per sample, plus an index and fallback
//! statistics.

use crate::cmd::image_path;
use crate::csvio::{write_view_index, ViewIndexRow};
use crate::error::{data, Result};
use crate::pngio::{load_pgm_mask, load_png, save_png};
use crate::util::{atomic_write, ensure_dir, require_exists};
use crate::Ctx;
use fundus_core::classify::View;
use fundus_core::segment::{
    preprocess_sample, BrightnessBlobSegmenter, Mask, SegmentError, Segmenter,
};
use fundus_core::Raster;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

#[derive(clap::Args, Debug)]
pub struct PreprocessArgs {
    /// Input manifest (id,path,label).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory manifest paths are relative to (default: the manifest's).
    #[arg(long)]
    pub image_root: Option<PathBuf>,
    /// Directory of precomputed `<id>.pgm` disc masks in the working frame;
    /// replaces the built-in segmenter.
    #[arg(long)]
    pub masks: Option<PathBuf>,
    /// Output directory; receives original/, cropped/, polar/, views.csv,
    /// and stats.txt.
    #[arg(long)]
    pub out: PathBuf,
}

/// Segmentation source: the built-in brightness segmenter, or a directory of
/// externally produced masks.
enum Seg {
    Auto(BrightnessBlobSegmenter),
    FromDir(PathBuf),
}

impl Segmenter for Seg {
    fn segment(&self, id: &str, img256: &Raster) -> std::result::Result<Mask, SegmentError> {
        match self {
            Seg::Auto(s) => s.segment(id, img256),
            Seg::FromDir(dir) => load_pgm_mask(&dir.join(format!("{id}.pgm")))
                .map_err(|e| SegmentError::External(e.to_string())),
        }
    }
}

impl Seg {
    fn new(masks: Option<&Path>) -> Result<Self> {
        match masks {
            Some(dir) => {
                require_exists(dir, "masks directory")?;
                Ok(Seg::FromDir(dir.to_path_buf()))
            }
            None => Ok(Seg::Auto(BrightnessBlobSegmenter)),
        }
    }
}

/// Summary counters reported by preprocessing.
pub struct PreprocessStats {
    pub samples: usize,
    pub fallbacks: usize,
}

impl PreprocessStats {
    pub fn rate(&self) -> f64 {
        self.fallbacks as f64 / self.samples as f64
    }
}

/// The work behind `fundus preprocess`, reusable by `crossval`: builds the
/// three views for every manifest record into `out` and writes the
/// `views.csv` index. Returns the index rows plus fallback statistics.
pub fn build_views(
    manifest: &Path,
    image_root: Option<&Path>,
    masks: Option<&Path>,
    out: &Path,
    ctx: &Ctx,
) -> Result<(Vec<ViewIndexRow>, PreprocessStats)> {
    require_exists(manifest, "manifest")?;
    let records = crate::csvio::read_manifest(manifest)?;
    if records.is_empty() {
        return Err(data(format!("{}: manifest has no rows", manifest.display())));
    }
    let seg = Seg::new(masks)?;
    let params = ctx.config.preprocess_params();
    for view in View::ALL {
        ensure_dir(&out.join(view.as_str()))?;
    }

    let rows: Result<Vec<ViewIndexRow>> = ctx.pool.install(|| {
        records
            .par_iter()
            .map(|record| {
                let src = image_path(manifest, image_root, &record.path);
                let original = load_png(&src)?;
                let views = preprocess_sample(&record.id, &original, &seg, &params)
                    .map_err(|e| data(format!("{}: {e}", record.id)))?;
                let mut row = ViewIndexRow {
                    id: record.id.clone(),
                    label: record.label,
                    original: PathBuf::new(),
                    cropped: PathBuf::new(),
                    polar: PathBuf::new(),
                    used_fallback: views.used_fallback,
                };
                for (view, img) in [
                    (View::Original, &views.original_view),
                    (View::Cropped, &views.cropped_view),
                    (View::Polar, &views.polar_view),
                ] {
                    let rel = PathBuf::from(view.as_str()).join(format!("{}.png", record.id));
                    save_png(&out.join(&rel), img)?;
                    match view {
                        View::Original => row.original = rel,
                        View::Cropped => row.cropped = rel,
                        View::Polar => row.polar = rel,
                    }
                }
                Ok(row)
            })
            .collect()
    });
    let rows = rows?;

    write_view_index(&out.join("views.csv"), &rows)?;
    let stats = PreprocessStats {
        samples: rows.len(),
        fallbacks: rows.iter().filter(|r| r.used_fallback).count(),
    };
    let text = format!(
        "samples {}\nfallbacks {}\nfallback_rate {:.6}\n",
        stats.samples,
        stats.fallbacks,
        stats.rate()
    );
    atomic_write(&out.join("stats.txt"), text.as_bytes())?;
    Ok((rows, stats))
}

pub fn run(args: &PreprocessArgs, ctx: &Ctx) -> Result<()> {
    if let Some(root) = &args.image_root {
        require_exists(root, "image root")?;
    }
    let (rows, stats) =
        build_views(&args.manifest, args.image_root.as_deref(), args.masks.as_deref(), &args.out, ctx)?;
    debug_assert_eq!(rows.len(), stats.samples);
    println!(
        "preprocessed {} samples -> {} (fallbacks: {} = {:.2}%)",
        stats.samples,
        args.out.display(),
        stats.fallbacks,
        100.0 * stats.rate()
    );
    Ok(())
}
