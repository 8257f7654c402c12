//! `fundus synth`: render a seeded synthetic fundus dataset to
//! `<out>/images/` with a `manifest.csv` alongside.

use crate::csvio::write_manifest;
use crate::error::{usage, Result};
use crate::pngio::save_png;
use crate::util::ensure_dir;
use crate::Ctx;
use fundus_core::dataset::synth::{plan_labels, render, Appearance, SynthConfig};
use fundus_core::dataset::ManifestRecord;
use rayon::prelude::*;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum AppearanceKind {
    /// The default imaging domain.
    Standard,
    /// A brighter, larger-disc domain for transfer experiments.
    Shifted,
}

#[derive(clap::Args, Debug)]
pub struct SynthArgs {
    /// Number of images to generate (at least 2).
    #[arg(long)]
    pub n: usize,
    /// Class imbalance as negatives per positive; 9 means a 9:1 screen.
    #[arg(long, default_value_t = 9.0)]
    pub imbalance: f64,
    /// Side of the square originals, in pixels (at least 32).
    #[arg(long, default_value_t = 448)]
    pub size: u32,
    /// Imaging domain to draw appearances from.
    #[arg(long, value_enum, default_value_t = AppearanceKind::Standard)]
    pub appearance: AppearanceKind,
    /// Output directory; receives images/ and manifest.csv.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SynthArgs, ctx: &Ctx) -> Result<()> {
    if args.n < 2 {
        return Err(usage("--n must be at least 2 (one sample per class)"));
    }
    if !(args.imbalance > 0.0 && args.imbalance.is_finite()) {
        return Err(usage("--imbalance must be a positive finite ratio"));
    }
    if args.size < 32 {
        return Err(usage("--size must be at least 32"));
    }
    let seed = ctx.seed.unwrap_or(17);
    let appearance = match args.appearance {
        AppearanceKind::Standard => Appearance::standard(),
        AppearanceKind::Shifted => Appearance::shifted(),
    };
    let cfg = SynthConfig::new(args.n, args.imbalance, args.size, seed).with_appearance(appearance);
    let labels = plan_labels(&cfg);

    let images_dir = args.out.join("images");
    ensure_dir(&images_dir)?;
    let records: Vec<ManifestRecord> = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| ManifestRecord {
            id: format!("synth{i:06}"),
            path: format!("images/synth{i:06}.png"),
            label,
        })
        .collect();

    ctx.pool.install(|| {
        records
            .par_iter()
            .enumerate()
            .try_for_each(|(i, record)| {
                let img = render(&cfg, i as u64, record.label);
                save_png(&args.out.join(&record.path), &img)
            })
    })?;

    let manifest = args.out.join("manifest.csv");
    write_manifest(&manifest, &records)?;
    let positives = labels.iter().filter(|&&l| l == 1).count();
    println!(
        "synthesized {} images ({} referable, seed {seed}) -> {}",
        args.n,
        positives,
        manifest.display()
    );
    Ok(())
}
