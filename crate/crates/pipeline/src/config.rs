//! Experiment configuration: defaults, `key = value` file parsing, flag
//! overrides, and the resolved dump copied into every output directory.

use crate::error::{io_data, usage, Result};
use fundus_core::augment::AugmentPolicy;
use fundus_core::classify::{FeatureSpec, TrainConfig};
use fundus_core::ensemble::EnsembleConfig;
use fundus_core::segment::PreprocessParams;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Everything one experiment needs, resolvable from (defaults < config file
/// < command-line flags).
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub image_root: Option<PathBuf>,
    pub work_dir: Option<PathBuf>,

    pub clahe_clip: f64,
    pub clahe_grid: u32,
    pub pad_fraction: f64,
    pub pad_min_px: u32,
    pub fallback_side: u32,
    pub frame: u32,
    pub majority_fraction: f64,
    pub min_crop_px: u32,

    pub test_count: usize,
    pub k: u32,
    pub val_fraction: f64,
    pub split_seed: u64,

    pub epochs: u32,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub train_seed: u64,
    pub downsample: u32,
    /// Contrast-equalize views before feature extraction (recorded in the
    /// model checkpoint so prediction matches).
    pub train_clahe: bool,

    pub augment_enabled: bool,
    pub hflip_prob: f64,
    pub vflip_prob: f64,
    pub rotation_deg: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub augment_seed: u64,

    pub weight_original: f64,
    pub weight_cropped: f64,
    pub weight_polar: f64,

    pub threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            image_root: None,
            work_dir: None,
            clahe_clip: 0.01,
            clahe_grid: 8,
            pad_fraction: 0.30,
            pad_min_px: 20,
            fallback_side: 272,
            frame: 256,
            majority_fraction: 0.5,
            min_crop_px: 8,
            test_count: 10_000,
            k: 5,
            val_fraction: 0.2,
            split_seed: 17,
            epochs: 50,
            batch_size: 64,
            learning_rate: 1e-3,
            train_seed: 17,
            downsample: 16,
            train_clahe: false,
            augment_enabled: false,
            hflip_prob: 0.5,
            vflip_prob: 0.5,
            rotation_deg: 10.0,
            scale_min: 0.9,
            scale_max: 1.1,
            augment_seed: 17,
            weight_original: 2.0,
            weight_cropped: 0.5,
            weight_polar: 0.5,
            threshold: 0.5,
        }
    }
}

impl RunConfig {
    /// Loads defaults, then applies a config file if given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| io_data(path, e))?;
            cfg.apply_file(&text, &path.display().to_string())?;
        }
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment. Unknown keys and
    /// duplicate keys are usage errors, with line numbers.
    pub fn apply_file(&mut self, text: &str, source: &str) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("{source}:{lineno}: expected `key = value`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(usage(format!("{source}:{lineno}: duplicate key {key}")));
            }
            self.set(key, value)
                .map_err(|msg| usage(format!("{source}:{lineno}: {msg}")))?;
        }
        Ok(())
    }

    /// One global `--seed` drives every stochastic stage.
    pub fn override_seed(&mut self, seed: u64) {
        self.split_seed = seed;
        self.train_seed = seed;
        self.augment_seed = seed;
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value.parse().map_err(|_| format!("bad value for {key}: {value:?}"))
        }
        fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
            match value {
                "true" | "1" => Ok(true),
                "false" | "0" => Ok(false),
                _ => Err(format!("bad value for {key}: {value:?} (expected true/false)")),
            }
        }
        match key {
            "paths.manifest" => self.manifest = Some(PathBuf::from(value)),
            "paths.image_root" => self.image_root = Some(PathBuf::from(value)),
            "paths.work" => self.work_dir = Some(PathBuf::from(value)),
            "preprocess.clahe_clip" => self.clahe_clip = parse(key, value)?,
            "preprocess.clahe_grid" => self.clahe_grid = parse(key, value)?,
            "preprocess.pad_fraction" => self.pad_fraction = parse(key, value)?,
            "preprocess.pad_min_px" => self.pad_min_px = parse(key, value)?,
            "preprocess.fallback_side" => self.fallback_side = parse(key, value)?,
            "preprocess.frame" => self.frame = parse(key, value)?,
            "preprocess.majority_fraction" => self.majority_fraction = parse(key, value)?,
            "preprocess.min_crop_px" => self.min_crop_px = parse(key, value)?,
            "split.test_count" => self.test_count = parse(key, value)?,
            "split.k" => self.k = parse(key, value)?,
            "split.val_fraction" => self.val_fraction = parse(key, value)?,
            "split.seed" => self.split_seed = parse(key, value)?,
            "train.epochs" => self.epochs = parse(key, value)?,
            "train.batch_size" => self.batch_size = parse(key, value)?,
            "train.learning_rate" => self.learning_rate = parse(key, value)?,
            "train.seed" => self.train_seed = parse(key, value)?,
            "train.downsample" => self.downsample = parse(key, value)?,
            "train.clahe" => self.train_clahe = parse_bool(key, value)?,
            "augment.enabled" => self.augment_enabled = parse_bool(key, value)?,
            "augment.hflip_prob" => self.hflip_prob = parse(key, value)?,
            "augment.vflip_prob" => self.vflip_prob = parse(key, value)?,
            "augment.rotation_deg" => self.rotation_deg = parse(key, value)?,
            "augment.scale_min" => self.scale_min = parse(key, value)?,
            "augment.scale_max" => self.scale_max = parse(key, value)?,
            "augment.seed" => self.augment_seed = parse(key, value)?,
            "weight.original" => self.weight_original = parse(key, value)?,
            "weight.cropped" => self.weight_cropped = parse(key, value)?,
            "weight.polar" => self.weight_polar = parse(key, value)?,
            "eval.threshold" => self.threshold = parse(key, value)?,
            _ => return Err(format!("unknown key {key}")),
        }
        Ok(())
    }

    pub fn preprocess_params(&self) -> PreprocessParams {
        PreprocessParams {
            frame: self.frame,
            clahe_clip: self.clahe_clip,
            clahe_grid: self.clahe_grid,
            pad_fraction: self.pad_fraction,
            pad_min_px: self.pad_min_px,
            fallback_side: self.fallback_side,
            majority_fraction: self.majority_fraction,
            min_crop_px: self.min_crop_px,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed: self.train_seed,
            spec: FeatureSpec { downsample: self.downsample, channels: 1 },
        }
    }

    /// The augmentation policy for training; identity unless enabled.
    pub fn augment_policy(&self) -> AugmentPolicy {
        if self.augment_enabled {
            AugmentPolicy {
                hflip_prob: self.hflip_prob,
                vflip_prob: self.vflip_prob,
                rotation_deg: self.rotation_deg,
                scale_range: (self.scale_min, self.scale_max),
                seed: self.augment_seed,
            }
        } else {
            AugmentPolicy::identity(self.augment_seed)
        }
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig> {
        EnsembleConfig::new(self.weight_original, self.weight_cropped, self.weight_polar)
            .map_err(|e| usage(format!("ensemble weights: {e}")))
    }

    /// Validates cross-field constraints that core types would otherwise
    /// only catch mid-run.
    pub fn validate(&self) -> Result<()> {
        if !(self.clahe_clip > 0.0 && self.clahe_clip <= 1.0) {
            return Err(usage(format!(
                "preprocess.clahe_clip must be in (0, 1], got {}",
                self.clahe_clip
            )));
        }
        if self.clahe_grid == 0 || self.frame == 0 {
            return Err(usage("preprocess.clahe_grid and preprocess.frame must be positive"));
        }
        if !(self.threshold >= 0.0 && self.threshold <= 1.0) {
            return Err(usage(format!("eval.threshold must be in [0, 1], got {}", self.threshold)));
        }
        self.train_config()
            .validate()
            .map_err(|e| usage(format!("train config: {e}")))?;
        // Validate the raw augmentation fields even when disabled, so a bad
        // config is caught before someone flips augment.enabled on.
        AugmentPolicy {
            hflip_prob: self.hflip_prob,
            vflip_prob: self.vflip_prob,
            rotation_deg: self.rotation_deg,
            scale_range: (self.scale_min, self.scale_max),
            seed: self.augment_seed,
        }
        .validate()
        .map_err(|e| usage(format!("augment policy: {e}")))?;
        self.ensemble_config()?;
        Ok(())
    }

    /// Deterministic `key = value` dump of the fully resolved config.
    pub fn render_resolved(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(p) = &self.manifest {
            kv("paths.manifest", p.display().to_string());
        }
        if let Some(p) = &self.image_root {
            kv("paths.image_root", p.display().to_string());
        }
        if let Some(p) = &self.work_dir {
            kv("paths.work", p.display().to_string());
        }
        kv("preprocess.clahe_clip", self.clahe_clip.to_string());
        kv("preprocess.clahe_grid", self.clahe_grid.to_string());
        kv("preprocess.pad_fraction", self.pad_fraction.to_string());
        kv("preprocess.pad_min_px", self.pad_min_px.to_string());
        kv("preprocess.fallback_side", self.fallback_side.to_string());
        kv("preprocess.frame", self.frame.to_string());
        kv("preprocess.majority_fraction", self.majority_fraction.to_string());
        kv("preprocess.min_crop_px", self.min_crop_px.to_string());
        kv("split.test_count", self.test_count.to_string());
        kv("split.k", self.k.to_string());
        kv("split.val_fraction", self.val_fraction.to_string());
        kv("split.seed", self.split_seed.to_string());
        kv("train.epochs", self.epochs.to_string());
        kv("train.batch_size", self.batch_size.to_string());
        kv("train.learning_rate", self.learning_rate.to_string());
        kv("train.seed", self.train_seed.to_string());
        kv("train.downsample", self.downsample.to_string());
        kv("train.clahe", self.train_clahe.to_string());
        kv("augment.enabled", self.augment_enabled.to_string());
        kv("augment.hflip_prob", self.hflip_prob.to_string());
        kv("augment.vflip_prob", self.vflip_prob.to_string());
        kv("augment.rotation_deg", self.rotation_deg.to_string());
        kv("augment.scale_min", self.scale_min.to_string());
        kv("augment.scale_max", self.scale_max.to_string());
        kv("augment.seed", self.augment_seed.to_string());
        kv("weight.original", self.weight_original.to_string());
        kv("weight.cropped", self.weight_cropped.to_string());
        kv("weight.polar", self.weight_polar.to_string());
        kv("eval.threshold", self.threshold.to_string());
        out
    }
}
