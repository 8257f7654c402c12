//! Probability vectors, softmax and weighted cross-entropy with analytic
//! gradient, mean-pooled luminance features, and a small multinomial
//! logistic-regression reference model trained by mini-batch SGD with
//! checkpoint-on-best-validation-AUC.
//!
//! The reference model stands in for the heavyweight per-view networks a
//! production system would train; everything around it (loss, ensembling,
//! metrics, file formats) is exercised identically either way.

use crate::augment::{augment, AugmentPolicy};
use crate::dataset::ClassWeights;
use crate::metrics;
use crate::raster::Raster;
use crate::rng::{stream, CounterRng};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Two-class probability vector; entries in `[0,1]`, sum within 1e-9 of 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbVector {
    p: [f64; 2],
}

/// Probability-vector violations.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbError {
    OutOfRange(f64),
    BadSum(f64),
}

impl core::fmt::Display for ProbError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::OutOfRange(v) => write!(f, "probability {v} outside [0, 1]"),
            Self::BadSum(s) => write!(f, "probabilities sum to {s}, not 1"),
        }
    }
}

impl core::error::Error for ProbError {}

impl ProbVector {
    /// Strict constructor: sum must be within 1e-9 of 1.
    pub fn new(p0: f64, p1: f64) -> Result<Self, ProbError> {
        for v in [p0, p1] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ProbError::OutOfRange(v));
            }
        }
        let sum = p0 + p1;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ProbError::BadSum(sum));
        }
        Ok(Self { p: [p0, p1] })
    }

    /// Lenient constructor for values from text files: accepts a sum within
    /// `tolerance` of 1 and renormalizes when needed.
    pub fn new_normalized(p0: f64, p1: f64, tolerance: f64) -> Result<Self, ProbError> {
        for v in [p0, p1] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ProbError::OutOfRange(v));
            }
        }
        let sum = p0 + p1;
        if (sum - 1.0).abs() > tolerance {
            return Err(ProbError::BadSum(sum));
        }
        if (sum - 1.0).abs() <= 1e-9 {
            Ok(Self { p: [p0, p1] })
        } else {
            Ok(Self { p: [p0 / sum, p1 / sum] })
        }
    }

    #[inline]
    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    #[inline]
    pub fn p1(&self) -> f64 {
        self.p[1]
    }

    #[inline]
    pub fn get(&self, class: u8) -> f64 {
        self.p[usize::from(class.min(1))]
    }
}

/// The three pipeline views.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum View {
    Original,
    Cropped,
    Polar,
}

impl View {
    pub const ALL: [View; 3] = [View::Original, View::Cropped, View::Polar];

    pub fn as_str(&self) -> &'static str {
        match self {
            View::Original => "original",
            View::Cropped => "cropped",
            View::Polar => "polar",
        }
    }

    pub fn parse(s: &str) -> Option<View> {
        match s {
            "original" => Some(View::Original),
            "cropped" => Some(View::Cropped),
            "polar" => Some(View::Polar),
            _ => None,
        }
    }

    #[inline]
    pub fn index(&self) -> usize {
        *self as usize
    }
}

/// One model output row: which sample, which view, which probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionRecord {
    pub id: String,
    pub view: View,
    pub probs: ProbVector,
}

/// Numerically stable two-class softmax.
pub fn softmax(logits: [f64; 2]) -> ProbVector {
    let m = logits[0].max(logits[1]);
    let e0 = libm::exp(logits[0] - m);
    let e1 = libm::exp(logits[1] - m);
    let sum = e0 + e1;
    ProbVector { p: [e0 / sum, e1 / sum] }
}

/// Weighted cross-entropy: `-w_label * ln(p_label)`, probability clamped at
/// 1e-12 so confident errors stay finite.
pub fn weighted_ce(probs: &ProbVector, label: u8, weights: &ClassWeights) -> f64 {
    let p = probs.get(label).max(1e-12);
    -weights.get(label) * libm::log(p)
}

/// Analytic gradient of `weighted_ce(softmax(logits), label)` w.r.t. logits:
/// `w_label * (softmax_j - [j == label])`.
pub fn weighted_ce_grad(logits: [f64; 2], label: u8, weights: &ClassWeights) -> [f64; 2] {
    let p = softmax(logits);
    let w = weights.get(label);
    let mut g = [w * p.p0(), w * p.p1()];
    g[usize::from(label.min(1))] -= w;
    g
}

/// Feature layout: luminance mean-pooled to `downsample x downsample`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub downsample: u32,
    pub channels: u8,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self { downsample: 16, channels: 1 }
    }
}

impl FeatureSpec {
    pub fn feature_len(&self) -> usize {
        (self.downsample * self.downsample) as usize
    }
}

/// Feature-extraction failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureError {
    /// View is not the expected 256x256.
    BadViewSize { width: u32, height: u32 },
    /// Pool size must divide the 256 px view side.
    BadDownsample(u32),
}

impl core::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::BadViewSize { width, height } => {
                write!(f, "expected a 256x256 view, got {width}x{height}")
            }
            Self::BadDownsample(d) => write!(f, "downsample {d} does not divide 256"),
        }
    }
}

impl core::error::Error for FeatureError {}

/// The side every view is normalized to.
pub const VIEW_SIDE: u32 = 256;

/// Luminance mean-pooling to `spec.downsample` per side, scaled to `[0, 1]`.
pub fn extract_features(view: &Raster, spec: &FeatureSpec) -> Result<Vec<f64>, FeatureError> {
    if view.width() != VIEW_SIDE || view.height() != VIEW_SIDE {
        return Err(FeatureError::BadViewSize { width: view.width(), height: view.height() });
    }
    let s = spec.downsample;
    if s == 0 || VIEW_SIDE % s != 0 {
        return Err(FeatureError::BadDownsample(s));
    }
    let block = VIEW_SIDE / s;
    let norm = 255.0 * f64::from(block) * f64::from(block);
    let mut features = vec![0.0f64; spec.feature_len()];
    for y in 0..VIEW_SIDE {
        let fy = (y / block) as usize;
        for x in 0..VIEW_SIDE {
            features[fy * s as usize + (x / block) as usize] += f64::from(view.luma_at(x, y));
        }
    }
    for f in &mut features {
        *f /= norm;
    }
    Ok(features)
}

/// Multinomial logistic regression over pooled-luminance features.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    /// Row-major `[class][feature]` weight matrix.
    pub weights: Vec<f64>,
    pub bias: [f64; 2],
    pub spec: FeatureSpec,
}

impl LinearModel {
    /// Zero-initialized model (uniform predictions).
    pub fn zeroed(spec: FeatureSpec) -> Self {
        Self { weights: vec![0.0; 2 * spec.feature_len()], bias: [0.0; 2], spec }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let expect = 2 * self.spec.feature_len();
        if self.weights.len() != expect {
            return Err(TrainError::ShapeMismatch { expected: expect, actual: self.weights.len() });
        }
        if self.weights.iter().chain(self.bias.iter()).any(|v| !v.is_finite()) {
            return Err(TrainError::NonFiniteParameters);
        }
        Ok(())
    }

    /// Class logits for a feature vector.
    pub fn logits(&self, features: &[f64]) -> [f64; 2] {
        let n = self.spec.feature_len();
        debug_assert_eq!(features.len(), n);
        let mut out = self.bias;
        for (class, slot) in out.iter_mut().enumerate() {
            let row = &self.weights[class * n..(class + 1) * n];
            *slot += row.iter().zip(features).map(|(w, x)| w * x).sum::<f64>();
        }
        out
    }

    /// Softmax probabilities for a feature vector.
    pub fn predict_features(&self, features: &[f64]) -> ProbVector {
        softmax(self.logits(features))
    }
}

/// Softmax probabilities for a view image.
pub fn predict(model: &LinearModel, view: &Raster) -> Result<ProbVector, FeatureError> {
    let features = extract_features(view, &model.spec)?;
    Ok(model.predict_features(&features))
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub spec: FeatureSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
            spec: FeatureSpec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrainError::BadConfig("epochs and batch_size must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::BadConfig("learning_rate must be finite and positive"));
        }
        Ok(())
    }
}

/// A labeled view image, borrowed from the caller's store.
#[derive(Clone, Copy, Debug)]
pub struct LabeledImage<'a> {
    pub image: &'a Raster,
    pub label: u8,
}

/// Training failures.
#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    SingleClassTrainingSet,
    EmptyTrainingSet,
    BadConfig(&'static str),
    ShapeMismatch { expected: usize, actual: usize },
    NonFiniteParameters,
    Feature(FeatureError),
}

impl core::fmt::Display for TrainError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::SingleClassTrainingSet => write!(f, "training set contains a single class"),
            Self::EmptyTrainingSet => write!(f, "training set is empty"),
            Self::BadConfig(msg) => write!(f, "invalid training config: {msg}"),
            Self::ShapeMismatch { expected, actual } => {
                write!(f, "parameter shape mismatch: expected {expected}, got {actual}")
            }
            Self::NonFiniteParameters => write!(f, "model parameters are not finite"),
            Self::Feature(e) => write!(f, "feature extraction failed: {e}"),
        }
    }
}

impl core::error::Error for TrainError {}

impl From<FeatureError> for TrainError {
    fn from(e: FeatureError) -> Self {
        TrainError::Feature(e)
    }
}

/// Per-epoch training diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochStats {
    /// Mean weighted cross-entropy over the (un-augmented) training set,
    /// with the parameters as of the end of the epoch.
    pub train_loss: f64,
    /// Validation AUC, when the validation set supports one.
    pub val_auc: Option<f64>,
}

/// Everything a training run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation AUC
    /// (checkpoint-on-best); final-epoch parameters if no AUC was available.
    pub model: LinearModel,
    pub history: Vec<EpochStats>,
    /// Epoch index (0-based) the returned parameters come from.
    pub best_epoch: u32,
}

/// Trains the reference model from zero-initialized parameters.
pub fn train_reference(
    train: &[LabeledImage],
    val: &[LabeledImage],
    weights: &ClassWeights,
    cfg: &TrainConfig,
    policy: &AugmentPolicy,
) -> Result<TrainOutcome, TrainError> {
    train_from(None, train, val, weights, cfg, policy)
}

/// Trains starting from `init` parameters when given (fine-tuning),
/// otherwise from zeros.
///
/// Mini-batch SGD on the mean weighted cross-entropy: each epoch shuffles
/// the training order with a seeded counter stream (`cfg.seed`, epoch), and
/// augmentation draws use `policy.seed` with sample index `epoch * n + i`,
/// so the whole run is a pure function of `(data order, seeds, config)`.
pub fn train_from(
    init: Option<&LinearModel>,
    train: &[LabeledImage],
    val: &[LabeledImage],
    weights: &ClassWeights,
    cfg: &TrainConfig,
    policy: &AugmentPolicy,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let train_labels: Vec<u8> = train.iter().map(|s| s.label).collect();
    check_two_classes(&train_labels)?;
    // Un-augmented features: the training inputs when the policy is an
    // identity, and the basis for the per-epoch loss diagnostic either way.
    let clean_features = feature_table(train, &cfg.spec)?;
    let val_features = feature_table(val, &cfg.spec)?;
    let val_labels: Vec<u8> = val.iter().map(|s| s.label).collect();
    let source = if policy.is_identity() {
        Source::Static(&clean_features)
    } else {
        Source::Augmented { samples: train, policy, spec: cfg.spec }
    };
    run_sgd(
        initial_model(init, cfg)?,
        &source,
        &clean_features,
        &train_labels,
        &val_features,
        &val_labels,
        weights,
        cfg,
    )
}

/// Trains on caller-supplied feature vectors (no augmentation path). This is
/// the fast route when many models share one extraction pass.
pub fn train_on_features(
    init: Option<&LinearModel>,
    train_features: &[Vec<f64>],
    train_labels: &[u8],
    val_features: &[Vec<f64>],
    val_labels: &[u8],
    weights: &ClassWeights,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if train_features.len() != train_labels.len() || val_features.len() != val_labels.len() {
        return Err(TrainError::ShapeMismatch {
            expected: train_labels.len(),
            actual: train_features.len(),
        });
    }
    check_two_classes(train_labels)?;
    let want = cfg.spec.feature_len();
    for f in train_features.iter().chain(val_features) {
        if f.len() != want {
            return Err(TrainError::ShapeMismatch { expected: want, actual: f.len() });
        }
    }
    run_sgd(
        initial_model(init, cfg)?,
        &Source::Static(train_features),
        train_features,
        train_labels,
        val_features,
        val_labels,
        weights,
        cfg,
    )
}

fn check_two_classes(labels: &[u8]) -> Result<(), TrainError> {
    if labels.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if labels.iter().all(|&l| l == 0) || labels.iter().all(|&l| l != 0) {
        return Err(TrainError::SingleClassTrainingSet);
    }
    Ok(())
}

fn initial_model(init: Option<&LinearModel>, cfg: &TrainConfig) -> Result<LinearModel, TrainError> {
    match init {
        Some(m) => {
            m.validate()?;
            let mut m = m.clone();
            m.spec = cfg.spec;
            m.validate()?;
            Ok(m)
        }
        None => Ok(LinearModel::zeroed(cfg.spec)),
    }
}

/// Where each mini-batch sample's features come from.
enum Source<'a> {
    Static(&'a [Vec<f64>]),
    Augmented { samples: &'a [LabeledImage<'a>], policy: &'a AugmentPolicy, spec: FeatureSpec },
}

impl Source<'_> {
    fn fetch<'s>(
        &'s self,
        epoch: u32,
        i: usize,
        buf: &'s mut Vec<f64>,
    ) -> Result<&'s [f64], TrainError> {
        match self {
            Source::Static(table) => Ok(&table[i]),
            Source::Augmented { samples, policy, spec } => {
                let sample_index = u64::from(epoch) * samples.len() as u64 + i as u64;
                let img = augment(samples[i].image, policy, sample_index);
                *buf = extract_features(&img, spec)?;
                Ok(buf)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sgd(
    mut model: LinearModel,
    source: &Source,
    clean_features: &[Vec<f64>],
    train_labels: &[u8],
    val_features: &[Vec<f64>],
    val_labels: &[u8],
    weights: &ClassWeights,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    let n_features = cfg.spec.feature_len();
    let mut order: Vec<usize> = (0..train_labels.len()).collect();
    let mut best: Option<(f64, u32, LinearModel)> = None;
    let mut history = Vec::with_capacity(cfg.epochs as usize);
    let mut grad_w = vec![0.0f64; 2 * n_features];
    let mut buf = Vec::new();

    for epoch in 0..cfg.epochs {
        let mut rng = CounterRng::new(cfg.seed, stream("sgd-order") ^ u64::from(epoch));
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            let mut grad_b = [0.0f64; 2];
            for &i in batch {
                let features = source.fetch(epoch, i, &mut buf)?;
                let g = weighted_ce_grad(model.logits(features), train_labels[i], weights);
                for (class, &gc) in g.iter().enumerate() {
                    let row = &mut grad_w[class * n_features..(class + 1) * n_features];
                    for (slot, &x) in row.iter_mut().zip(features) {
                        *slot += gc * x;
                    }
                    grad_b[class] += gc;
                }
            }
            let step = cfg.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad_w) {
                *w -= step * g;
            }
            for (b, g) in model.bias.iter_mut().zip(&grad_b) {
                *b -= step * g;
            }
        }

        let train_loss = mean_loss(&model, clean_features, train_labels, weights);
        let val_auc = if val_labels.is_empty() {
            None
        } else {
            let scores: Vec<f64> =
                val_features.iter().map(|f| model.predict_features(f).p1()).collect();
            metrics::roc_auc(&scores, val_labels).ok()
        };
        if let Some(auc) = val_auc {
            let improved = best.as_ref().is_none_or(|(b, _, _)| auc > *b);
            if improved {
                best = Some((auc, epoch, model.clone()));
            }
        }
        history.push(EpochStats { train_loss, val_auc });
    }

    let (model, best_epoch) = match best {
        Some((_, epoch, m)) => (m, epoch),
        None => (model, cfg.epochs - 1),
    };
    model.validate()?;
    Ok(TrainOutcome { model, history, best_epoch })
}

fn feature_table(samples: &[LabeledImage], spec: &FeatureSpec) -> Result<Vec<Vec<f64>>, TrainError> {
    samples
        .iter()
        .map(|s| extract_features(s.image, spec).map_err(TrainError::from))
        .collect()
}

fn mean_loss(
    model: &LinearModel,
    features: &[Vec<f64>],
    labels: &[u8],
    weights: &ClassWeights,
) -> f64 {
    let total: f64 = features
        .iter()
        .zip(labels)
        .map(|(f, &label)| weighted_ce(&model.predict_features(f), label, weights))
        .sum();
    total / labels.len() as f64
}
