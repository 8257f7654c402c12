//! Weighted fusion of per-view probabilities into a single screening
//! decision: a convex combination over the views actually present, followed
//! by an argmax with a referral-conservative tie-break.

use crate::classify::{ProbVector, View};
use alloc::collections::BTreeMap;
use alloc::string::String;

/// Per-view fusion weights. The original view dominates by default; the
/// cropped and polar views share a smaller weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleConfig {
    /// Indexed by [`View::index`].
    weights: [f64; 3],
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { weights: [2.0, 0.5, 0.5] }
    }
}

/// Ensemble configuration and fusion failures.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleError {
    NegativeWeight { view: View, weight: f64 },
    AllWeightsZero,
    NoViews,
    UnknownKey(String),
    BadValue { key: String, value: String },
}

impl core::fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::NegativeWeight { view, weight } => {
                write!(f, "weight.{} = {weight} is not a finite nonnegative value", view.as_str())
            }
            Self::AllWeightsZero => write!(f, "all applicable fusion weights are zero"),
            Self::NoViews => write!(f, "no views to fuse"),
            Self::UnknownKey(k) => write!(f, "unknown ensemble config key: {k}"),
            Self::BadValue { key, value } => write!(f, "bad value for {key}: {value:?}"),
        }
    }
}

impl core::error::Error for EnsembleError {}

impl EnsembleConfig {
    pub fn new(original: f64, cropped: f64, polar: f64) -> Result<Self, EnsembleError> {
        let cfg = Self { weights: [original, cropped, polar] };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), EnsembleError> {
        for view in View::ALL {
            let w = self.weights[view.index()];
            if !(w >= 0.0 && w.is_finite()) {
                return Err(EnsembleError::NegativeWeight { view, weight: w });
            }
        }
        if self.weights.iter().all(|&w| w == 0.0) {
            return Err(EnsembleError::AllWeightsZero);
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, view: View) -> f64 {
        self.weights[view.index()]
    }

    /// Applies `weight.original` / `weight.cropped` / `weight.polar` pairs on
    /// top of the defaults; unknown keys and unparsable values are errors.
    pub fn parse_kv<'a, I>(pairs: I) -> Result<Self, EnsembleError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut cfg = Self::default();
        for (key, value) in pairs {
            let view = match key {
                "weight.original" => View::Original,
                "weight.cropped" => View::Cropped,
                "weight.polar" => View::Polar,
                other => return Err(EnsembleError::UnknownKey(String::from(other))),
            };
            let w: f64 = value.trim().parse().map_err(|_| EnsembleError::BadValue {
                key: String::from(key),
                value: String::from(value),
            })?;
            cfg.weights[view.index()] = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Weighted mean of the probabilities over the views present:
/// `p̂ = Σ w_n·p_n / Σ w_n`. Views absent from `preds` drop out and the
/// remaining weights renormalize.
pub fn fuse(
    preds: &BTreeMap<View, ProbVector>,
    cfg: &EnsembleConfig,
) -> Result<ProbVector, EnsembleError> {
    cfg.validate()?;
    if preds.is_empty() {
        return Err(EnsembleError::NoViews);
    }
    let mut acc = [0.0f64; 2];
    let mut total = 0.0f64;
    for (&view, p) in preds {
        let w = cfg.weight(view);
        acc[0] += w * p.p0();
        acc[1] += w * p.p1();
        total += w;
    }
    if total == 0.0 {
        return Err(EnsembleError::AllWeightsZero);
    }
    // Inputs sum to 1 within 1e-9 each, so the combination does too, up to
    // accumulation ulps; the lenient constructor absorbs those.
    Ok(ProbVector::new_normalized(acc[0] / total, acc[1] / total, 1e-8)
        .expect("convex combination of probability vectors"))
}

/// Argmax label; a tie within 1e-12 resolves to label 1 (refer), since a
/// false referral is cheaper than a missed case.
pub fn decide(p: &ProbVector) -> u8 {
    if (p.p0() - p.p1()).abs() < 1e-12 {
        1
    } else {
        u8::from(p.p1() > p.p0())
    }
}
