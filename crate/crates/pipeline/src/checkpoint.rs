//! Model checkpoints: a small line-oriented text format with a versioned
//! header. Parameters are written with 17 significant digits so every f64
//! round-trips exactly.

use crate::error::{data, io_data, Result};
use crate::util::atomic_write;
use fundus_core::classify::{FeatureSpec, LinearModel};
use std::path::Path;

const MAGIC: &str = "fundus-linear-model v1";

/// A trained model plus the preprocessing it expects at inference time.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: LinearModel,
    /// Whether contrast equalization was applied to views before feature
    /// extraction during training; prediction must match.
    pub clahe: bool,
}

pub fn save(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    ckpt.model
        .validate()
        .map_err(|e| data(format!("refusing to save invalid model: {e}")))?;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("downsample {}\n", ckpt.model.spec.downsample));
    out.push_str(&format!("channels {}\n", ckpt.model.spec.channels));
    out.push_str(&format!("clahe {}\n", u8::from(ckpt.clahe)));
    out.push_str(&format!("bias {:.17e} {:.17e}\n", ckpt.model.bias[0], ckpt.model.bias[1]));
    out.push_str(&format!("weights {}\n", ckpt.model.weights.len()));
    for w in &ckpt.model.weights {
        out.push_str(&format!("{w:.17e}\n"));
    }
    atomic_write(path, out.as_bytes())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| io_data(path, e))?;
    let mut lines = text.lines().enumerate();
    let fail = |line: usize, msg: &str| data(format!("{}:{}: {msg}", path.display(), line + 1));

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| data(format!("{}: truncated checkpoint, missing {what}", path.display())))
    };

    let (n, magic) = next("header")?;
    if magic != MAGIC {
        return Err(fail(n, &format!("not a {MAGIC} file")));
    }

    let mut field = |name: &str| -> Result<(usize, String)> {
        let (n, line) = next(name)?;
        let rest = line
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| fail(n, &format!("expected `{name} ...`")))?;
        Ok((n, rest.to_string()))
    };

    let (n, downsample) = field("downsample")?;
    let downsample: u32 = downsample.parse().map_err(|_| fail(n, "bad downsample"))?;
    let (n, channels) = field("channels")?;
    let channels: u8 = channels.parse().map_err(|_| fail(n, "bad channels"))?;
    let (n, clahe) = field("clahe")?;
    let clahe = match clahe.as_str() {
        "0" => false,
        "1" => true,
        _ => return Err(fail(n, "clahe must be 0 or 1")),
    };
    let (n, bias_line) = field("bias")?;
    let bias_parts: Vec<&str> = bias_line.split(' ').collect();
    if bias_parts.len() != 2 {
        return Err(fail(n, "bias needs exactly two values"));
    }
    let mut bias = [0.0f64; 2];
    for (slot, part) in bias.iter_mut().zip(&bias_parts) {
        *slot = part.parse().map_err(|_| fail(n, "bad bias value"))?;
    }
    let (n, count) = field("weights")?;
    let count: usize = count.parse().map_err(|_| fail(n, "bad weight count"))?;

    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, line) = next("weight")?;
        weights.push(line.parse::<f64>().map_err(|_| fail(n, "bad weight value"))?);
    }
    if let Some((n, extra)) = lines.next() {
        if !extra.trim().is_empty() {
            return Err(fail(n, "trailing content after weights"));
        }
    }

    let model = LinearModel { weights, bias, spec: FeatureSpec { downsample, channels } };
    model
        .validate()
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    Ok(Checkpoint { model, clahe })
}
