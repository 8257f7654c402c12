//! Feature extraction over preprocessed view directories, with an optional
//! on-disk cache so repeated runs against the same views skip PNG decoding.

use crate::csvio::ViewIndexRow;
use crate::error::{data, internal, io_data, Result};
use crate::pngio::load_png;
use crate::util::atomic_write;
use fundus_core::clahe::clahe;
use fundus_core::classify::{extract_features, FeatureSpec, View};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

const CACHE_MAGIC: &[u8] = b"fundus-feature-cache v1\n";

/// Extracted features for every sample in a view index, keyed by id.
/// The inner array is indexed by [`View::index`].
pub struct FeatureTable {
    pub spec: FeatureSpec,
    pub clahe: bool,
    rows: BTreeMap<String, [Vec<f64>; 3]>,
}

impl FeatureTable {
    pub fn get(&self, id: &str, view: View) -> Option<&[f64]> {
        self.rows.get(id).map(|r| r[view.index()].as_slice())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Features for `ids` in the given order; errors if any id is missing.
    pub fn gather(&self, ids: &[&str], view: View) -> Result<Vec<Vec<f64>>> {
        ids.iter()
            .map(|id| {
                self.get(id, view)
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| internal(format!("no features for id {id}")))
            })
            .collect()
    }
}

/// Decodes all three views of every sample and pools them into feature
/// vectors. `base` is the directory the index paths are relative to.
pub fn compute(
    base: &Path,
    index: &[ViewIndexRow],
    spec: FeatureSpec,
    apply_clahe: bool,
    pool: &rayon::ThreadPool,
) -> Result<FeatureTable> {
    let extracted: Result<Vec<(String, [Vec<f64>; 3])>> = pool.install(|| {
        index
            .par_iter()
            .map(|row| {
                let mut views: [Vec<f64>; 3] = Default::default();
                for view in View::ALL {
                    let img = load_png(&base.join(row.view_path(view)))?;
                    let img = if apply_clahe { clahe(&img, 0.01, 8) } else { img };
                    let feats = extract_features(&img, &spec)
                        .map_err(|e| data(format!("{} ({}): {e}", row.id, view.as_str())))?;
                    views[view.index()] = feats;
                }
                Ok((row.id.clone(), views))
            })
            .collect()
    });
    Ok(FeatureTable { spec, clahe: apply_clahe, rows: extracted?.into_iter().collect() })
}

/// Features for a single view of the given rows, in row order. Cheaper than
/// [`compute`] when only one view matters (per-view train/predict).
pub fn compute_view(
    base: &Path,
    rows: &[&ViewIndexRow],
    view: View,
    spec: FeatureSpec,
    apply_clahe: bool,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Vec<f64>>> {
    pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let img = load_png(&base.join(row.view_path(view)))?;
                let img = if apply_clahe { clahe(&img, 0.01, 8) } else { img };
                extract_features(&img, &spec)
                    .map_err(|e| data(format!("{} ({}): {e}", row.id, view.as_str())))
            })
            .collect()
    })
}

/// Loads the raster of one view for each row, applying contrast
/// equalization when requested (the image-space training path).
pub fn load_view_images(
    base: &Path,
    rows: &[&ViewIndexRow],
    view: View,
    apply_clahe: bool,
    pool: &rayon::ThreadPool,
) -> Result<Vec<fundus_core::Raster>> {
    pool.install(|| {
        rows.par_iter()
            .map(|row| {
                let img = load_png(&base.join(row.view_path(view)))?;
                Ok(if apply_clahe { clahe(&img, 0.01, 8) } else { img })
            })
            .collect()
    })
}

/// Computes features, consulting `cache` first when given. A cache whose
/// spec, contrast setting, or id set disagrees with the index is recomputed
/// and overwritten rather than trusted.
pub fn load_or_compute(
    cache: Option<&Path>,
    base: &Path,
    index: &[ViewIndexRow],
    spec: FeatureSpec,
    apply_clahe: bool,
    pool: &rayon::ThreadPool,
) -> Result<FeatureTable> {
    if let Some(cache_path) = cache {
        if let Some(table) = try_load_cache(cache_path, index, spec, apply_clahe)? {
            return Ok(table);
        }
        let table = compute(base, index, spec, apply_clahe, pool)?;
        save_cache(cache_path, &table)?;
        return Ok(table);
    }
    compute(base, index, spec, apply_clahe, pool)
}

fn save_cache(path: &Path, table: &FeatureTable) -> Result<()> {
    let d = table.spec.feature_len();
    let mut out = Vec::with_capacity(CACHE_MAGIC.len() + table.rows.len() * (16 + 3 * d * 8));
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&table.spec.downsample.to_le_bytes());
    out.push(table.spec.channels);
    out.push(u8::from(table.clahe));
    out.extend_from_slice(&(table.rows.len() as u32).to_le_bytes());
    for (id, views) in &table.rows {
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id.as_bytes());
        for view in views {
            debug_assert_eq!(view.len(), d);
            for v in view {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    atomic_write(path, &out)
}

/// Returns `Ok(None)` when the cache is absent or stale; hard-fails only on
/// IO errors reading an existing file.
fn try_load_cache(
    path: &Path,
    index: &[ViewIndexRow],
    spec: FeatureSpec,
    apply_clahe: bool,
) -> Result<Option<FeatureTable>> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_data(path, e)),
    };
    Ok(parse_cache(&bytes, index, spec, apply_clahe))
}

fn parse_cache(
    bytes: &[u8],
    index: &[ViewIndexRow],
    spec: FeatureSpec,
    apply_clahe: bool,
) -> Option<FeatureTable> {
    let rest = bytes.strip_prefix(CACHE_MAGIC)?;
    let (head, mut rest) = rest.split_at_checked(10)?;
    let downsample = u32::from_le_bytes(head[0..4].try_into().ok()?);
    let channels = head[4];
    let cached_clahe = head[5] != 0;
    let count = u32::from_le_bytes(head[6..10].try_into().ok()?) as usize;
    if downsample != spec.downsample
        || channels != spec.channels
        || cached_clahe != apply_clahe
        || count != index.len()
    {
        return None;
    }
    let d = spec.feature_len();
    let mut rows = BTreeMap::new();
    for _ in 0..count {
        let (len_bytes, r) = rest.split_at_checked(4)?;
        let id_len = u32::from_le_bytes(len_bytes.try_into().ok()?) as usize;
        let (id_bytes, r) = r.split_at_checked(id_len)?;
        let id = std::str::from_utf8(id_bytes).ok()?.to_string();
        rest = r;
        let mut views: [Vec<f64>; 3] = Default::default();
        for slot in &mut views {
            let (chunk, r) = rest.split_at_checked(d * 8)?;
            rest = r;
            let mut feats = Vec::with_capacity(d);
            for v in chunk.chunks_exact(8) {
                let value = f64::from_le_bytes(v.try_into().ok()?);
                if !value.is_finite() {
                    return None;
                }
                feats.push(value);
            }
            *slot = feats;
        }
        rows.insert(id, views);
    }
    if !rest.is_empty() {
        return None;
    }
    // The cache must cover exactly the ids in the index.
    if !index.iter().all(|r| rows.contains_key(&r.id)) || rows.len() != index.len() {
        return None;
    }
    Some(FeatureTable { spec, clahe: apply_clahe, rows })
}
