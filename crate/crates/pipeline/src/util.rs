//! Atomic file writes and worker-pool sizing.

use crate::error::{data, internal, io_data, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// Temp-name used while writing `path`; same directory so the final rename
/// is atomic on POSIX filesystems.
fn tmp_name(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Creates every missing ancestor of a file path.
pub fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_data(parent, e))?;
        }
    }
    Ok(())
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| io_data(path, e))
}

/// Writes the whole buffer to a temp file, then renames into place, so the
/// destination is never observed half-written.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    ensure_parent(path)?;
    let tmp = tmp_name(path);
    fs::write(&tmp, bytes).map_err(|e| io_data(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_data(path, e))
}

/// Requires that an input path exists before a command starts real work.
pub fn require_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(data(format!("{what} not found: {}", path.display())))
    }
}

/// Worker count: `--jobs` flag, else `PIPELINE_JOBS`, else all cores.
pub fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    let jobs = match flag {
        Some(n) => n,
        None => match std::env::var("PIPELINE_JOBS") {
            Ok(raw) => raw
                .trim()
                .parse::<usize>()
                .map_err(|_| data(format!("PIPELINE_JOBS is not a number: {raw:?}")))?,
            Err(_) => std::thread::available_parallelism().map(usize::from).unwrap_or(1),
        },
    };
    if jobs == 0 {
        return Err(data("worker count must be at least 1".to_string()));
    }
    Ok(jobs)
}

/// Builds a bounded rayon pool. Work fanned out on it must be merged in a
/// deterministic order by the caller; the pool size never changes results.
pub fn worker_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| internal(format!("failed to build worker pool: {e}")))
}
