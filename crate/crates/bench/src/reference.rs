//! Reference optimal values from long plain-PDHG runs, cached on disk.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qnsplit::ops::LinearOperator;
use qnsplit::pdhg::pdhg_step;
use qnsplit_imaging::{dual_value, primal_value, Family, ImageProblem};

use crate::error::Result;

pub const CACHE_ENV: &str = "QNSPLIT_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// Smallest primal value seen along the run.
    pub primal: f64,
    /// Largest dual value seen, for families with an explicit dual.
    pub dual: Option<f64>,
    pub iters: usize,
}

impl Reference {
    /// `primal − dual`, a certificate on the accuracy of `primal`.
    pub fn certificate(&self) -> Option<f64> {
        self.dual.map(|d| self.primal - d)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    reference: Reference,
}

/// Cache directory from the environment, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// SHA-256 over everything that determines the reference run.
pub fn problem_key(p: &ImageProblem, n_iters: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"qnsplit-reference-v1");
    h.update(p.family.name().as_bytes());
    for v in [p.rows as u64, p.cols as u64, n_iters as u64] {
        h.update(v.to_le_bytes());
    }
    let mut put = |xs: &[f64]| {
        h.update((xs.len() as u64).to_le_bytes());
        xs.iter().for_each(|x| h.update(x.to_bits().to_le_bytes()));
    };
    put(&[p.mu, p.tau, p.sigma]);
    put(&p.b);
    put(p.weights.as_deref().unwrap_or(&[]));
    match p.blur.as_deref() {
        Some(LinearOperator::Convolution2d(c)) => {
            put(&[c.kernel_rows as f64]);
            put(&c.kernel);
        }
        Some(_) => put(&[f64::NAN]),
        None => put(&[]),
    }
    hex::encode(h.finalize())
}

/// Best primal value along `n_iters ≥ 1` plain-PDHG steps from the
/// problem's initial point, plus the best dual value for denoising.
pub fn compute_reference(p: &ImageProblem, n_iters: usize) -> Result<Reference> {
    let metric = p.metric()?;
    let mut z = p.initial_point();
    let mut best = Reference {
        primal: f64::INFINITY,
        dual: (p.family == Family::Denoising).then_some(f64::NEG_INFINITY),
        iters: n_iters.max(1),
    };
    for _ in 0..best.iters {
        z = pdhg_step(&p.saddle, &metric, &z)?;
        let (x, y) = p.split(&z);
        best.primal = best.primal.min(primal_value(p, x));
        if let (Some(d), Some(v)) = (best.dual.as_mut(), dual_value(p, y)) {
            *d = d.max(v);
        }
    }
    Ok(best)
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("reference-{key}.json"))
}

/// [`compute_reference`], read from or written to `cache_dir` when given.
/// A cached entry is authoritative for its key.
pub fn reference_gap(p: &ImageProblem, n_iters: usize, cache_dir: Option<&Path>) -> Result<Reference> {
    let key = problem_key(p, n_iters);
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, &key);
        if let Ok(text) = std::fs::read_to_string(&path) {
            match serde_json::from_str::<CacheEntry>(&text) {
                Ok(entry) if entry.key == key => return Ok(entry.reference),
                _ => log::warn!("ignoring unreadable cache entry {}", path.display()),
            }
        }
    }
    let reference = compute_reference(p, n_iters)?;
    if let Some(dir) = cache_dir {
        std::fs::create_dir_all(dir)?;
        let entry = CacheEntry { key: key.clone(), reference };
        let tmp = dir.join(format!(".reference-{key}.tmp"));
        std::fs::write(&tmp, serde_json::to_string_pretty(&entry)?)?;
        std::fs::rename(&tmp, cache_path(dir, &key))?;
    }
    Ok(reference)
}
