//! On-disk cache of reference truths, keyed by a SHA-256 digest of
//! everything the value depends on.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use swinfer_core::models::{reference_sw, Reference, ReferenceOptions};
use swinfer_core::{Model, TrimOrder};

use crate::error::CliResult;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    reference: Reference,
}

pub struct TruthCache {
    dir: Option<PathBuf>,
}

impl TruthCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self { dir }
    }

    fn key(model: &Model, n: usize, to: TrimOrder, opts: &ReferenceOptions) -> String {
        let size = if model.size_dependent() { n.to_string() } else { "-".into() };
        format!(
            "v1|{model}|n={size}|r={}|delta={}|size={}|dirs={}|nodes={}|angles={}|seed={}",
            to.r(),
            to.delta(),
            opts.plugin_size,
            opts.plugin_dirs,
            opts.torus_nodes,
            opts.planar_angles,
            opts.seed
        )
    }

    /// `SW_{r,δ}` of the pair at size `n`, from the cache when present.
    /// Closed forms bypass the cache.
    pub fn reference(&self, model: &Model, n: usize, to: TrimOrder, opts: &ReferenceOptions) -> CliResult<Reference> {
        if let Ok(value) = model.true_sw_oracle(to) {
            return Ok(Reference { value, kind: swinfer_core::models::TruthKind::ClosedForm });
        }
        let key = Self::key(model, n, to, opts);
        let path = self.dir.as_ref().map(|d| d.join(format!("{}.json", hex::encode(Sha256::digest(key.as_bytes())))));
        if let Some(p) = &path {
            if let Some(hit) = fs::read(p).ok().and_then(|b| serde_json::from_slice::<Entry>(&b).ok()) {
                if hit.key == key {
                    return Ok(hit.reference);
                }
            }
        }
        let reference = reference_sw(model, n, n, to, opts)?;
        if let (Some(dir), Some(p)) = (&self.dir, &path) {
            // A failed write only costs a recomputation later.
            if fs::create_dir_all(dir).is_ok() {
                let entry = Entry { key, reference };
                let _ = serde_json::to_vec_pretty(&entry).map(|b| fs::write(p, b));
            }
        }
        Ok(reference)
    }
}
