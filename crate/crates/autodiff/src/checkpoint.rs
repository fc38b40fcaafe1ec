use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ParamStore;
use crate::tensor::Tensor;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOB_FILE: &str = "params.bin";

/// One tensor in the manifest; `offset` counts f32 elements into the blob.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io error: {0}")]
    Io(#[from] io::Error),
    #[error("checkpoint manifest error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

/// Writes `manifest.json` and `params.bin` (little-endian f32) into `dir`.
pub fn save_checkpoint(store: &ParamStore<f32>, dir: impl AsRef<Path>) -> Result<(), CheckpointError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut manifest = Vec::with_capacity(store.len());
    let mut blob = Vec::with_capacity(store.num_scalars() * 4);
    let mut offset = 0;
    for (_, name, t) in store.iter() {
        manifest.push(ManifestEntry {
            name: name.to_string(),
            shape: t.shape().to_vec(),
            offset,
        });
        for x in t.data() {
            blob.extend_from_slice(&x.to_le_bytes());
        }
        offset += t.numel();
    }
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    fs::write(dir.join(BLOB_FILE), blob)?;
    Ok(())
}

pub fn load_checkpoint(dir: impl AsRef<Path>) -> Result<ParamStore<f32>, CheckpointError> {
    let dir = dir.as_ref();
    let manifest: Vec<ManifestEntry> =
        serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let blob = fs::read(dir.join(BLOB_FILE))?;
    if blob.len() % 4 != 0 {
        return Err(CheckpointError::Malformed(format!(
            "blob length {} is not a multiple of 4",
            blob.len()
        )));
    }
    let values: Vec<f32> = blob
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let mut store = ParamStore::new();
    for e in manifest {
        let n: usize = e.shape.iter().product();
        let end = e.offset.checked_add(n).filter(|&end| end <= values.len()).ok_or_else(|| {
            CheckpointError::Malformed(format!("tensor `{}` runs past the end of the blob", e.name))
        })?;
        if store.id(&e.name).is_some() {
            return Err(CheckpointError::Malformed(format!("duplicate tensor `{}`", e.name)));
        }
        store.add(e.name, Tensor::new(e.shape, values[e.offset..end].to_vec()));
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut s = ParamStore::new();
        s.add("a", Tensor::new([2, 2], vec![1.5f32, -0.0, f32::MIN_POSITIVE, 1e-30]));
        s.add("b", Tensor::new([3], vec![f32::MAX, -7.25, 0.1]));
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(&s, dir.path()).unwrap();
        let back = load_checkpoint(dir.path()).unwrap();
        assert!(s.same_layout(&back));
        for ((_, _, x), (_, _, y)) in s.iter().zip(back.iter()) {
            let xb: Vec<u32> = x.data().iter().map(|v| v.to_bits()).collect();
            let yb: Vec<u32> = y.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(xb, yb);
        }
    }

    #[test]
    fn truncated_blob_is_rejected() {
        let mut s = ParamStore::new();
        s.add("a", Tensor::new([4], vec![1.0f32; 4]));
        let dir = tempfile::tempdir().unwrap();
        save_checkpoint(&s, dir.path()).unwrap();
        std::fs::write(dir.path().join(BLOB_FILE), [0u8; 8]).unwrap();
        assert!(matches!(load_checkpoint(dir.path()), Err(CheckpointError::Malformed(_))));
    }
}
