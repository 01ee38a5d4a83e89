use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    /// sha256 over the echoed configuration followed by the raw bytes of every input file.
    pub inputs_digest: String,
    pub results: Value,
    pub pass: BTreeMap<String, bool>,
    /// Seconds.
    pub wall_clock: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.pass.values().all(|&p| p)
    }
}

pub fn digest(config: &Value, inputs: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(config).expect("config serialises"));
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_inputs() {
        let cfg = serde_json::json!({"t": 0.5});
        let a = digest(&cfg, &[b"x".to_vec()]);
        assert_eq!(a.len(), 64);
        assert_ne!(a, digest(&cfg, &[b"y".to_vec()]));
        assert_ne!(
            digest(&cfg, &[b"ab".to_vec(), vec![]]),
            digest(&cfg, &[b"a".to_vec(), b"b".to_vec()])
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
