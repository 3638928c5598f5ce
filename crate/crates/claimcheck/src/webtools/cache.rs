//! Content-addressed disk cache. One file per entry under
//! `<root>/<namespace>/<hex-hash>` with the body bytes verbatim and a JSON
//! sidecar `{key, stored_at}`. Entries never expire unless a max age is set.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheEntry {
    pub key: String,
    pub stored_at: u64,
    pub body: Vec<u8>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SidecarMeta {
    key: String,
    stored_at: u64,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
    max_age_secs: Option<u64>,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskCache {
            root: root.into(),
            max_age_secs: None,
        }
    }

    /// Entries older than `secs` are treated as misses (they stay on disk).
    pub fn with_max_age(mut self, secs: Option<u64>) -> Self {
        self.max_age_secs = secs;
        self
    }

    /// Last value stored under `key`, or None. I/O trouble degrades to a
    /// miss with a logged warning; a miss is never an error.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let (body_path, meta_path) = self.paths_for(key);
        let body = match std::fs::read(&body_path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
            Err(e) => {
                log::warn!("cache read failed for {}: {e}", body_path.display());
                return None;
            }
        };
        let stored_at = std::fs::read(&meta_path)
            .ok()
            .and_then(|bytes| serde_json::from_slice::<SidecarMeta>(&bytes).ok())
            .map(|meta| meta.stored_at)
            .unwrap_or(0);
        if let Some(max_age) = self.max_age_secs {
            let age = super::now_epoch().saturating_sub(stored_at);
            if age > max_age {
                return None;
            }
        }
        Some(CacheEntry {
            key: key.to_string(),
            stored_at,
            body,
        })
    }

    /// Store `body` under `key` with write-temp-then-rename semantics.
    pub fn put(&self, key: &str, body: &[u8]) -> io::Result<()> {
        self.put_at(key, body, super::now_epoch())
    }

    pub fn put_at(&self, key: &str, body: &[u8], stored_at: u64) -> io::Result<()> {
        let (body_path, meta_path) = self.paths_for(key);
        let dir = body_path.parent().expect("cache paths have a parent");
        std::fs::create_dir_all(dir)?;

        let meta = SidecarMeta {
            key: key.to_string(),
            stored_at,
        };
        let meta_bytes = serde_json::to_vec(&meta).expect("sidecar meta serializes");
        atomic_write(&meta_path, &meta_bytes)?;
        atomic_write(&body_path, body)
    }

    fn paths_for(&self, key: &str) -> (PathBuf, PathBuf) {
        let namespace = key.split(':').next().filter(|ns| !ns.is_empty()).unwrap_or("misc");
        let digest = Sha256::digest(key.as_bytes());
        let name = hex(&digest);
        let dir = self.root.join(namespace);
        (dir.join(&name), dir.join(format!("{name}.meta.json")))
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let stamp = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = path.with_extension(format!("tmp.{}.{stamp}", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

fn hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
