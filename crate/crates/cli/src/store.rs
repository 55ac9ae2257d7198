//! Flat-file, content-addressed artifact store.
//!
//! ```text
//! store/
//!   raw/<id>.xml          harvested metadata subtrees
//!   records/<id>.json     descriptive records (tombstones for deletions)
//!   detections/<id>.json  validated, filtered detections
//!   enriched/<id>.json
//!   graph/<id>.nt, graph/<id>.ttl
//!   links/*.nt            owl:sameAs links
//!   manifest.json         path -> {sha256, stage, produced_by, timestamp}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MANIFEST: &str = "manifest.json";
pub const LOCK: &str = ".lock";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("identifier is empty")]
    EmptyIdentifier,
    #[error("no {MANIFEST} in {0}")]
    ManifestMissing(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}: manifest is not valid JSON: {1}")]
    ManifestCorrupt(PathBuf, String),
    #[error("store {0} is locked by another invocation (remove {LOCK} if it is stale)")]
    Locked(PathBuf),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Record,
    Detections,
    Enriched,
    Graph,
    Links,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Raw, Stage::Record, Stage::Detections, Stage::Enriched, Stage::Graph, Stage::Links];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Record => "record",
            Stage::Detections => "detections",
            Stage::Enriched => "enriched",
            Stage::Graph => "graph",
            Stage::Links => "links",
        }
    }

    /// Store subdirectory holding this stage's artifacts.
    pub fn dir(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Record => "records",
            Stage::Detections => "detections",
            Stage::Enriched => "enriched",
            Stage::Graph => "graph",
            Stage::Links => "links",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sha256: String,
    pub stage: Stage,
    pub produced_by: String,
    pub timestamp: DateTime<Utc>,
}

/// Relative path (with `/` separators) to entry.
pub type StoreManifest = BTreeMap<String, ManifestEntry>;

const UNSAFE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'.').remove(b'_').remove(b'-');

/// Filename-safe form of an identifier: every byte outside `[A-Za-z0-9._-]`
/// is percent-encoded. The names `.` and `..` are fully encoded as well.
pub fn sanitize_id(identifier: &str) -> Result<String, StoreError> {
    if identifier.is_empty() {
        return Err(StoreError::EmptyIdentifier);
    }
    if identifier.bytes().all(|b| b == b'.') && identifier.len() <= 2 {
        return Ok("%2E".repeat(identifier.len()));
    }
    Ok(utf8_percent_encode(identifier, UNSAFE).to_string())
}

/// Inverse of [`sanitize_id`].
pub fn unsanitize_id(name: &str) -> Option<String> {
    percent_decode_str(name).decode_utf8().ok().map(|s| s.into_owned())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a sibling temp file, syncs it, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

/// Held for the duration of a pipeline invocation; removes the lock file
/// on drop.
#[derive(Debug)]
pub struct StoreLock {
    path: PathBuf,
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    manifest: StoreManifest,
    dirty: bool,
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        let manifest = match read_manifest(&root) {
            Ok(m) => m,
            Err(StoreError::ManifestMissing(_)) => StoreManifest::new(),
            Err(e) => return Err(e),
        };
        Ok(Store { root, manifest, dirty: false })
    }

    /// Opens an existing store without creating anything.
    pub fn open_existing(root: impl Into<PathBuf>) -> Result<Store, StoreError> {
        let root = root.into();
        let manifest = read_manifest(&root)?;
        Ok(Store { root, manifest, dirty: false })
    }

    pub fn lock(&self) -> Result<StoreLock, StoreError> {
        let path = self.root.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(StoreLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Locked(self.root.clone())),
            Err(e) => Err(StoreError::Io { path, source: e }),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &StoreManifest {
        &self.manifest
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Manifest paths of one stage, sorted.
    pub fn entries(&self, stage: Stage) -> Vec<&str> {
        self.manifest.iter().filter(|(_, e)| e.stage == stage).map(|(p, _)| p.as_str()).collect()
    }

    pub fn has_stage(&self, stage: Stage) -> bool {
        self.manifest.values().any(|e| e.stage == stage)
    }

    pub fn read(&self, rel: &str) -> Result<Vec<u8>, StoreError> {
        let path = self.path(rel);
        fs::read(&path).map_err(io_err(&path))
    }

    /// Stores an artifact. Unchanged content keeps its existing manifest
    /// entry (including the timestamp) and the file is not rewritten.
    pub fn put(&mut self, stage: Stage, rel: &str, bytes: &[u8], produced_by: &str) -> Result<(), StoreError> {
        let sha256 = sha256_hex(bytes);
        let path = self.path(rel);
        if let Some(old) = self.manifest.get(rel) {
            if old.sha256 == sha256 && old.stage == stage && fs::read(&path).is_ok_and(|b| b == bytes) {
                return Ok(());
            }
        }
        write_atomic(&path, bytes)?;
        self.manifest.insert(
            rel.to_string(),
            ManifestEntry { sha256, stage, produced_by: produced_by.to_string(), timestamp: Utc::now() },
        );
        self.dirty = true;
        Ok(())
    }

    /// Deletes an artifact and its manifest entry, if present.
    pub fn remove(&mut self, rel: &str) -> Result<(), StoreError> {
        if self.manifest.remove(rel).is_some() {
            self.dirty = true;
        }
        let path = self.path(rel);
        match fs::remove_file(&path) {
            Err(e) if e.kind() != io::ErrorKind::NotFound => Err(StoreError::Io { path, source: e }),
            _ => Ok(()),
        }
    }

    /// Writes the manifest if anything changed.
    pub fn commit(&mut self) -> Result<(), StoreError> {
        if !self.dirty && self.root.join(MANIFEST).exists() {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(&ManifestView(&self.manifest)).expect("manifest serializes");
        text.push('\n');
        write_atomic(&self.root.join(MANIFEST), text.as_bytes())?;
        self.dirty = false;
        Ok(())
    }
}

struct ManifestView<'a>(&'a StoreManifest);

impl Serialize for ManifestView<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (path, e) in self.0 {
            map.serialize_entry(
                path,
                &serde_json::json!({
                    "sha256": e.sha256,
                    "stage": e.stage,
                    "produced_by": e.produced_by,
                    "timestamp": e.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true),
                }),
            )?;
        }
        map.end()
    }
}

pub fn read_manifest(root: &Path) -> Result<StoreManifest, StoreError> {
    let path = root.join(MANIFEST);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::ManifestMissing(root.to_path_buf())),
        Err(e) => return Err(StoreError::Io { path, source: e }),
    };
    serde_json::from_slice(&bytes).map_err(|e| StoreError::ManifestCorrupt(path, e.to_string()))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub missing: Vec<String>,
    pub modified: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.missing.is_empty() && self.modified.is_empty()
    }
}

/// Re-hashes every file listed in the manifest.
pub fn verify_store(root: &Path) -> Result<VerifyReport, StoreError> {
    let manifest = read_manifest(root)?;
    let mut report = VerifyReport::default();
    for (rel, entry) in &manifest {
        match fs::read(root.join(rel)) {
            Ok(bytes) if sha256_hex(&bytes) == entry.sha256 => {}
            Ok(_) => report.modified.push(rel.clone()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => report.missing.push(rel.clone()),
            Err(_) => report.modified.push(rel.clone()),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("mskg-store-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn sanitize_examples() {
        assert_eq!(sanitize_id("oai:jbc:1").unwrap(), "oai%3Ajbc%3A1");
        assert_eq!(sanitize_id("abc-123").unwrap(), "abc-123");
        assert_eq!(sanitize_id("a/b c").unwrap(), "a%2Fb%20c");
        assert_eq!(sanitize_id("..").unwrap(), "%2E%2E");
        assert_eq!(sanitize_id("...").unwrap(), "...");
        assert!(matches!(sanitize_id(""), Err(StoreError::EmptyIdentifier)));
        let id = "Kraków/BJ Rkp. 5";
        let s = sanitize_id(id).unwrap();
        assert_eq!(s, "Krak%C3%B3w%2FBJ%20Rkp.%205");
        assert_eq!(unsanitize_id(&s).unwrap(), id);
        assert_eq!(unsanitize_id("%2E%2E").unwrap(), "..");
    }

    #[test]
    fn sha256_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn put_commit_verify() {
        let root = scratch("verify");
        let mut store = Store::open(&root).unwrap();
        store.put(Stage::Record, "records/a.json", b"{}", "test").unwrap();
        store.put(Stage::Record, "records/b.json", b"[]", "test").unwrap();
        store.commit().unwrap();
        assert!(verify_store(&root).unwrap().is_clean());

        let before = fs::read(root.join(MANIFEST)).unwrap();
        let mut again = Store::open(&root).unwrap();
        again.put(Stage::Record, "records/a.json", b"{}", "other").unwrap();
        again.commit().unwrap();
        assert_eq!(fs::read(root.join(MANIFEST)).unwrap(), before);

        let mut bytes = fs::read(root.join("records/a.json")).unwrap();
        bytes[0] ^= 1;
        fs::write(root.join("records/a.json"), bytes).unwrap();
        fs::remove_file(root.join("records/b.json")).unwrap();
        let report = verify_store(&root).unwrap();
        assert_eq!(report.modified, vec!["records/a.json"]);
        assert_eq!(report.missing, vec!["records/b.json"]);
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn missing_manifest() {
        let root = scratch("missing");
        fs::create_dir_all(&root).unwrap();
        assert!(matches!(verify_store(&root), Err(StoreError::ManifestMissing(_))));
        fs::remove_dir_all(&root).unwrap();
    }

    #[test]
    fn lock_is_exclusive() {
        let root = scratch("lock");
        let store = Store::open(&root).unwrap();
        let guard = store.lock().unwrap();
        assert!(matches!(store.lock(), Err(StoreError::Locked(_))));
        drop(guard);
        assert!(store.lock().is_ok());
        fs::remove_dir_all(&root).unwrap();
    }
}
