use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use url::Url;

/// Status, `Retry-After` header and body of one HTTP exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub retry_after: Option<String>,
    pub body: Vec<u8>,
}

impl HttpReply {
    pub fn ok(body: impl Into<Vec<u8>>) -> HttpReply {
        HttpReply { status: 200, retry_after: None, body: body.into() }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Anything that can answer a GET.
pub trait Transport: Send + Sync {
    fn get(&self, url: &Url) -> Result<HttpReply, TransportError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn get(&self, url: &Url) -> Result<HttpReply, TransportError> {
        (**self).get(url)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn get(&self, url: &Url) -> Result<HttpReply, TransportError> {
        (**self).get(url)
    }
}

/// Live HTTP transport.
///
/// Redirects are followed up to five hops and only while the scheme stays
/// the same.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub const MAX_REDIRECTS: usize = 5;

    pub fn new() -> Result<HttpTransport, TransportError> {
        let policy = reqwest::redirect::Policy::custom(|attempt| {
            if attempt.previous().len() > Self::MAX_REDIRECTS {
                return attempt.error("too many redirects");
            }
            let same_scheme =
                attempt.previous().last().map(|prev| prev.scheme() == attempt.url().scheme()).unwrap_or(true);
            if same_scheme {
                attempt.follow()
            } else {
                attempt.stop()
            }
        });
        let client = reqwest::blocking::Client::builder()
            .redirect(policy)
            .timeout(Duration::from_secs(120))
            .user_agent(concat!("mskg/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &Url) -> Result<HttpReply, TransportError> {
        let resp = self.client.get(url.clone()).send().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after =
            resp.headers().get(reqwest::header::RETRY_AFTER).and_then(|v| v.to_str().ok()).map(str::to_string);
        let body = resp.bytes().map_err(|e| TransportError(e.to_string()))?.to_vec();
        Ok(HttpReply { status, retry_after, body })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ManifestEntry {
    File(String),
    Sequence(Vec<ManifestReply>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ManifestReply {
    File(String),
    Status {
        status: u16,
        #[serde(default)]
        retry_after: Option<String>,
        #[serde(default)]
        file: Option<String>,
    },
}

/// Offline transport backed by a directory of canned responses.
///
/// `manifest.json` in the directory maps the canonical query string of a
/// request (the part after `?`) to either a file name, or a list of replies
/// served in turn (the last one repeats). A reply is a file name or an
/// object `{"status": 503, "retry_after": "1", "file": "optional.xml"}`.
/// Unknown requests get a 404.
pub struct FixtureTransport {
    dir: PathBuf,
    entries: BTreeMap<String, Vec<ManifestReply>>,
    served: Mutex<HashMap<String, usize>>,
    log: Mutex<Vec<String>>,
}

impl FixtureTransport {
    pub const MANIFEST: &'static str = "manifest.json";

    pub fn open(dir: impl AsRef<Path>) -> Result<FixtureTransport, TransportError> {
        let dir = dir.as_ref().to_path_buf();
        let manifest_path = dir.join(Self::MANIFEST);
        let raw = fs::read(&manifest_path).map_err(|e| TransportError(format!("{}: {e}", manifest_path.display())))?;
        let manifest: BTreeMap<String, ManifestEntry> =
            serde_json::from_slice(&raw).map_err(|e| TransportError(format!("{}: {e}", manifest_path.display())))?;
        let entries = manifest
            .into_iter()
            .map(|(k, v)| {
                let replies = match v {
                    ManifestEntry::File(f) => vec![ManifestReply::File(f)],
                    ManifestEntry::Sequence(s) => s,
                };
                (k, replies)
            })
            .filter(|(_, v)| !v.is_empty())
            .collect();
        Ok(FixtureTransport { dir, entries, served: Mutex::new(HashMap::new()), log: Mutex::new(Vec::new()) })
    }

    /// Query strings requested so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.log.lock().unwrap().clone()
    }

    fn read(&self, file: &str) -> Result<Vec<u8>, TransportError> {
        let path = self.dir.join(file);
        fs::read(&path).map_err(|e| TransportError(format!("{}: {e}", path.display())))
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &Url) -> Result<HttpReply, TransportError> {
        let key = url.query().unwrap_or_default().to_string();
        self.log.lock().unwrap().push(key.clone());
        let Some(replies) = self.entries.get(&key) else {
            return Ok(HttpReply { status: 404, retry_after: None, body: Vec::new() });
        };
        let index = {
            let mut served = self.served.lock().unwrap();
            let n = served.entry(key).or_insert(0);
            let i = (*n).min(replies.len() - 1);
            *n += 1;
            i
        };
        match &replies[index] {
            ManifestReply::File(f) => Ok(HttpReply::ok(self.read(f)?)),
            ManifestReply::Status { status, retry_after, file } => Ok(HttpReply {
                status: *status,
                retry_after: retry_after.clone(),
                body: file.as_deref().map(|f| self.read(f)).transpose()?.unwrap_or_default(),
            }),
        }
    }
}
