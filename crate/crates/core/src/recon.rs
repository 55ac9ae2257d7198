//! Linking local names (creators, subjects) to external registry entities
//! by normalized Jaro-Winkler similarity.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;
use url::Url;

use crate::kg::Iri;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReconError {
    #[error("search client unavailable: {0}")]
    ClientUnavailable(String),
    #[error("invalid thresholds: review {review} must not exceed accept {accept}")]
    InvalidThresholds { accept: f64, review: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconThresholds {
    /// Top score at or above which a link is emitted.
    pub accept: f64,
    /// Lower bound of the human-review band `[review, accept)`.
    pub review: f64,
}

impl Default for ReconThresholds {
    fn default() -> Self {
        ReconThresholds { accept: 0.92, review: 0.85 }
    }
}

/// An entity returned by a registry search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalEntity {
    pub iri: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconCandidate {
    pub query: String,
    pub external_iri: Iri,
    pub external_label: String,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReconOutcome {
    /// `(label, external IRI)` pairs accepted as the same entity.
    pub links: Vec<(String, Iri)>,
    /// Near misses for human review.
    pub candidates: Vec<ReconCandidate>,
    /// Labels the client could not answer, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Registry search. Implementations must be usable from several threads.
pub trait SearchClient: Send + Sync {
    fn search(&self, query: &str) -> Result<Vec<ExternalEntity>, ReconError>;
}

/// Compatibility decomposition, combining marks removed, lowercased,
/// whitespace collapsed.
pub fn normalize_name(s: &str) -> String {
    let stripped: String = s.nfkd().filter(|c| !is_combining_mark(*c)).collect::<String>().to_lowercase();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Jaro-Winkler similarity: Jaro with a common-prefix bonus of 0.1 per
/// character for up to four characters.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let jaro = jaro(&a, &b);
    let prefix = a.iter().zip(&b).take(4).take_while(|(x, y)| x == y).count();
    (jaro + prefix as f64 * 0.1 * (1.0 - jaro)).min(1.0)
}

fn jaro(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(a.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        if let Some(j) = (lo..hi).find(|&j| !b_used[j] && b[j] == *ca) {
            b_used[j] = true;
            a_matched.push(*ca);
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let b_matched = b.iter().zip(&b_used).filter(|(_, used)| **used).map(|(c, _)| c);
    let mismatched = a_matched.iter().zip(b_matched).filter(|(x, y)| x != y).count();
    let m = m as f64;
    let t = mismatched as f64 / 2.0;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Scores each label's search results and sorts them into links, review
/// candidates and rejections.
///
/// Labels are de-duplicated (first occurrence). The best-scoring result is
/// linked when it reaches `accept`; if it falls in `[review, accept)` every
/// result scoring at least `review` becomes a candidate. Equal scores are
/// broken by the lexicographically smaller IRI. Client failures skip the
/// label and are recorded in [`ReconOutcome::skipped`].
pub fn reconcile(
    labels: &[String],
    client: &dyn SearchClient,
    thresholds: &ReconThresholds,
) -> Result<ReconOutcome, ReconError> {
    if thresholds.review > thresholds.accept {
        return Err(ReconError::InvalidThresholds { accept: thresholds.accept, review: thresholds.review });
    }
    let mut outcome = ReconOutcome::default();
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            continue;
        }
        let results = match client.search(label) {
            Ok(r) => r,
            Err(e) => {
                outcome.skipped.push((label.clone(), e.to_string()));
                continue;
            }
        };
        let query = normalize_name(label);
        let mut scored: Vec<ReconCandidate> = results
            .into_iter()
            .filter_map(|e| {
                let external_iri = Iri::new(e.iri).ok()?;
                Some(ReconCandidate {
                    query: label.clone(),
                    score: similarity(&query, &normalize_name(&e.label)),
                    external_iri,
                    external_label: e.label,
                })
            })
            .collect();
        scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.external_iri.cmp(&b.external_iri)));
        scored.dedup_by(|a, b| a.external_iri == b.external_iri);

        let Some(top) = scored.first() else { continue };
        if top.score >= thresholds.accept {
            outcome.links.push((label.clone(), top.external_iri.clone()));
        } else if top.score >= thresholds.review {
            outcome.candidates.extend(scored.into_iter().filter(|c| c.score >= thresholds.review));
        }
    }
    Ok(outcome)
}

/// Canned search results: a JSON object mapping query strings to arrays of
/// `{"iri": ..., "label": ...}`. Unknown queries return no results.
pub struct FixtureClient {
    answers: BTreeMap<String, Vec<ExternalEntity>>,
    unavailable: HashSet<String>,
}

impl FixtureClient {
    pub fn new(answers: BTreeMap<String, Vec<ExternalEntity>>) -> FixtureClient {
        FixtureClient { answers, unavailable: HashSet::new() }
    }

    pub fn from_json(bytes: &[u8]) -> Result<FixtureClient, ReconError> {
        serde_json::from_slice(bytes)
            .map(FixtureClient::new)
            .map_err(|e| ReconError::ClientUnavailable(format!("bad fixture: {e}")))
    }

    pub fn open(path: impl AsRef<Path>) -> Result<FixtureClient, ReconError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| ReconError::ClientUnavailable(format!("{}: {e}", path.display())))?;
        FixtureClient::from_json(&bytes)
    }

    /// Makes `query` fail as if the service were down.
    pub fn fail_on(mut self, query: impl Into<String>) -> Self {
        self.unavailable.insert(query.into());
        self
    }
}

impl SearchClient for FixtureClient {
    fn search(&self, query: &str) -> Result<Vec<ExternalEntity>, ReconError> {
        if self.unavailable.contains(query) {
            return Err(ReconError::ClientUnavailable(format!("fixture marks '{query}' unavailable")));
        }
        Ok(self.answers.get(query).cloned().unwrap_or_default())
    }
}

/// Where to find results in a search endpoint's JSON reply. Paths are JSON
/// pointers; `results` addresses the array, `iri` and `label` are relative
/// to each element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseFields {
    pub results: String,
    pub iri: String,
    pub label: String,
}

impl Default for ResponseFields {
    /// Layout of Wikidata's `wbsearchentities` action.
    fn default() -> Self {
        ResponseFields { results: "/search".into(), iri: "/concepturi".into(), label: "/label".into() }
    }
}

/// HTTP search client. `endpoint` is a URL template in which `{query}` is
/// replaced by the percent-encoded label. Requests are spaced to respect
/// `requests_per_second`.
pub struct HttpSearchClient {
    client: reqwest::blocking::Client,
    endpoint: String,
    fields: ResponseFields,
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl HttpSearchClient {
    pub const DEFAULT_RATE: f64 = 2.0;

    pub fn new(
        endpoint: impl Into<String>,
        fields: ResponseFields,
        requests_per_second: f64,
    ) -> Result<Self, ReconError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("mskg/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| ReconError::ClientUnavailable(e.to_string()))?;
        let rate = if requests_per_second > 0.0 { requests_per_second } else { Self::DEFAULT_RATE };
        Ok(HttpSearchClient {
            client,
            endpoint: endpoint.into(),
            fields,
            interval: Duration::from_secs_f64(1.0 / rate),
            last: Mutex::new(None),
        })
    }

    fn throttle(&self) {
        let mut last = self.last.lock().unwrap();
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.interval {
                std::thread::sleep(self.interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    /// Extracts entities from a reply body according to `fields`.
    pub fn extract(&self, body: &Value) -> Vec<ExternalEntity> {
        extract_entities(body, &self.fields)
    }
}

pub fn extract_entities(body: &Value, fields: &ResponseFields) -> Vec<ExternalEntity> {
    body.pointer(&fields.results)
        .and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(|item| {
                    Some(ExternalEntity {
                        iri: item.pointer(&fields.iri)?.as_str()?.to_string(),
                        label: item.pointer(&fields.label)?.as_str()?.to_string(),
                    })
                })
                .collect()
        })
        .unwrap_or_default()
}

impl SearchClient for HttpSearchClient {
    fn search(&self, query: &str) -> Result<Vec<ExternalEntity>, ReconError> {
        let encoded: String = url::form_urlencoded::byte_serialize(query.as_bytes()).collect();
        let url = Url::parse(&self.endpoint.replace("{query}", &encoded))
            .map_err(|e| ReconError::ClientUnavailable(format!("bad endpoint: {e}")))?;
        self.throttle();
        let resp = self.client.get(url).send().map_err(|e| ReconError::ClientUnavailable(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(ReconError::ClientUnavailable(format!("HTTP {}", resp.status())));
        }
        let bytes = resp.bytes().map_err(|e| ReconError::ClientUnavailable(e.to_string()))?;
        let body: Value = serde_json::from_slice(&bytes).map_err(|e| ReconError::ClientUnavailable(e.to_string()))?;
        Ok(self.extract(&body))
    }
}
