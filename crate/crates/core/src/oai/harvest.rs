use std::collections::{BTreeMap, HashSet};
use std::time::Duration;

use chrono::{DateTime, Utc};
use url::Url;

use super::request::ArgKey;
use super::{
    build_request, parse_response, Datestamp, Granularity, IdentifyInfo, OaiError, OaiPayload, OaiRecord, OaiVerb,
    ProtocolCode, Transport,
};

pub type SinkError = Box<dyn std::error::Error + Send + Sync>;

/// Blocks the current harvest between retries. Swappable so tests do not sleep.
pub trait Pause: Send + Sync {
    fn pause(&self, duration: Duration);
}

pub struct ThreadPause;

impl Pause for ThreadPause {
    fn pause(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub factor: u32,
    pub retry_after_cap: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_secs(1),
            factor: 2,
            retry_after_cap: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        self.base_delay.saturating_mul(self.factor.saturating_pow(retry))
    }

    /// Delay requested by a `Retry-After` header, capped. Accepts delta-seconds
    /// or an HTTP date.
    pub fn retry_after(&self, header: &str, now: DateTime<Utc>) -> Option<Duration> {
        let header = header.trim();
        let wait = if let Ok(secs) = header.parse::<u64>() {
            Duration::from_secs(secs)
        } else {
            let at = DateTime::parse_from_rfc2822(header).ok()?.with_timezone(&Utc);
            (at - now).to_std().unwrap_or(Duration::ZERO)
        };
        Some(wait.min(self.retry_after_cap))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestRequest {
    pub endpoint: Url,
    pub metadata_prefix: String,
    pub set: Option<String>,
    pub from: Option<Datestamp>,
    pub until: Option<Datestamp>,
}

impl HarvestRequest {
    pub fn new(endpoint: Url, metadata_prefix: impl Into<String>) -> HarvestRequest {
        HarvestRequest { endpoint, metadata_prefix: metadata_prefix.into(), set: None, from: None, until: None }
    }
}

/// Why a harvest stopped before the repository's last page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarvestInterruption {
    /// The repository rejected a resumption token mid-run.
    TokenExpired { token: String, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestSummary {
    pub records_received: usize,
    pub records_deleted: usize,
    pub pages_fetched: usize,
    pub resumption_tokens_seen: Vec<String>,
    pub completed: bool,
    pub interruption: Option<HarvestInterruption>,
}

/// Sequential `ListRecords` driver for one endpoint.
pub struct Harvester<T> {
    transport: T,
    policy: RetryPolicy,
    pause: Box<dyn Pause>,
}

impl<T: Transport> Harvester<T> {
    pub fn new(transport: T) -> Harvester<T> {
        Harvester { transport, policy: RetryPolicy::default(), pause: Box::new(ThreadPause) }
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_pause(mut self, pause: impl Pause + 'static) -> Self {
        self.pause = Box::new(pause);
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// GETs `url`, retrying 503s (honouring `Retry-After`), other 5xx and
    /// transport failures with exponential backoff.
    pub fn fetch(&self, url: &Url) -> Result<Vec<u8>, OaiError> {
        let mut retries = 0;
        loop {
            let (delay, last_error) = match self.transport.get(url) {
                Ok(reply) if (200..300).contains(&reply.status) => return Ok(reply.body),
                Ok(reply) if reply.status == 503 => {
                    let hinted = reply.retry_after.as_deref().and_then(|h| self.policy.retry_after(h, Utc::now()));
                    (hinted.unwrap_or_else(|| self.policy.backoff(retries)), "HTTP 503".to_string())
                }
                Ok(reply) if reply.status >= 500 => (self.policy.backoff(retries), format!("HTTP {}", reply.status)),
                Ok(reply) => return Err(OaiError::HttpStatus { url: url.to_string(), status: reply.status }),
                Err(e) => (self.policy.backoff(retries), e.to_string()),
            };
            if retries >= self.policy.max_retries {
                return Err(OaiError::TransportExhausted { url: url.to_string(), attempts: retries + 1, last_error });
            }
            self.pause.pause(delay);
            retries += 1;
        }
    }

    pub fn identify(&self, endpoint: &Url) -> Result<IdentifyInfo, OaiError> {
        let url = build_request(endpoint, OaiVerb::Identify, &BTreeMap::new())?;
        match parse_response(&self.fetch(&url)?, OaiVerb::Identify)?.payload {
            OaiPayload::Identify(info) => Ok(info),
            _ => Err(OaiError::XmlMalformed("Identify response without Identify payload".into())),
        }
    }

    /// Runs `ListRecords` to completion, handing every record to `sink` once.
    ///
    /// `noRecordsMatch` is an empty, completed harvest. A `badResumptionToken`
    /// after the first page stops the run and is reported through
    /// [`HarvestSummary::interruption`] with `completed = false`; the run is
    /// not restarted, since that could deliver records twice.
    pub fn harvest(
        &self,
        request: &HarvestRequest,
        sink: &mut dyn FnMut(OaiRecord) -> Result<(), SinkError>,
    ) -> Result<HarvestSummary, OaiError> {
        if let (Some(from), Some(until)) = (&request.from, &request.until) {
            if from.instant() > until.instant() {
                return Err(OaiError::InvalidRange { from: from.to_string(), until: until.to_string() });
            }
        }

        let mut args = BTreeMap::new();
        args.insert(ArgKey::METADATA_PREFIX.to_string(), request.metadata_prefix.clone());
        if let Some(set) = &request.set {
            args.insert(ArgKey::SET.to_string(), set.clone());
        }
        if request.from.is_some() || request.until.is_some() {
            let granularity = self.identify(&request.endpoint).map(|i| i.granularity).unwrap_or(Granularity::Day);
            if let Some(from) = &request.from {
                args.insert(ArgKey::FROM.to_string(), from.format(granularity));
            }
            if let Some(until) = &request.until {
                args.insert(ArgKey::UNTIL.to_string(), until.format(granularity));
            }
        }

        let mut summary = HarvestSummary::default();
        let mut seen_ids = HashSet::new();
        let mut url = build_request(&request.endpoint, OaiVerb::ListRecords, &args)?;
        let mut current_token: Option<String> = None;

        loop {
            let body = self.fetch(&url)?;
            let response = match parse_response(&body, OaiVerb::ListRecords) {
                Ok(r) => r,
                Err(OaiError::Protocol { code: ProtocolCode::NoRecordsMatch, .. }) => {
                    summary.completed = true;
                    return Ok(summary);
                }
                Err(OaiError::Protocol { code: ProtocolCode::BadResumptionToken, message })
                    if current_token.is_some() =>
                {
                    summary.interruption =
                        Some(HarvestInterruption::TokenExpired { token: current_token.unwrap_or_default(), message });
                    return Ok(summary);
                }
                Err(e) => return Err(e),
            };
            summary.pages_fetched += 1;

            let next = response.next_token().map(str::to_string);
            if let OaiPayload::Records(records) = response.payload {
                for record in records {
                    if !seen_ids.insert(record.identifier.clone()) {
                        continue;
                    }
                    summary.records_received += 1;
                    if record.deleted {
                        summary.records_deleted += 1;
                    }
                    sink(record).map_err(OaiError::Sink)?;
                }
            }

            match next {
                Some(token) => {
                    if summary.resumption_tokens_seen.contains(&token) {
                        return Err(OaiError::TokenLoop(token));
                    }
                    summary.resumption_tokens_seen.push(token.clone());
                    let mut args = BTreeMap::new();
                    args.insert(ArgKey::RESUMPTION_TOKEN.to_string(), token.clone());
                    url = build_request(&request.endpoint, OaiVerb::ListRecords, &args)?;
                    current_token = Some(token);
                }
                None => {
                    summary.completed = true;
                    return Ok(summary);
                }
            }
        }
    }
}
