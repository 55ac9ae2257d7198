//! OAI-PMH 2.0 harvesting client.
//!
//! Requests are built deterministically ([`build_request`]), responses are
//! parsed into typed values ([`parse_response`]) and [`Harvester`] drives a
//! full `ListRecords` run over any [`Transport`], following resumption
//! tokens until the repository signals the last page.

mod harvest;
mod request;
mod response;
mod transport;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use harvest::{
    HarvestInterruption, HarvestRequest, HarvestSummary, Harvester, Pause, RetryPolicy, SinkError, ThreadPause,
};
pub use request::{build_request, ArgKey};
pub use response::{parse_response, IdentifyInfo, MetadataFormat, OaiPayload, OaiResponse, ResumptionToken, SetInfo};
pub use transport::{FixtureTransport, HttpReply, HttpTransport, Transport, TransportError};

/// Namespace of the OAI-PMH response envelope.
pub const OAI_NS: &str = "http://www.openarchives.org/OAI/2.0/";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OaiVerb {
    Identify,
    ListMetadataFormats,
    ListSets,
    ListIdentifiers,
    ListRecords,
    GetRecord,
}

impl OaiVerb {
    pub const ALL: [OaiVerb; 6] = [
        OaiVerb::Identify,
        OaiVerb::ListMetadataFormats,
        OaiVerb::ListSets,
        OaiVerb::ListIdentifiers,
        OaiVerb::ListRecords,
        OaiVerb::GetRecord,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OaiVerb::Identify => "Identify",
            OaiVerb::ListMetadataFormats => "ListMetadataFormats",
            OaiVerb::ListSets => "ListSets",
            OaiVerb::ListIdentifiers => "ListIdentifiers",
            OaiVerb::ListRecords => "ListRecords",
            OaiVerb::GetRecord => "GetRecord",
        }
    }
}

impl fmt::Display for OaiVerb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OaiVerb {
    type Err = OaiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OaiVerb::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| OaiError::UnknownVerb(s.to_string()))
    }
}

/// Error codes defined by the protocol for `<error code="...">`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolCode {
    BadArgument,
    BadResumptionToken,
    BadVerb,
    CannotDisseminateFormat,
    IdDoesNotExist,
    NoRecordsMatch,
    NoMetadataFormats,
    NoSetHierarchy,
}

impl ProtocolCode {
    pub const ALL: [ProtocolCode; 8] = [
        ProtocolCode::BadArgument,
        ProtocolCode::BadResumptionToken,
        ProtocolCode::BadVerb,
        ProtocolCode::CannotDisseminateFormat,
        ProtocolCode::IdDoesNotExist,
        ProtocolCode::NoRecordsMatch,
        ProtocolCode::NoMetadataFormats,
        ProtocolCode::NoSetHierarchy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolCode::BadArgument => "badArgument",
            ProtocolCode::BadResumptionToken => "badResumptionToken",
            ProtocolCode::BadVerb => "badVerb",
            ProtocolCode::CannotDisseminateFormat => "cannotDisseminateFormat",
            ProtocolCode::IdDoesNotExist => "idDoesNotExist",
            ProtocolCode::NoRecordsMatch => "noRecordsMatch",
            ProtocolCode::NoMetadataFormats => "noMetadataFormats",
            ProtocolCode::NoSetHierarchy => "noSetHierarchy",
        }
    }

    pub fn parse(code: &str) -> Option<ProtocolCode> {
        ProtocolCode::ALL.into_iter().find(|c| c.as_str() == code)
    }
}

impl fmt::Display for ProtocolCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum OaiError {
    #[error("unknown OAI-PMH verb '{0}'")]
    UnknownVerb(String),
    #[error("argument '{argument}' is not allowed for {verb}")]
    IllegalArgument { verb: OaiVerb, argument: String },
    #[error("resumptionToken is exclusive, but was combined with '{0}'")]
    IllegalArgumentCombination(String),
    #[error("{verb} requires argument '{argument}'")]
    MissingArgument { verb: OaiVerb, argument: &'static str },
    #[error("invalid endpoint URL '{0}'")]
    BadEndpoint(String),
    #[error("malformed OAI-PMH response: {0}")]
    XmlMalformed(String),
    #[error("expected a {expected} response, got {found}")]
    VerbMismatch { expected: OaiVerb, found: String },
    #[error("repository error {code}: {message}")]
    Protocol { code: ProtocolCode, message: String },
    #[error("invalid datestamp '{0}' (expected YYYY-MM-DD or YYYY-MM-DDThh:mm:ssZ)")]
    BadDatestamp(String),
    #[error("from {from} is after until {until}")]
    InvalidRange { from: String, until: String },
    #[error("HTTP {status} from {url}")]
    HttpStatus { url: String, status: u16 },
    #[error("gave up on {url} after {attempts} attempts: {last_error}")]
    TransportExhausted { url: String, attempts: u32, last_error: String },
    #[error("repository repeated resumption token '{0}'")]
    TokenLoop(String),
    #[error("record sink failed: {0}")]
    Sink(#[source] SinkError),
}

impl OaiError {
    pub fn protocol_code(&self) -> Option<ProtocolCode> {
        match self {
            OaiError::Protocol { code, .. } => Some(*code),
            _ => None,
        }
    }
}

/// Datestamp precision used by a repository.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Granularity {
    #[serde(rename = "YYYY-MM-DD")]
    Day,
    #[serde(rename = "YYYY-MM-DDThh:mm:ssZ")]
    Seconds,
}

impl Granularity {
    pub fn parse(s: &str) -> Option<Granularity> {
        match s.trim() {
            "YYYY-MM-DD" => Some(Granularity::Day),
            "YYYY-MM-DDThh:mm:ssZ" => Some(Granularity::Seconds),
            _ => None,
        }
    }
}

/// UTC datestamp at day or second granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Datestamp {
    instant: DateTime<Utc>,
    granularity: Granularity,
}

impl Datestamp {
    pub fn parse(s: &str) -> Result<Datestamp, OaiError> {
        let bad = || OaiError::BadDatestamp(s.to_string());
        match s.len() {
            10 => {
                let day = NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| bad())?;
                Ok(Datestamp {
                    instant: day.and_hms_opt(0, 0, 0).ok_or_else(bad)?.and_utc(),
                    granularity: Granularity::Day,
                })
            }
            20 => {
                let t = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%SZ").map_err(|_| bad())?;
                Ok(Datestamp { instant: t.and_utc(), granularity: Granularity::Seconds })
            }
            _ => Err(bad()),
        }
    }

    pub fn instant(&self) -> DateTime<Utc> {
        self.instant
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// Renders the datestamp at the given precision (day truncates).
    pub fn format(&self, granularity: Granularity) -> String {
        match granularity {
            Granularity::Day => self.instant.format("%Y-%m-%d").to_string(),
            Granularity::Seconds => self.instant.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        }
    }
}

impl fmt::Display for Datestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(self.granularity))
    }
}

impl FromStr for Datestamp {
    type Err = OaiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Datestamp::parse(s)
    }
}

impl Serialize for Datestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Datestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Datestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One harvested repository record.
///
/// `metadata_xml` holds the `<metadata>` element of the response, with the
/// namespace declarations it inherited from the envelope made explicit so
/// the bytes parse on their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OaiRecord {
    pub identifier: String,
    pub datestamp: Datestamp,
    pub set_specs: Vec<String>,
    pub metadata_xml: Option<Vec<u8>>,
    pub deleted: bool,
}
