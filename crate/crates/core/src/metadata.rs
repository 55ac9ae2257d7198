//! Dublin Core descriptive records.
//!
//! [`parse_dc`] reads an `oai_dc` payload from a harvested record and
//! returns a [`DescriptiveRecord`] whose strings are already normalized
//! (NFC, trimmed, whitespace-collapsed, duplicate-free).

use std::collections::BTreeMap;

use roxmltree::Document;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::oai::OaiRecord;

pub const OAI_DC_NS: &str = "http://www.openarchives.org/OAI/2.0/oai_dc/";
pub const DC_NS: &str = "http://purl.org/dc/elements/1.1/";

#[derive(Debug, Error)]
pub enum MetadataError {
    #[error("record {0} carries no oai_dc payload")]
    NoDcPayload(String),
    #[error("malformed metadata for {identifier}: {reason}")]
    XmlMalformed { identifier: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Harvested,
    Enriched,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptiveRecord {
    pub source_identifier: String,
    pub titles: Vec<String>,
    pub creators: Vec<String>,
    pub dates: Vec<String>,
    pub subjects: Vec<String>,
    pub types: Vec<String>,
    pub languages: Vec<String>,
    pub rights: Vec<String>,
    pub identifiers: Vec<String>,
    /// Remaining DC elements (contributor, publisher, ...) keyed by local name.
    #[serde(default)]
    pub extras: BTreeMap<String, Vec<String>>,
    pub field_provenance: BTreeMap<String, Provenance>,
}

impl DescriptiveRecord {
    pub fn new(source_identifier: impl Into<String>) -> DescriptiveRecord {
        DescriptiveRecord { source_identifier: source_identifier.into(), ..Default::default() }
    }

    /// The eight mapped DC lists with their field names.
    pub fn fields(&self) -> [(&'static str, &Vec<String>); 8] {
        [
            ("titles", &self.titles),
            ("creators", &self.creators),
            ("dates", &self.dates),
            ("subjects", &self.subjects),
            ("types", &self.types),
            ("languages", &self.languages),
            ("rights", &self.rights),
            ("identifiers", &self.identifiers),
        ]
    }

    fn field_mut(&mut self, element: &str) -> Option<&mut Vec<String>> {
        Some(match element {
            "title" => &mut self.titles,
            "creator" => &mut self.creators,
            "date" => &mut self.dates,
            "subject" => &mut self.subjects,
            "type" => &mut self.types,
            "language" => &mut self.languages,
            "rights" => &mut self.rights,
            "identifier" => &mut self.identifiers,
            _ => return None,
        })
    }

    fn lists_mut(&mut self) -> impl Iterator<Item = &mut Vec<String>> {
        [
            &mut self.titles,
            &mut self.creators,
            &mut self.dates,
            &mut self.subjects,
            &mut self.types,
            &mut self.languages,
            &mut self.rights,
            &mut self.identifiers,
        ]
        .into_iter()
        .chain(self.extras.values_mut())
    }
}

/// Parses the `oai_dc:dc` element of a non-deleted record.
pub fn parse_dc(record: &OaiRecord) -> Result<DescriptiveRecord, MetadataError> {
    let no_payload = || MetadataError::NoDcPayload(record.identifier.clone());
    if record.deleted {
        return Err(no_payload());
    }
    let xml = record.metadata_xml.as_deref().ok_or_else(no_payload)?;
    let malformed = |reason: String| MetadataError::XmlMalformed { identifier: record.identifier.clone(), reason };
    let text = std::str::from_utf8(xml).map_err(|e| malformed(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| malformed(e.to_string()))?;
    let dc = doc
        .descendants()
        .find(|n| n.is_element() && n.tag_name().name() == "dc" && n.tag_name().namespace() == Some(OAI_DC_NS))
        .ok_or_else(no_payload)?;

    let mut out = DescriptiveRecord::new(record.identifier.clone());
    for el in dc.children().filter(|n| n.is_element() && n.tag_name().namespace() == Some(DC_NS)) {
        let name = el.tag_name().name();
        let value: String = el.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect();
        match out.field_mut(name) {
            Some(list) => list.push(value),
            None => out.extras.entry(name.to_string()).or_default().push(value),
        }
    }
    let mut out = normalize(out);
    let populated: Vec<&'static str> =
        out.fields().into_iter().filter(|(_, list)| !list.is_empty()).map(|(name, _)| name).collect();
    for name in populated {
        out.field_provenance.insert(name.to_string(), Provenance::Harvested);
    }
    Ok(out)
}

/// NFC, trim, collapse internal whitespace runs to one space.
pub fn normalize_text(s: &str) -> String {
    let composed: String = s.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn normalize_list(list: &mut Vec<String>) {
    let mut kept: Vec<String> = Vec::with_capacity(list.len());
    for value in list.drain(..) {
        let value = normalize_text(&value);
        if !value.is_empty() && !kept.contains(&value) {
            kept.push(value);
        }
    }
    *list = kept;
}

/// Normalizes every string of the record; drops empties and duplicates
/// (first occurrence wins).
pub fn normalize(mut record: DescriptiveRecord) -> DescriptiveRecord {
    record.source_identifier = normalize_text(&record.source_identifier);
    record.lists_mut().for_each(normalize_list);
    record.extras.retain(|_, v| !v.is_empty());
    record
}
