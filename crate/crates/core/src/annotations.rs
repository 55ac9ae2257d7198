//! Page-layout detections: the interchange schema consumed from detectors,
//! box geometry, and post-processing (confidence filter, per-class
//! suppression, section assignment).
//!
//! Boxes use normalized page coordinates, origin top-left, y downward,
//! serialized as `[x, y, w, h]`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1.0";

/// Slack allowed on the page's right and bottom edges.
pub const EDGE_TOLERANCE: f64 = 1e-9;

/// Minimum share of a member's area that must lie inside a section.
pub const SECTION_OVERLAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionClass {
    Paragraph,
    Stain,
    Stamp,
    Description,
    Sign,
    Signature,
    Image,
    Ornament,
    Initial,
    Header,
}

impl RegionClass {
    pub const ALL: [RegionClass; 10] = [
        RegionClass::Paragraph,
        RegionClass::Stain,
        RegionClass::Stamp,
        RegionClass::Description,
        RegionClass::Sign,
        RegionClass::Signature,
        RegionClass::Image,
        RegionClass::Ornament,
        RegionClass::Initial,
        RegionClass::Header,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::Paragraph => "paragraph",
            RegionClass::Stain => "stain",
            RegionClass::Stamp => "stamp",
            RegionClass::Description => "description",
            RegionClass::Sign => "sign",
            RegionClass::Signature => "signature",
            RegionClass::Image => "image",
            RegionClass::Ornament => "ornament",
            RegionClass::Initial => "initial",
            RegionClass::Header => "header",
        }
    }

    /// Capitalized label, used as the ontology class name.
    pub fn class_name(self) -> &'static str {
        match self {
            RegionClass::Paragraph => "Paragraph",
            RegionClass::Stain => "Stain",
            RegionClass::Stamp => "Stamp",
            RegionClass::Description => "Description",
            RegionClass::Sign => "Sign",
            RegionClass::Signature => "Signature",
            RegionClass::Image => "Image",
            RegionClass::Ornament => "Ornament",
            RegionClass::Initial => "Initial",
            RegionClass::Header => "Header",
        }
    }

    /// Text-structure classes that other regions can belong to.
    pub fn is_section(self) -> bool {
        matches!(self, RegionClass::Paragraph | RegionClass::Header)
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RegionClass::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BBoxError {
    #[error("coordinates must be finite")]
    NotFinite,
    #[error("x and y must be >= 0")]
    Negative,
    #[error("width and height must be > 0")]
    Degenerate,
    #[error("x + w exceeds page width")]
    OverflowX,
    #[error("y + h exceeds page height")]
    OverflowY,
}

/// Axis-aligned box in page fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<BBox, BBoxError> {
        if ![x, y, w, h].iter().all(|v| v.is_finite()) {
            return Err(BBoxError::NotFinite);
        }
        if x < 0.0 || y < 0.0 {
            return Err(BBoxError::Negative);
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(BBoxError::Degenerate);
        }
        if x + w > 1.0 + EDGE_TOLERANCE {
            return Err(BBoxError::OverflowX);
        }
        if y + h > 1.0 + EDGE_TOLERANCE {
            return Err(BBoxError::OverflowY);
        }
        Ok(BBox { x, y, w, h })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn right(&self) -> f64 {
        self.x + self.w
    }
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.right().min(other.right()) - self.x.max(other.x);
        let h = self.bottom().min(other.bottom()) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

impl Serialize for BBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y, w, h] = <[f64; 4]>::deserialize(deserializer)?;
        BBox::new(x, y, w, h).map_err(D::Error::custom)
    }
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub id: String,
    #[serde(rename = "class")]
    pub class_label: RegionClass,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageDetections {
    pub manuscript_id: String,
    pub page_number: u32,
    pub image_uri: String,
    pub width_px: u32,
    pub height_px: u32,
    pub regions: Vec<Region>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("detections are not valid JSON: {0}")]
    Json(String),
    #[error("unsupported schema_version {0}")]
    SchemaVersionUnsupported(String),
    #[error("{path}: {reason}")]
    ValidationError { path: String, reason: String },
    #[error("{path}: unknown region class '{label}'")]
    UnknownClassLabel { path: String, label: String },
    #[error("pages belong to different manuscripts ({0} and {1})")]
    MixedManuscripts(String, String),
}

impl DetectionError {
    /// JSON path of the offending field, when there is one.
    pub fn path(&self) -> Option<&str> {
        match self {
            DetectionError::ValidationError { path, .. } | DetectionError::UnknownClassLabel { path, .. } => Some(path),
            _ => None,
        }
    }
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> DetectionError {
    DetectionError::ValidationError { path: path.into(), reason: reason.into() }
}

fn get_str<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, DetectionError> {
    obj.get(key)
        .ok_or_else(|| invalid(format!("{path}.{key}"), "missing"))?
        .as_str()
        .ok_or_else(|| invalid(format!("{path}.{key}"), "expected a string"))
}

fn get_positive(obj: &Map<String, Value>, key: &str, path: &str) -> Result<u32, DetectionError> {
    let v = obj.get(key).ok_or_else(|| invalid(format!("{path}.{key}"), "missing"))?;
    v.as_u64()
        .filter(|n| *n >= 1)
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| invalid(format!("{path}.{key}"), "expected a positive integer"))
}

fn parse_region(value: &Value, path: &str) -> Result<Region, DetectionError> {
    let obj = value.as_object().ok_or_else(|| invalid(path, "expected an object"))?;
    if let Some(key) = obj.keys().find(|k| !matches!(k.as_str(), "id" | "class" | "bbox" | "confidence")) {
        return Err(invalid(format!("{path}.{key}"), "unknown field"));
    }
    let id = get_str(obj, "id", path)?;
    if id.is_empty() {
        return Err(invalid(format!("{path}.id"), "must not be empty"));
    }
    let label = get_str(obj, "class", path)?;
    let class_label = label
        .parse::<RegionClass>()
        .map_err(|label| DetectionError::UnknownClassLabel { path: format!("{path}.class"), label })?;

    let bbox_path = format!("{path}.bbox");
    let coords = obj
        .get("bbox")
        .ok_or_else(|| invalid(&bbox_path, "missing"))?
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| invalid(&bbox_path, "expected [x, y, w, h]"))?;
    let mut c = [0.0; 4];
    for (i, v) in coords.iter().enumerate() {
        c[i] = v.as_f64().ok_or_else(|| invalid(format!("{bbox_path}[{i}]"), "expected a number"))?;
    }
    let bbox = BBox::new(c[0], c[1], c[2], c[3]).map_err(|e| invalid(&bbox_path, e.to_string()))?;

    let confidence = obj
        .get("confidence")
        .ok_or_else(|| invalid(format!("{path}.confidence"), "missing"))?
        .as_f64()
        .filter(|c| (0.0..=1.0).contains(c))
        .ok_or_else(|| invalid(format!("{path}.confidence"), "expected a number in [0, 1]"))?;

    Ok(Region { id: id.to_string(), class_label, bbox, confidence })
}

/// Parses and validates an interchange document.
///
/// Unknown top-level and page keys are ignored; unknown region keys are
/// rejected. Errors name the JSON path of the first offending field.
pub fn parse_detections(doc: &[u8]) -> Result<Vec<PageDetections>, DetectionError> {
    let root: Value = serde_json::from_slice(doc).map_err(|e| DetectionError::Json(e.to_string()))?;
    let root = root.as_object().ok_or_else(|| invalid("$", "expected an object"))?;

    match root.get("schema_version") {
        Some(Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(Value::String(v)) => return Err(DetectionError::SchemaVersionUnsupported(v.clone())),
        Some(other) => return Err(DetectionError::SchemaVersionUnsupported(other.to_string())),
        None => return Err(invalid("$.schema_version", "missing")),
    }
    let manuscript_id = get_str(root, "manuscript_id", "$")?;
    if manuscript_id.is_empty() {
        return Err(invalid("$.manuscript_id", "must not be empty"));
    }
    let pages = root
        .get("pages")
        .ok_or_else(|| invalid("$.pages", "missing"))?
        .as_array()
        .ok_or_else(|| invalid("$.pages", "expected an array"))?;

    let mut out = Vec::with_capacity(pages.len());
    let mut page_numbers = BTreeSet::new();
    for (pi, page) in pages.iter().enumerate() {
        let path = format!("$.pages[{pi}]");
        let obj = page.as_object().ok_or_else(|| invalid(&path, "expected an object"))?;
        let page_number = get_positive(obj, "page_number", &path)?;
        if !page_numbers.insert(page_number) {
            return Err(invalid(format!("{path}.page_number"), format!("duplicate page number {page_number}")));
        }
        let image_uri = get_str(obj, "image_uri", &path)?.to_string();
        let width_px = get_positive(obj, "width_px", &path)?;
        let height_px = get_positive(obj, "height_px", &path)?;
        let regions_json = obj
            .get("regions")
            .ok_or_else(|| invalid(format!("{path}.regions"), "missing"))?
            .as_array()
            .ok_or_else(|| invalid(format!("{path}.regions"), "expected an array"))?;

        let mut ids = BTreeSet::new();
        let mut regions = Vec::with_capacity(regions_json.len());
        for (ri, r) in regions_json.iter().enumerate() {
            let rpath = format!("{path}.regions[{ri}]");
            let region = parse_region(r, &rpath)?;
            if !ids.insert(region.id.clone()) {
                return Err(invalid(format!("{rpath}.id"), format!("duplicate region id '{}'", region.id)));
            }
            regions.push(region);
        }
        out.push(PageDetections {
            manuscript_id: manuscript_id.to_string(),
            page_number,
            image_uri,
            width_px,
            height_px,
            regions,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct DocumentOut<'a> {
    schema_version: &'static str,
    manuscript_id: &'a str,
    pages: Vec<PageOut<'a>>,
}

#[derive(Serialize)]
struct PageOut<'a> {
    page_number: u32,
    image_uri: &'a str,
    width_px: u32,
    height_px: u32,
    regions: &'a [Region],
}

/// Writes pages of one manuscript as an interchange document.
pub fn serialize_detections(manuscript_id: &str, pages: &[PageDetections]) -> Result<Vec<u8>, DetectionError> {
    if let Some(other) = pages.iter().find(|p| p.manuscript_id != manuscript_id) {
        return Err(DetectionError::MixedManuscripts(manuscript_id.to_string(), other.manuscript_id.clone()));
    }
    let doc = DocumentOut {
        schema_version: SCHEMA_VERSION,
        manuscript_id,
        pages: pages
            .iter()
            .map(|p| PageOut {
                page_number: p.page_number,
                image_uri: &p.image_uri,
                width_px: p.width_px,
                height_px: p.height_px,
                regions: &p.regions,
            })
            .collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| DetectionError::Json(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Keeps regions with `confidence >= min_confidence`, in order.
pub fn filter_regions(regions: &[Region], min_confidence: f64) -> Vec<Region> {
    regions.iter().filter(|r| r.confidence >= min_confidence).cloned().collect()
}

fn by_confidence(a: &Region, b: &Region) -> Ordering {
    b.confidence.total_cmp(&a.confidence).then_with(|| a.id.cmp(&b.id))
}

/// Greedy per-class suppression.
///
/// Regions are visited by descending confidence (ties by id); a region is
/// kept when its IoU with every already-kept region of the same class is
/// below `iou_threshold`. The result is in visiting order.
pub fn dedupe_regions(regions: &[Region], iou_threshold: f64) -> Vec<Region> {
    let mut sorted: Vec<&Region> = regions.iter().collect();
    sorted.sort_by(|a, b| by_confidence(a, b));
    let mut kept: Vec<Region> = Vec::new();
    for r in sorted {
        let suppressed =
            kept.iter().filter(|k| k.class_label == r.class_label).any(|k| iou(&k.bbox, &r.bbox) >= iou_threshold);
        if !suppressed {
            kept.push(r.clone());
        }
    }
    kept
}

/// Share of `member` covered by `section`.
pub fn overlap_fraction(member: &BBox, section: &BBox) -> f64 {
    member.intersection_area(section) / member.area()
}

/// Assigns each non-section region to the paragraph or header holding at
/// least half of its area.
///
/// Among qualifying sections the largest overlap fraction wins, then the
/// smaller section area, then the smaller id. Pairs are `(member_id,
/// section_id)` in input order of the members.
pub fn assign_sections(regions: &[Region]) -> Vec<(String, String)> {
    let sections: Vec<&Region> = regions.iter().filter(|r| r.class_label.is_section()).collect();
    regions
        .iter()
        .filter(|r| !r.class_label.is_section())
        .filter_map(|member| {
            sections
                .iter()
                .map(|s| (overlap_fraction(&member.bbox, &s.bbox), *s))
                .filter(|(frac, _)| *frac >= SECTION_OVERLAP)
                .min_by(|(fa, a), (fb, b)| {
                    fb.total_cmp(fa).then_with(|| a.bbox.area().total_cmp(&b.bbox.area())).then_with(|| a.id.cmp(&b.id))
                })
                .map(|(_, s)| (member.id.clone(), s.id.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn region(id: &str, class: RegionClass, b: BBox, confidence: f64) -> Region {
        Region { id: id.into(), class_label: class, bbox: b, confidence }
    }

    fn doc(regions: &str) -> String {
        format!(
            r#"{{"schema_version":"1.0","manuscript_id":"m1","extra":true,"pages":[{{"page_number":1,"image_uri":"https://img/1.jpg","width_px":2000,"height_px":3000,"regions":[{regions}]}}]}}"#
        )
    }

    #[test]
    fn parses_single_stamp() {
        let pages = parse_detections(
            doc(r#"{"id":"r1","class":"stamp","bbox":[0.1,0.2,0.05,0.04],"confidence":0.91}"#).as_bytes(),
        )
        .unwrap();
        assert_eq!(pages.len(), 1);
        assert_eq!(pages[0].regions.len(), 1);
        let r = &pages[0].regions[0];
        assert_eq!(r.class_label, RegionClass::Stamp);
        assert_eq!(r.bbox.to_array(), [0.1, 0.2, 0.05, 0.04]);
        assert_eq!(r.confidence, 0.91);
    }

    #[test]
    fn unknown_class_rejected() {
        let err = parse_detections(
            doc(r#"{"id":"r1","class":"border","bbox":[0.1,0.2,0.05,0.04],"confidence":0.9}"#).as_bytes(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            DetectionError::UnknownClassLabel { path: "$.pages[0].regions[0].class".into(), label: "border".into() }
        );
    }

    #[test]
    fn overflowing_box_rejected() {
        let err = parse_detections(
            doc(r#"{"id":"r1","class":"stamp","bbox":[0.9,0.9,0.2,0.05],"confidence":0.9}"#).as_bytes(),
        )
        .unwrap_err();
        assert!(
            matches!(err, DetectionError::ValidationError { ref path, .. } if path == "$.pages[0].regions[0].bbox")
        );
    }

    #[test]
    fn edge_tolerance() {
        assert!(BBox::new(0.5, 0.0, 0.5 + 1e-10, 1.0).is_ok());
        assert_eq!(BBox::new(0.5, 0.0, 0.5 + 1e-8, 1.0), Err(BBoxError::OverflowX));
        assert_eq!(BBox::new(0.0, 0.0, 0.0, 1.0), Err(BBoxError::Degenerate));
        assert_eq!(BBox::new(-0.1, 0.0, 0.1, 1.0), Err(BBoxError::Negative));
        assert_eq!(BBox::new(f64::NAN, 0.0, 0.1, 1.0), Err(BBoxError::NotFinite));
    }

    #[test]
    fn schema_and_shape_errors() {
        let bad_version = doc("").replace("\"1.0\"", "\"2.0\"");
        assert_eq!(
            parse_detections(bad_version.as_bytes()).unwrap_err(),
            DetectionError::SchemaVersionUnsupported("2.0".into())
        );
        let dup = doc(
            r#"{"id":"r1","class":"stamp","bbox":[0.1,0.2,0.05,0.04],"confidence":0.9},{"id":"r1","class":"initial","bbox":[0.1,0.2,0.05,0.04],"confidence":0.9}"#,
        );
        assert_eq!(parse_detections(dup.as_bytes()).unwrap_err().path(), Some("$.pages[0].regions[1].id"));
        let extra = doc(r#"{"id":"r1","class":"stamp","bbox":[0.1,0.2,0.05,0.04],"confidence":0.9,"score":1}"#);
        assert_eq!(parse_detections(extra.as_bytes()).unwrap_err().path(), Some("$.pages[0].regions[0].score"));
        let conf = doc(r#"{"id":"r1","class":"stamp","bbox":[0.1,0.2,0.05,0.04],"confidence":1.5}"#);
        assert_eq!(parse_detections(conf.as_bytes()).unwrap_err().path(), Some("$.pages[0].regions[0].confidence"));
        let page0 = doc("").replace("\"page_number\":1", "\"page_number\":0");
        assert_eq!(parse_detections(page0.as_bytes()).unwrap_err().path(), Some("$.pages[0].page_number"));
        assert!(matches!(parse_detections(b"{"), Err(DetectionError::Json(_))));
    }

    #[test]
    fn round_trip() {
        let pages = parse_detections(
            doc(r#"{"id":"r1","class":"stamp","bbox":[0.1,0.2,0.05,0.04],"confidence":0.91}"#).as_bytes(),
        )
        .unwrap();
        let bytes = serialize_detections("m1", &pages).unwrap();
        assert_eq!(parse_detections(&bytes).unwrap(), pages);
    }

    #[test]
    fn iou_cases() {
        let a = bb(0.0, 0.0, 0.5, 0.5);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(0.5, 0.5, 0.5, 0.5)), 0.0);
        let b = bb(0.25, 0.25, 0.5, 0.5);
        assert!((iou(&a, &b) - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn filter_is_inclusive() {
        let b = bb(0.0, 0.0, 0.1, 0.1);
        let rs = vec![
            region("a", RegionClass::Stamp, b, 0.49),
            region("b", RegionClass::Stamp, b, 0.5),
            region("c", RegionClass::Stamp, b, 0.91),
        ];
        assert_eq!(filter_regions(&rs, 0.0), rs);
        let ids: Vec<_> = filter_regions(&rs, 0.5).into_iter().map(|r| r.id).collect();
        assert_eq!(ids, vec!["b", "c"]);
        let top = vec![region("x", RegionClass::Stamp, b, 0.9), region("y", RegionClass::Stamp, b, 1.0)];
        assert_eq!(filter_regions(&top, 1.0).len(), 1);
    }

    #[test]
    fn dedupe_is_per_class() {
        let b = bb(0.1, 0.1, 0.2, 0.2);
        let kept =
            dedupe_regions(&[region("a", RegionClass::Stamp, b, 0.8), region("b", RegionClass::Stamp, b, 0.9)], 0.5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "b");
        let kept =
            dedupe_regions(&[region("a", RegionClass::Stamp, b, 0.8), region("b", RegionClass::Ornament, b, 0.9)], 0.5);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn sections_by_containment() {
        let para = region("p", RegionClass::Paragraph, bb(0.1, 0.1, 0.8, 0.5), 0.9);
        let stamp = region("s", RegionClass::Stamp, bb(0.2, 0.2, 0.1, 0.1), 0.9);
        let lone = region("o", RegionClass::Ornament, bb(0.0, 0.9, 0.05, 0.05), 0.9);
        assert_eq!(assign_sections(&[para, stamp, lone]), vec![("s".to_string(), "p".to_string())]);
    }

    #[test]
    fn sections_prefer_larger_overlap() {
        // Member area 0.02; A covers x in [0.1, 0.22] (0.6), B covers [0.19, 0.3] (0.55).
        let initial = region("i", RegionClass::Initial, bb(0.1, 0.1, 0.2, 0.1), 0.9);
        let a = region("A", RegionClass::Paragraph, bb(0.0, 0.0, 0.22, 0.5), 0.9);
        let b = region("B", RegionClass::Paragraph, bb(0.19, 0.0, 0.5, 0.5), 0.9);
        assert!((overlap_fraction(&initial.bbox, &a.bbox) - 0.6).abs() < 1e-12);
        assert!((overlap_fraction(&initial.bbox, &b.bbox) - 0.55).abs() < 1e-12);
        assert_eq!(assign_sections(&[b, initial, a]), vec![("i".to_string(), "A".to_string())]);
    }

    #[test]
    fn section_ties_use_area_then_id() {
        let member = region("m", RegionClass::Sign, bb(0.4, 0.4, 0.1, 0.1), 0.9);
        let big = region("a", RegionClass::Paragraph, bb(0.0, 0.0, 1.0, 1.0), 0.9);
        let small = region("z", RegionClass::Header, bb(0.3, 0.3, 0.3, 0.3), 0.9);
        assert_eq!(assign_sections(&[member.clone(), big, small.clone()])[0].1, "z");
        let twin = region("y", RegionClass::Paragraph, bb(0.3, 0.3, 0.3, 0.3), 0.9);
        assert_eq!(assign_sections(&[member, small, twin])[0].1, "y");
    }

    #[test]
    fn descriptions_are_not_sections() {
        let desc = region("d", RegionClass::Description, bb(0.0, 0.0, 1.0, 1.0), 0.9);
        let stamp = region("s", RegionClass::Stamp, bb(0.2, 0.2, 0.1, 0.1), 0.9);
        assert!(assign_sections(&[desc, stamp]).is_empty());
    }
}
