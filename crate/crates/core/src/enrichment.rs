//! Derived layout and condition indicators for a manuscript.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotations::{assign_sections, BBox, PageDetections, RegionClass};
use crate::metadata::{DescriptiveRecord, Provenance};
use crate::numfmt::serialize_round6;

pub const TEXT_CLASSES: [RegionClass; 3] = [RegionClass::Paragraph, RegionClass::Header, RegionClass::Description];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConditionThresholds {
    /// `stained` is set when mean stain coverage exceeds this.
    pub stained: f64,
    /// `heavily_stained` is set when mean stain coverage exceeds this.
    pub heavily_stained: f64,
}

impl Default for ConditionThresholds {
    fn default() -> Self {
        ConditionThresholds { stained: 0.02, heavily_stained: 0.10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionFlag {
    Stained,
    HeavilyStained,
}

impl ConditionFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionFlag::Stained => "stained",
            ConditionFlag::HeavilyStained => "heavily_stained",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedRecord {
    pub base: DescriptiveRecord,
    pub class_counts: BTreeMap<RegionClass, usize>,
    #[serde(serialize_with = "serialize_round6")]
    pub text_coverage: f64,
    #[serde(serialize_with = "serialize_round6")]
    pub stain_coverage: f64,
    pub condition_flags: BTreeSet<ConditionFlag>,
    pub has_stamp: bool,
    /// `(member, section)` ids scoped as `p<page_number>/<region id>`.
    pub section_assignments: Vec<(String, String)>,
    pub pages_analyzed: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum EnrichError {
    #[error("page {page_number} belongs to manuscript {found}, not {expected}")]
    ManuscriptMismatch { expected: String, found: String, page_number: u32 },
}

/// Regions per class over all pages, every class present.
pub fn class_counts(pages: &[PageDetections]) -> BTreeMap<RegionClass, usize> {
    let mut counts: BTreeMap<RegionClass, usize> = RegionClass::ALL.iter().map(|c| (*c, 0)).collect();
    for region in pages.iter().flat_map(|p| &p.regions) {
        *counts.entry(region.class_label).or_default() += 1;
    }
    counts
}

/// Exact area of the union of `boxes`.
///
/// The distinct x edges cut the plane into vertical slabs; within a slab
/// the covering boxes contribute y intervals whose merged length times the
/// slab width is the slab's covered area.
pub fn union_area(boxes: &[BBox]) -> f64 {
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.x(), b.right()]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut area = 0.0;
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(boxes.len());
    for slab in xs.windows(2) {
        let (left, right) = (slab[0], slab[1]);
        spans.clear();
        spans.extend(boxes.iter().filter(|b| b.x() <= left && b.right() >= right).map(|b| (b.y(), b.bottom())));
        if spans.is_empty() {
            continue;
        }
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = 0.0;
        let (mut start, mut end) = spans[0];
        for &(s, e) in &spans[1..] {
            if s > end {
                covered += end - start;
                start = s;
                end = e;
            } else if e > end {
                end = e;
            }
        }
        covered += end - start;
        area += (right - left) * covered;
    }
    area.clamp(0.0, 1.0)
}

/// Union area of the page's regions whose class is in `classes`.
pub fn page_coverage(page: &PageDetections, classes: &[RegionClass]) -> f64 {
    let boxes: Vec<BBox> = page.regions.iter().filter(|r| classes.contains(&r.class_label)).map(|r| r.bbox).collect();
    union_area(&boxes)
}

/// Builds the enriched record. Pages are processed in page-number order, so
/// the result does not depend on the order they are passed in.
pub fn enrich(
    record: &DescriptiveRecord,
    pages: &[PageDetections],
    thresholds: &ConditionThresholds,
) -> Result<EnrichedRecord, EnrichError> {
    if let Some(p) = pages.iter().find(|p| p.manuscript_id != record.source_identifier) {
        return Err(EnrichError::ManuscriptMismatch {
            expected: record.source_identifier.clone(),
            found: p.manuscript_id.clone(),
            page_number: p.page_number,
        });
    }
    let mut ordered: Vec<&PageDetections> = pages.iter().collect();
    ordered.sort_by_key(|p| p.page_number);

    let mean = |classes: &[RegionClass]| -> f64 {
        if ordered.is_empty() {
            return 0.0;
        }
        ordered.iter().map(|p| page_coverage(p, classes)).sum::<f64>() / ordered.len() as f64
    };
    let text_coverage = mean(&TEXT_CLASSES);
    let stain_coverage = mean(&[RegionClass::Stain]);

    let mut condition_flags = BTreeSet::new();
    if stain_coverage > thresholds.stained {
        condition_flags.insert(ConditionFlag::Stained);
    }
    if stain_coverage > thresholds.heavily_stained {
        condition_flags.insert(ConditionFlag::HeavilyStained);
    }

    let section_assignments = ordered
        .iter()
        .flat_map(|p| {
            assign_sections(&p.regions).into_iter().map(move |(member, section)| {
                (format!("p{}/{member}", p.page_number), format!("p{}/{section}", p.page_number))
            })
        })
        .collect();

    let class_counts = class_counts(pages);
    let mut base = record.clone();
    for field in [
        "class_counts",
        "text_coverage",
        "stain_coverage",
        "condition_flags",
        "has_stamp",
        "section_assignments",
        "pages_analyzed",
    ] {
        base.field_provenance.insert(field.to_string(), Provenance::Enriched);
    }

    Ok(EnrichedRecord {
        base,
        has_stamp: class_counts[&RegionClass::Stamp] > 0,
        class_counts,
        text_coverage,
        stain_coverage,
        condition_flags,
        section_assignments,
        pages_analyzed: ordered.len(),
    })
}

/// Splits a `p<n>/<id>` scoped id into page number and region id.
pub fn split_scoped_id(scoped: &str) -> Option<(u32, &str)> {
    let (page, id) = scoped.split_once('/')?;
    Some((page.strip_prefix('p')?.parse().ok()?, id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotations::Region;

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h).unwrap()
    }

    fn page(n: u32, regions: Vec<(RegionClass, BBox)>) -> PageDetections {
        PageDetections {
            manuscript_id: "m1".into(),
            page_number: n,
            image_uri: format!("https://img/{n}.jpg"),
            width_px: 1000,
            height_px: 1500,
            regions: regions
                .into_iter()
                .enumerate()
                .map(|(i, (c, b))| Region { id: format!("r{i}"), class_label: c, bbox: b, confidence: 0.9 })
                .collect(),
        }
    }

    #[test]
    fn counts_zero_filled() {
        let c = class_counts(&[]);
        assert_eq!(c.len(), 10);
        assert!(c.values().all(|v| *v == 0));
    }

    #[test]
    fn figure_one_counts() {
        use RegionClass::*;
        let p = page(
            1,
            vec![
                (Stamp, bb(0.7, 0.05, 0.1, 0.1)),
                (Initial, bb(0.1, 0.3, 0.1, 0.1)),
                (Header, bb(0.1, 0.1, 0.8, 0.1)),
                (Ornament, bb(0.1, 0.85, 0.8, 0.1)),
                (Paragraph, bb(0.1, 0.25, 0.8, 0.3)),
                (Paragraph, bb(0.1, 0.55, 0.8, 0.3)),
            ],
        );
        let c = class_counts(&[p]);
        assert_eq!((c[&Stamp], c[&Initial], c[&Header], c[&Ornament], c[&Paragraph]), (1, 1, 1, 1, 2));
        assert_eq!(c.values().sum::<usize>(), 6);
    }

    #[test]
    fn union_area_cases() {
        assert_eq!(union_area(&[]), 0.0);
        assert_eq!(union_area(&[bb(0.0, 0.0, 0.5, 0.5)]), 0.25);
        assert_eq!(union_area(&[bb(0.0, 0.0, 0.5, 0.5), bb(0.5, 0.5, 0.5, 0.5)]), 0.5);
        assert!((union_area(&[bb(0.0, 0.0, 0.5, 0.5), bb(0.25, 0.25, 0.5, 0.5)]) - 0.4375).abs() < 1e-15);
        assert_eq!(union_area(&[bb(0.0, 0.0, 1.0, 1.0), bb(0.2, 0.2, 0.1, 0.1)]), 1.0);
    }

    #[test]
    fn coverage_by_class() {
        let p = page(1, vec![(RegionClass::Stamp, bb(0.0, 0.0, 0.5, 0.5))]);
        assert_eq!(page_coverage(&p, &[RegionClass::Paragraph]), 0.0);
        let full = page(1, vec![(RegionClass::Image, bb(0.0, 0.0, 1.0, 1.0))]);
        assert_eq!(page_coverage(&full, &RegionClass::ALL), 1.0);
    }

    #[test]
    fn empty_manuscript() {
        let e = enrich(&DescriptiveRecord::new("m1"), &[], &ConditionThresholds::default()).unwrap();
        assert_eq!(e.pages_analyzed, 0);
        assert_eq!((e.text_coverage, e.stain_coverage), (0.0, 0.0));
        assert!(e.condition_flags.is_empty());
        assert!(!e.has_stamp);
        assert_eq!(e.base.field_provenance.get("has_stamp"), Some(&Provenance::Enriched));
    }

    #[test]
    fn stain_flag_at_five_percent() {
        // Two disjoint stains: 0.1 x 0.3 + 0.1 x 0.2 = 0.05.
        let p =
            page(1, vec![(RegionClass::Stain, bb(0.0, 0.0, 0.1, 0.3)), (RegionClass::Stain, bb(0.5, 0.5, 0.1, 0.2))]);
        let e = enrich(&DescriptiveRecord::new("m1"), &[p], &ConditionThresholds::default()).unwrap();
        assert!((e.stain_coverage - 0.05).abs() < 1e-15);
        assert_eq!(e.condition_flags, BTreeSet::from([ConditionFlag::Stained]));
    }

    #[test]
    fn text_coverage_is_page_mean() {
        let a = page(1, vec![(RegionClass::Paragraph, bb(0.0, 0.0, 0.5, 0.8))]);
        let b = page(2, vec![(RegionClass::Header, bb(0.0, 0.0, 1.0, 0.6))]);
        let e = enrich(&DescriptiveRecord::new("m1"), &[b, a], &ConditionThresholds::default()).unwrap();
        assert!((e.text_coverage - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scoped_section_ids() {
        let p = page(
            3,
            vec![(RegionClass::Paragraph, bb(0.0, 0.0, 1.0, 0.5)), (RegionClass::Stamp, bb(0.1, 0.1, 0.1, 0.1))],
        );
        let e = enrich(&DescriptiveRecord::new("m1"), &[p], &ConditionThresholds::default()).unwrap();
        assert_eq!(e.section_assignments, vec![("p3/r1".to_string(), "p3/r0".to_string())]);
        assert_eq!(split_scoped_id("p3/r1/x"), Some((3, "r1/x")));
        assert_eq!(split_scoped_id("3/r1"), None);
    }

    #[test]
    fn manuscript_mismatch() {
        let p = page(1, vec![]);
        let err = enrich(&DescriptiveRecord::new("other"), &[p], &ConditionThresholds::default()).unwrap_err();
        assert!(matches!(err, EnrichError::ManuscriptMismatch { page_number: 1, .. }));
    }

    #[test]
    fn json_rounds_to_six_digits() {
        let mut e = enrich(&DescriptiveRecord::new("m1"), &[], &ConditionThresholds::default()).unwrap();
        e.text_coverage = 1.0 / 3.0;
        e.stain_coverage = 0.0078125;
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["text_coverage"], serde_json::json!(0.333333));
        assert_eq!(json["stain_coverage"], serde_json::json!(0.007812));
        assert_eq!(json["class_counts"]["stamp"], serde_json::json!(0));
    }
}
