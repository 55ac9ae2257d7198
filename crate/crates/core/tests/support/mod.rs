//! Fixture loaders, random generators and brute-force oracles shared by
//! the integration tests (also pulled into the CLI acceptance suite).
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::PathBuf;

use mskg_core::annotations::{parse_detections, BBox, PageDetections, Region, RegionClass};
use mskg_core::enrichment::{enrich, ConditionThresholds, EnrichedRecord};
use mskg_core::kg::{build_graph, Iri, KnowledgeGraph, Literal, Term, Triple};
use mskg_core::metadata::{parse_dc, DescriptiveRecord};
use mskg_core::oai::{parse_response, OaiVerb};
use mskg_core::query::{PatternTerm, TriplePattern};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn read_fixture(rel: &str) -> Vec<u8> {
    let path = fixtures().join(rel);
    fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// The single-page manuscript with stamp, initial, header, ornament and
/// two paragraphs.
pub fn fig1_pages() -> Vec<PageDetections> {
    parse_detections(&read_fixture("detections/oai%3Ajbc%3A1.json")).unwrap()
}

pub fn fig1_record() -> DescriptiveRecord {
    let response = parse_response(&read_fixture("oai/repository/page1.xml"), OaiVerb::ListRecords).unwrap();
    let record = response.records().iter().find(|r| r.identifier == "oai:jbc:1").unwrap().clone();
    parse_dc(&record).unwrap()
}

pub fn fig1_enriched() -> EnrichedRecord {
    enrich(&fig1_record(), &fig1_pages(), &ConditionThresholds::default()).unwrap()
}

pub fn fig1_graph() -> KnowledgeGraph {
    build_graph(&fig1_enriched(), &fig1_pages())
}

// ---- geometry ----

/// Random valid box with sides in `[min_side, max_side]`.
pub fn random_bbox(rng: &mut StdRng, min_side: f64, max_side: f64) -> BBox {
    let w = rng.gen_range(min_side..=max_side);
    let h = rng.gen_range(min_side..=max_side);
    let x = rng.gen_range(0.0..=1.0 - w);
    let y = rng.gen_range(0.0..=1.0 - h);
    BBox::new(x, y, w, h).unwrap()
}

/// Box snapped to a 1/20 grid so that exact overlaps and ties occur.
pub fn grid_bbox(rng: &mut StdRng) -> BBox {
    let x = rng.gen_range(0..19);
    let y = rng.gen_range(0..19);
    let w = rng.gen_range(1..=(20 - x).min(10));
    let h = rng.gen_range(1..=(20 - y).min(10));
    BBox::new(x as f64 / 20.0, y as f64 / 20.0, w as f64 / 20.0, h as f64 / 20.0).unwrap()
}

pub fn random_region(rng: &mut StdRng, id: String, grid: bool) -> Region {
    let class_label = *RegionClass::ALL.choose(rng).unwrap();
    let bbox = if grid { grid_bbox(rng) } else { random_bbox(rng, 0.01, 0.6) };
    // Two-decimal confidences make ties common.
    let confidence = rng.gen_range(0..=100) as f64 / 100.0;
    Region { id, class_label, bbox, confidence }
}

pub fn random_page(rng: &mut StdRng, manuscript: &str, page_number: u32, max_regions: usize) -> PageDetections {
    let n = rng.gen_range(0..=max_regions);
    let mut ids: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
    ids.shuffle(rng);
    PageDetections {
        manuscript_id: manuscript.to_string(),
        page_number,
        image_uri: format!("https://img.example/{manuscript}/{page_number}.jpg"),
        width_px: rng.gen_range(1..5000),
        height_px: rng.gen_range(1..5000),
        regions: ids
            .into_iter()
            .map(|id| {
                let grid = rng.gen_bool(0.5);
                random_region(rng, id, grid)
            })
            .collect(),
    }
}

/// Valid pages (distinct page numbers, 0..=3 pages) for one manuscript.
pub fn random_document(rng: &mut StdRng, manuscript: &str) -> Vec<PageDetections> {
    let mut numbers: Vec<u32> = (1..=40).collect();
    numbers.shuffle(rng);
    let n = rng.gen_range(0..=3);
    numbers[..n].iter().map(|&p| random_page(rng, manuscript, p, 8)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Defect {
    BadClass,
    BboxOutOfRange,
    DuplicateId,
}

/// A serialized document with one injected defect, plus the JSON path the
/// parser must report.
pub fn invalid_document(rng: &mut StdRng, defect: Defect) -> (Vec<u8>, String) {
    let mut page = random_page(rng, "ms:bad", 1, 6);
    while page.regions.len() < 2 {
        let id = format!("x{}", page.regions.len());
        page.regions.push(random_region(rng, id, true));
    }
    let bytes = mskg_core::annotations::serialize_detections("ms:bad", &[page.clone()]).unwrap();
    let mut doc: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    let at = rng.gen_range(1..page.regions.len());
    let region = &mut doc["pages"][0]["regions"][at];
    let base = format!("$.pages[0].regions[{at}]");
    let path = match defect {
        Defect::BadClass => {
            region["class"] = serde_json::json!(["border", "Stamp", "figure", ""][rng.gen_range(0..4)]);
            format!("{base}.class")
        }
        Defect::BboxOutOfRange => {
            let bad = [[0.9, 0.9, 0.2, 0.05], [-0.1, 0.2, 0.3, 0.3], [0.2, 0.5, 0.3, 0.6], [0.1, 0.1, 0.0, 0.2]];
            region["bbox"] = serde_json::json!(bad[rng.gen_range(0..bad.len())]);
            format!("{base}.bbox")
        }
        Defect::DuplicateId => {
            region["id"] = serde_json::json!(page.regions[0].id);
            format!("{base}.id")
        }
    };
    (serde_json::to_vec(&doc).unwrap(), path)
}

/// Intersection over union by inclusion-exclusion on the raw coordinates.
pub fn iou_oracle(a: [f64; 4], b: [f64; 4]) -> f64 {
    let ix = (a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0]);
    let iy = (a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1]);
    let inter = if ix > 0.0 && iy > 0.0 { ix * iy } else { 0.0 };
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    inter / union
}

/// Fraction of the cells of an `n` x `n` grid whose centre lies inside at
/// least one box.
pub fn raster_union(boxes: &[[f64; 4]], n: usize) -> f64 {
    let nf = n as f64;
    let mut covered = 0usize;
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for row in 0..n {
        let cy = (row as f64 + 0.5) / nf;
        spans.clear();
        for b in boxes {
            if cy < b[1] || cy >= b[1] + b[3] {
                continue;
            }
            // Columns whose centre (c + 0.5) / n lies in [x, x + w).
            let first = (b[0] * nf - 0.5).ceil().max(0.0) as usize;
            let end = ((b[0] + b[2]) * nf - 0.5).ceil().clamp(0.0, nf) as usize;
            if first < end {
                spans.push((first, end));
            }
        }
        spans.sort_unstable();
        let mut reach = 0;
        for &(s, e) in &spans {
            let s = s.max(reach);
            if e > s {
                covered += e - s;
                reach = e;
            }
        }
    }
    covered as f64 / (nf * nf)
}

/// Suppression by repeatedly taking the best remaining region and
/// discarding every same-class region overlapping it at the threshold.
pub fn nms_oracle(regions: &[Region], threshold: f64) -> Vec<String> {
    let mut remaining: Vec<&Region> = regions.iter().collect();
    let mut kept = Vec::new();
    while !remaining.is_empty() {
        let best = (0..remaining.len())
            .reduce(|i, j| {
                let (a, b) = (remaining[i], remaining[j]);
                if b.confidence > a.confidence || (b.confidence == a.confidence && b.id < a.id) {
                    j
                } else {
                    i
                }
            })
            .unwrap();
        let top = remaining.remove(best);
        kept.push(top.id.clone());
        remaining.retain(|r| {
            r.class_label != top.class_label || iou_oracle(r.bbox.to_array(), top.bbox.to_array()) < threshold
        });
    }
    kept
}

fn overlap_area(a: [f64; 4], b: [f64; 4]) -> f64 {
    let ix = (a[0] + a[2]).min(b[0] + b[2]) - a[0].max(b[0]);
    let iy = (a[1] + a[3]).min(b[1] + b[3]) - a[1].max(b[1]);
    if ix > 0.0 && iy > 0.0 {
        ix * iy
    } else {
        0.0
    }
}

/// Enumerates every (member, section) candidate, keeps the qualifying ones
/// and picks per member by the documented preference order.
pub fn sections_oracle(regions: &[Region]) -> Vec<(String, String)> {
    let is_section = |r: &Region| matches!(r.class_label, RegionClass::Paragraph | RegionClass::Header);
    let mut candidates: Vec<(usize, f64, f64, String, String)> = Vec::new();
    for (mi, m) in regions.iter().enumerate() {
        if is_section(m) {
            continue;
        }
        let mb = m.bbox.to_array();
        for s in regions.iter().filter(|s| is_section(s)) {
            let sb = s.bbox.to_array();
            let frac = overlap_area(mb, sb) / (mb[2] * mb[3]);
            if frac >= 0.5 {
                candidates.push((mi, frac, sb[2] * sb[3], s.id.clone(), m.id.clone()));
            }
        }
    }
    let mut best: BTreeMap<usize, (f64, f64, String, String)> = BTreeMap::new();
    for (mi, frac, area, sid, mid) in candidates {
        let better = match best.get(&mi) {
            None => true,
            Some((bf, ba, bs, _)) => frac > *bf || (frac == *bf && (area < *ba || (area == *ba && sid < *bs))),
        };
        if better {
            best.insert(mi, (frac, area, sid, mid));
        }
    }
    best.into_values().map(|(_, _, sid, mid)| (mid, sid)).collect()
}

// ---- strings ----

/// Jaro-Winkler written out from the textbook definition.
#[allow(clippy::needless_range_loop)]
pub fn jaro_winkler_oracle(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let limit = (a.len().max(b.len()) / 2) as isize - 1;
    let mut b_taken = vec![false; b.len()];
    let mut a_hits: Vec<usize> = Vec::new();
    for i in 0..a.len() {
        for j in 0..b.len() {
            if !b_taken[j] && a[i] == b[j] && (i as isize - j as isize).abs() <= limit.max(0) {
                b_taken[j] = true;
                a_hits.push(i);
                break;
            }
        }
    }
    let m = a_hits.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let b_hits: Vec<usize> = (0..b.len()).filter(|&j| b_taken[j]).collect();
    let half_transpositions = a_hits.iter().zip(&b_hits).filter(|(&i, &j)| a[i] != b[j]).count() as f64;
    let t = half_transpositions / 2.0;
    let jaro = (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0;
    let mut l = 0;
    while l < 4 && l < a.len() && l < b.len() && a[l] == b[l] {
        l += 1;
    }
    jaro + l as f64 * 0.1 * (1.0 - jaro)
}

// ---- graphs ----

const TRICKY: &[&str] =
    &["\"", "\\", "\n", "\r", "\t", "é", "ł", "日本", "🜁", " ", "'", "<", ">", "^^", "@", "#", "\u{7f}", "\u{1}"];

fn random_text(rng: &mut StdRng, max_len: usize) -> String {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                TRICKY.choose(rng).unwrap().to_string()
            } else {
                (rng.gen_range(b'a'..=b'z') as char).to_string()
            }
        })
        .collect()
}

pub fn random_iri(rng: &mut StdRng) -> Iri {
    let pool =
        ["https://example.org/jdl/resource/ms/", "https://example.org/jdl/ontology#", "http://x.test/a/", "urn:x:"];
    let mut local: String = (0..rng.gen_range(1..8)).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
    if rng.gen_bool(0.2) {
        local.push_str(["%20", "é", "-1", "_z", ".q", "~"].choose(rng).unwrap());
    }
    Iri::new(format!("{}{local}", pool.choose(rng).unwrap())).unwrap()
}

pub fn random_literal(rng: &mut StdRng) -> Literal {
    match rng.gen_range(0..5) {
        0 => Literal::string(random_text(rng, 12)),
        1 => Literal::lang(random_text(rng, 8), ["en", "la", "pl-PL", "de-1901"].choose(rng).unwrap()).unwrap(),
        2 => Literal::typed(
            rng.gen_range(-1000i64..1000).to_string(),
            Iri::new("http://www.w3.org/2001/XMLSchema#integer").unwrap(),
        ),
        3 => Literal::typed(
            format!("{:.6}", rng.gen_range(0.0..1.0)),
            Iri::new("http://www.w3.org/2001/XMLSchema#decimal").unwrap(),
        ),
        _ => Literal::typed(random_text(rng, 6), random_iri(rng)),
    }
}

/// Random graph with up to `max` triples and varied terms. Blank nodes are
/// included only when `blanks` is set.
pub fn random_graph(rng: &mut StdRng, max: usize, blanks: bool) -> KnowledgeGraph {
    let n = rng.gen_range(0..=max);
    let mut g = KnowledgeGraph::new();
    for _ in 0..n {
        let subject: Term = if blanks && rng.gen_bool(0.15) {
            Term::blank(format!("b{}", rng.gen_range(0..20))).unwrap()
        } else {
            Term::Iri(random_iri(rng))
        };
        let predicate = random_iri(rng);
        let object: Term = match rng.gen_range(0..3) {
            0 => Term::Iri(random_iri(rng)),
            1 if blanks => Term::blank(format!("b{}", rng.gen_range(0..20))).unwrap(),
            _ => Term::Literal(random_literal(rng)),
        };
        g.insert(Triple::new(subject, predicate, object).unwrap());
    }
    g
}

/// Graph over a small vocabulary so joins have many matches.
pub fn vocab_graph(
    rng: &mut StdRng,
    nodes: usize,
    predicates: usize,
    literals: usize,
    triples: usize,
) -> KnowledgeGraph {
    let node = |i: usize| Term::Iri(Iri::new(format!("http://g.test/n{i}")).unwrap());
    let pred = |i: usize| Iri::new(format!("http://g.test/p{i}")).unwrap();
    let mut g = KnowledgeGraph::new();
    for _ in 0..triples {
        let s = node(rng.gen_range(0..nodes));
        let p = pred(rng.gen_range(0..predicates));
        let o = if literals > 0 && rng.gen_bool(0.3) {
            Term::Literal(Literal::string(format!("v{}", rng.gen_range(0..literals))))
        } else {
            node(rng.gen_range(0..nodes))
        };
        g.insert(Triple::new(s, p, o).unwrap());
    }
    g
}

/// Random basic graph pattern of 1..=max_patterns patterns over at most
/// `max_vars` distinct variables, with constants drawn from the graph (and
/// occasionally a term absent from it).
pub fn random_bgp(
    rng: &mut StdRng,
    graph: &KnowledgeGraph,
    max_patterns: usize,
    max_vars: usize,
) -> Vec<TriplePattern> {
    let triples = graph.sorted_triples();
    let names = ["a", "b", "c", "d"];
    let vars = &names[..max_vars.clamp(1, 4)];
    let absent = Term::Iri(Iri::new("http://g.test/absent").unwrap());
    let pick = |rng: &mut StdRng, pos: usize| -> PatternTerm {
        if triples.is_empty() || rng.gen_bool(0.55) {
            return PatternTerm::Var(vars.choose(rng).unwrap().to_string());
        }
        if rng.gen_bool(0.05) {
            return PatternTerm::Term(absent.clone());
        }
        let t = triples.choose(rng).unwrap();
        PatternTerm::Term(match pos {
            0 => t.subject().clone(),
            1 => Term::Iri(t.predicate().clone()),
            _ => t.object().clone(),
        })
    };
    (0..rng.gen_range(1..=max_patterns)).map(|_| TriplePattern::new(pick(rng, 0), pick(rng, 1), pick(rng, 2))).collect()
}

/// Every assignment of graph terms to the pattern variables, kept when all
/// substituted patterns are triples of the graph. Rows are N-Triples
/// forms in first-appearance variable order.
pub fn bgp_oracle(patterns: &[TriplePattern], graph: &KnowledgeGraph) -> BTreeSet<Vec<String>> {
    let mut ids: HashMap<Term, u32> = HashMap::new();
    let mut terms: Vec<Term> = Vec::new();
    let mut intern = |t: Term, ids: &mut HashMap<Term, u32>| -> u32 {
        *ids.entry(t.clone()).or_insert_with(|| {
            terms.push(t);
            terms.len() as u32 - 1
        })
    };
    let mut facts: HashSet<[u32; 3]> = HashSet::new();
    for t in graph.iter() {
        let s = intern(t.subject().clone(), &mut ids);
        let p = intern(Term::Iri(t.predicate().clone()), &mut ids);
        let o = intern(t.object().clone(), &mut ids);
        facts.insert([s, p, o]);
    }
    let mut vars: Vec<&str> = Vec::new();
    for p in patterns {
        for t in [&p.subject, &p.predicate, &p.object] {
            if let PatternTerm::Var(v) = t {
                if !vars.contains(&v.as_str()) {
                    vars.push(v);
                }
            }
        }
    }
    // Constants absent from the graph can never match.
    let mut compiled: Vec<[Result<u32, usize>; 3]> = Vec::new();
    for p in patterns {
        let mut slot = [Ok(0), Ok(0), Ok(0)];
        for (k, t) in [&p.subject, &p.predicate, &p.object].into_iter().enumerate() {
            slot[k] = match t {
                PatternTerm::Var(v) => Err(vars.iter().position(|x| x == v).unwrap()),
                PatternTerm::Term(c) => match ids.get(c) {
                    Some(&id) => Ok(id),
                    None => return BTreeSet::new(),
                },
            };
        }
        compiled.push(slot);
    }
    let domain = terms.len() as u32;
    let mut out = BTreeSet::new();
    if domain == 0 && !vars.is_empty() {
        return out;
    }
    let mut assignment = vec![0u32; vars.len()];
    loop {
        let holds = compiled.iter().all(|slot| {
            let v = |s: &Result<u32, usize>| match s {
                Ok(id) => *id,
                Err(i) => assignment[*i],
            };
            facts.contains(&[v(&slot[0]), v(&slot[1]), v(&slot[2])])
        });
        if holds {
            out.insert(assignment.iter().map(|&i| terms[i as usize].to_string()).collect());
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == assignment.len() {
                return out;
            }
            assignment[k] += 1;
            if assignment[k] < domain {
                break;
            }
            assignment[k] = 0;
            k += 1;
        }
    }
}
