use super::vocab::{self, class, prop};
use super::{jdlo, mint_iri, Iri, IriKind, KnowledgeGraph, Literal, Term, Triple};
use crate::annotations::PageDetections;
use crate::enrichment::{split_scoped_id, EnrichedRecord};
use crate::numfmt::fixed6;

fn typed(lexical: String, datatype: &str) -> Literal {
    Literal::typed(lexical, Iri::new_unchecked(datatype.to_string()))
}

fn integer(n: impl ToString) -> Literal {
    typed(n.to_string(), vocab::XSD_INTEGER)
}

fn decimal(v: f64) -> Literal {
    typed(fixed6(v), vocab::XSD_DECIMAL)
}

struct Builder {
    graph: KnowledgeGraph,
}

impl Builder {
    fn add(&mut self, s: &Iri, p: Iri, o: impl Into<Term>) {
        self.graph.insert(Triple::new(s.clone(), p, o).expect("IRI subject"));
    }
}

fn page_iri(ms: &str, page: u32) -> Iri {
    mint_iri(IriKind::Page, &[ms, &page.to_string()]).expect("non-empty manuscript id")
}

fn region_iri(ms: &str, page: u32, region: &str) -> Iri {
    mint_iri(IriKind::Region, &[ms, &page.to_string(), region]).expect("non-empty ids")
}

/// Builds the graph for one manuscript.
///
/// `pages` should be the same detections the record was enriched from;
/// their regions become typed region resources with coordinates, and the
/// record's section assignments become `jdlo:belongsToSection` links.
pub fn build_graph(enriched: &EnrichedRecord, pages: &[PageDetections]) -> KnowledgeGraph {
    let ms_id = enriched.base.source_identifier.as_str();
    let ms = mint_iri(IriKind::Manuscript, &[ms_id]).expect("source identifier is non-empty");
    let rdf_type = Iri::new_unchecked(vocab::RDF_TYPE.into());
    let dcterms = |name: &str| Iri::new_unchecked(format!("{}{name}", vocab::DCTERMS_NS));
    let mut b = Builder { graph: KnowledgeGraph::new() };

    // provenance
    b.add(&ms, rdf_type.clone(), jdlo(class::MANUSCRIPT));
    for (predicate, values) in [
        ("title", &enriched.base.titles),
        ("creator", &enriched.base.creators),
        ("date", &enriched.base.dates),
        ("subject", &enriched.base.subjects),
    ] {
        for v in values {
            b.add(&ms, dcterms(predicate), Literal::string(v.clone()));
        }
    }

    // physical
    b.add(&ms, jdlo(prop::PAGE_COUNT), integer(enriched.pages_analyzed));
    if enriched.pages_analyzed > 0 {
        b.add(&ms, jdlo(prop::STAIN_COVERAGE), decimal(enriched.stain_coverage));
        b.add(&ms, jdlo(prop::TEXT_COVERAGE), decimal(enriched.text_coverage));
    }
    for flag in &enriched.condition_flags {
        b.add(&ms, jdlo(prop::CONDITION_FLAG), Literal::string(flag.as_str()));
    }

    // visual
    for page in pages {
        let p = page_iri(ms_id, page.page_number);
        b.add(&ms, jdlo(prop::HAS_PAGE), p.clone());
        b.add(&p, rdf_type.clone(), jdlo(class::PAGE));
        b.add(&p, jdlo(prop::PAGE_NUMBER), integer(page.page_number));
        b.add(&p, jdlo(prop::WIDTH_PX), integer(page.width_px));
        b.add(&p, jdlo(prop::HEIGHT_PX), integer(page.height_px));
        if !page.image_uri.is_empty() {
            b.add(&p, jdlo(prop::IMAGE_URI), typed(page.image_uri.clone(), vocab::XSD_ANY_URI));
        }
        for region in &page.regions {
            let r = region_iri(ms_id, page.page_number, &region.id);
            b.add(&p, jdlo(prop::HAS_REGION), r.clone());
            b.add(&r, rdf_type.clone(), jdlo(region.class_label.class_name()));
            b.add(&r, jdlo(prop::X), decimal(region.bbox.x()));
            b.add(&r, jdlo(prop::Y), decimal(region.bbox.y()));
            b.add(&r, jdlo(prop::WIDTH), decimal(region.bbox.w()));
            b.add(&r, jdlo(prop::HEIGHT), decimal(region.bbox.h()));
            b.add(&r, jdlo(prop::CONFIDENCE), decimal(region.confidence));
        }
    }
    for (member, section) in &enriched.section_assignments {
        let (Some((mp, mid)), Some((sp, sid))) = (split_scoped_id(member), split_scoped_id(section)) else {
            continue;
        };
        b.add(&region_iri(ms_id, mp, mid), jdlo(prop::BELONGS_TO_SECTION), region_iri(ms_id, sp, sid));
    }
    b.graph
}

/// `owl:sameAs` statements for accepted reconciliation links.
pub fn sameas_triples(links: &[(Iri, Iri)]) -> KnowledgeGraph {
    let same_as = Iri::new_unchecked(vocab::OWL_SAME_AS.into());
    links
        .iter()
        .map(|(local, external)| Triple::new(local.clone(), same_as.clone(), external.clone()).expect("IRI subject"))
        .collect()
}
