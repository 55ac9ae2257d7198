//! Namespaces and the fixed prefix table.

pub const RESOURCE_BASE: &str = "https://example.org/jdl/resource/";
pub const ONTOLOGY_NS: &str = "https://example.org/jdl/ontology#";
pub const DCTERMS_NS: &str = "http://purl.org/dc/terms/";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_ANY_URI: &str = "http://www.w3.org/2001/XMLSchema#anyURI";
pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";

/// Prefixes understood by the Turtle writer and the query parser, in the
/// order they are declared.
pub const PREFIXES: [(&str, &str); 6] = [
    ("jdlo", ONTOLOGY_NS),
    ("jdlr", RESOURCE_BASE),
    ("dcterms", DCTERMS_NS),
    ("rdf", RDF_NS),
    ("xsd", XSD_NS),
    ("owl", OWL_NS),
];

pub fn expand_prefix(prefix: &str) -> Option<&'static str> {
    PREFIXES.iter().find(|(p, _)| *p == prefix).map(|(_, ns)| *ns)
}

/// Properties of the `jdlo:` vocabulary.
pub mod prop {
    pub const HAS_PAGE: &str = "hasPage";
    pub const HAS_REGION: &str = "hasRegion";
    pub const PAGE_NUMBER: &str = "pageNumber";
    pub const PAGE_COUNT: &str = "pageCount";
    pub const STAIN_COVERAGE: &str = "stainCoverage";
    pub const TEXT_COVERAGE: &str = "textCoverage";
    pub const CONDITION_FLAG: &str = "conditionFlag";
    pub const WIDTH_PX: &str = "widthPx";
    pub const HEIGHT_PX: &str = "heightPx";
    pub const IMAGE_URI: &str = "imageUri";
    pub const X: &str = "x";
    pub const Y: &str = "y";
    pub const WIDTH: &str = "width";
    pub const HEIGHT: &str = "height";
    pub const CONFIDENCE: &str = "confidence";
    pub const BELONGS_TO_SECTION: &str = "belongsToSection";
}

/// Classes of the `jdlo:` vocabulary besides the ten region classes.
pub mod class {
    pub const MANUSCRIPT: &str = "Manuscript";
    pub const PAGE: &str = "Page";
}
