//! Building blocks for turning digital-library records and page-layout
//! detections into a queryable RDF knowledge graph.
//!
//! The pipeline runs in stages:
//!
//! 1. [`oai`] harvests records from OAI-PMH repositories.
//! 2. [`metadata`] turns `oai_dc` payloads into [`metadata::DescriptiveRecord`]s.
//! 3. [`annotations`] ingests detector output (ten region classes) and
//!    provides box geometry and section assignment.
//! 4. [`enrichment`] derives layout, condition and provenance indicators.
//! 5. [`kg`] builds and serializes the graph; [`query`] evaluates basic
//!    graph patterns over it.
//! 6. [`recon`] links creators and subjects to external registries.

pub mod annotations;
pub mod enrichment;
pub mod kg;
pub mod metadata;
pub mod numfmt;
pub mod oai;
pub mod query;
pub mod recon;
