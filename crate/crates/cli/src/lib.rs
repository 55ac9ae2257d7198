//! `mskg`: command-line pipeline from OAI-PMH harvest to a queryable
//! knowledge graph, backed by a content-addressed flat-file store.
//!
//! Exit codes: 0 success, 1 validation or protocol error, 2 usage error.
//! Errors go to standard error as `E_<AREA>_<KIND>: message`.

pub mod config;
pub mod store;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mskg_core::annotations::{
    dedupe_regions, filter_regions, parse_detections, serialize_detections, DetectionError, PageDetections,
};
use mskg_core::enrichment::{enrich, EnrichedRecord};
use mskg_core::kg::{
    build_graph, mint_iri, parse_ntriples, sameas_triples, serialize_ntriples, serialize_turtle, Iri, IriKind,
    KnowledgeGraph,
};
use mskg_core::metadata::{parse_dc, DescriptiveRecord};
use mskg_core::numfmt::fixed6;
use mskg_core::oai::{
    Datestamp, FixtureTransport, HarvestInterruption, HarvestRequest, Harvester, HttpTransport, OaiError, OaiRecord,
    Transport,
};
use mskg_core::query::{evaluate, parse_query, QueryError};
use mskg_core::recon::{reconcile, FixtureClient, HttpSearchClient, ReconOutcome, SearchClient};
use serde_json::Value;
use url::Url;

pub use config::Config;
pub use store::{sanitize_id, unsanitize_id, verify_store, Stage, Store, StoreError, VerifyReport};

/// Base URL used for requests when `--endpoint` names a fixture directory.
pub const FIXTURE_ENDPOINT: &str = "http://fixture.invalid/oai";

#[derive(Debug, Parser)]
#[command(name = "mskg", version, about = "Harvest, enrich and link manuscript metadata into an RDF knowledge graph")]
struct Cli {
    /// JSON configuration file (thresholds, endpoints, rate limits).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Harvest oai_dc records into store/raw and store/records.
    Harvest(HarvestArgs),
    /// Validate detector output and store filtered, de-duplicated regions.
    IngestDetections(IngestArgs),
    /// Derive class counts, coverage and condition flags.
    Enrich(EnrichArgs),
    /// Write one N-Triples and one Turtle graph per manuscript.
    BuildKg(StoreArgs),
    /// Link creators and subjects to an external registry.
    Reconcile(ReconArgs),
    /// Evaluate a basic graph pattern over the stored graphs.
    Query(QueryArgs),
    /// Summarize the store and verify its manifest.
    Stats(StoreArgs),
}

#[derive(Debug, Args)]
struct StoreArgs {
    /// Store root directory.
    #[arg(long, visible_alias = "out", default_value = "store")]
    store: PathBuf,
}

#[derive(Debug, Args)]
struct HarvestArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// Repository base URL, or a fixture directory with a manifest.json.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "oai_dc")]
    prefix: String,
    #[arg(long)]
    set: Option<String>,
    /// YYYY-MM-DD or YYYY-MM-DDThh:mm:ssZ
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    until: Option<String>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// A detections JSON document, or a directory of them.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    iou: Option<f64>,
}

#[derive(Debug, Args)]
struct EnrichArgs {
    #[command(flatten)]
    store: StoreArgs,
    #[arg(long)]
    stained: Option<f64>,
    #[arg(long)]
    heavily_stained: Option<f64>,
}

#[derive(Debug, Args)]
struct ReconArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// JSON file mapping queries to candidate lists (offline client).
    #[arg(long, conflicts_with = "endpoint")]
    fixture: Option<PathBuf>,
    /// Search URL template containing `{query}`.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    accept: Option<f64>,
    #[arg(long)]
    review: Option<f64>,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false, args = ["query", "file"])]
struct QueryArgs {
    #[command(flatten)]
    store: StoreArgs,
    /// Query text, e.g. `?r rdf:type jdlo:Stamp`.
    #[arg(long)]
    query: Option<String>,
    /// File holding the query text.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Variables to keep (comma-separated); duplicates are removed.
    #[arg(long, value_delimiter = ',')]
    select: Vec<String>,
}

/// A reportable failure: stable code, message and exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: &'static str,
    pub message: String,
    pub exit: i32,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into(), exit: 1 }
    }

    fn usage(code: &'static str, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into(), exit: 2 }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Failure {
        let code = match &e {
            StoreError::EmptyIdentifier => "E_STORE_EMPTY_IDENTIFIER",
            StoreError::ManifestMissing(_) => "E_STORE_MANIFEST_MISSING",
            StoreError::Io { .. } => "E_STORE_IO",
            StoreError::ManifestCorrupt(..) => "E_STORE_MANIFEST_CORRUPT",
            StoreError::Locked(_) => "E_STORE_LOCKED",
        };
        Failure::new(code, e.to_string())
    }
}

pub fn oai_code(e: &OaiError) -> &'static str {
    use mskg_core::oai::ProtocolCode as P;
    match e {
        OaiError::Protocol { code, .. } => match code {
            P::BadArgument => "E_OAI_BAD_ARGUMENT",
            P::BadResumptionToken => "E_OAI_BAD_RESUMPTION_TOKEN",
            P::BadVerb => "E_OAI_BAD_VERB",
            P::CannotDisseminateFormat => "E_OAI_CANNOT_DISSEMINATE_FORMAT",
            P::IdDoesNotExist => "E_OAI_ID_DOES_NOT_EXIST",
            P::NoRecordsMatch => "E_OAI_NO_RECORDS_MATCH",
            P::NoMetadataFormats => "E_OAI_NO_METADATA_FORMATS",
            P::NoSetHierarchy => "E_OAI_NO_SET_HIERARCHY",
        },
        OaiError::UnknownVerb(_)
        | OaiError::IllegalArgument { .. }
        | OaiError::IllegalArgumentCombination(_)
        | OaiError::MissingArgument { .. } => "E_OAI_BAD_REQUEST",
        OaiError::BadEndpoint(_) => "E_OAI_BAD_ENDPOINT",
        OaiError::XmlMalformed(_) => "E_OAI_XML_MALFORMED",
        OaiError::VerbMismatch { .. } => "E_OAI_VERB_MISMATCH",
        OaiError::BadDatestamp(_) => "E_OAI_BAD_DATESTAMP",
        OaiError::InvalidRange { .. } => "E_OAI_INVALID_RANGE",
        OaiError::HttpStatus { .. } => "E_OAI_HTTP_STATUS",
        OaiError::TransportExhausted { .. } => "E_OAI_TRANSPORT_EXHAUSTED",
        OaiError::TokenLoop(_) => "E_OAI_TOKEN_LOOP",
        OaiError::Sink(_) => "E_STORE_IO",
    }
}

pub fn detection_code(e: &DetectionError) -> &'static str {
    match e {
        DetectionError::Json(_) => "E_SCHEMA_JSON",
        DetectionError::SchemaVersionUnsupported(_) => "E_SCHEMA_VERSION",
        DetectionError::ValidationError { .. } => "E_SCHEMA_VALIDATION",
        DetectionError::UnknownClassLabel { .. } => "E_SCHEMA_UNKNOWN_CLASS",
        DetectionError::MixedManuscripts(..) => "E_SCHEMA_MIXED_MANUSCRIPTS",
    }
}

pub fn query_code(e: &QueryError) -> &'static str {
    match e {
        QueryError::Syntax { .. } => "E_QUERY_SYNTAX",
        QueryError::UnknownVariable(_) => "E_QUERY_UNKNOWN_VARIABLE",
    }
}

/// Runs the CLI against the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI with explicit output streams; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let produced_by = argv.iter().map(|a| a.to_string_lossy()).collect::<Vec<_>>().join(" ");
    let mut ctx = Context { out, err, produced_by, config: Config::default() };
    let result = ctx.load_config(cli.config.as_deref()).and_then(|()| ctx.dispatch(cli.command));
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(ctx.err, "{}: {}", f.code, f.message);
            f.exit
        }
    }
}

struct Context<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    produced_by: String,
    config: Config,
}

type CmdResult = Result<(), Failure>;

fn record_path(sid: &str) -> String {
    format!("{}/{sid}.json", Stage::Record.dir())
}

fn raw_path(sid: &str) -> String {
    format!("{}/{sid}.xml", Stage::Raw.dir())
}

fn detections_path(sid: &str) -> String {
    format!("{}/{sid}.json", Stage::Detections.dir())
}

fn enriched_path(sid: &str) -> String {
    format!("{}/{sid}.json", Stage::Enriched.dir())
}

/// Sanitized id from a store-relative artifact path.
fn stem(rel: &str) -> &str {
    let name = rel.rsplit('/').next().unwrap_or(rel);
    name.rsplit_once('.').map(|(s, _)| s).unwrap_or(name)
}

fn pretty_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

/// A stored record: live, or a tombstone left by a deletion.
enum StoredRecord {
    Live(Box<DescriptiveRecord>),
    Deleted,
}

fn load_record(store: &Store, rel: &str) -> Result<StoredRecord, Failure> {
    let bytes = store.read(rel)?;
    let value: Value =
        serde_json::from_slice(&bytes).map_err(|e| Failure::new("E_SCHEMA_RECORD", format!("{rel}: {e}")))?;
    if value.get("deleted").and_then(Value::as_bool) == Some(true) {
        return Ok(StoredRecord::Deleted);
    }
    serde_json::from_value(value)
        .map(|r| StoredRecord::Live(Box::new(r)))
        .map_err(|e| Failure::new("E_SCHEMA_RECORD", format!("{rel}: {e}")))
}

fn load_pages(store: &Store, sid: &str) -> Result<Vec<PageDetections>, Failure> {
    let rel = detections_path(sid);
    if !store.manifest().contains_key(&rel) {
        return Ok(Vec::new());
    }
    parse_detections(&store.read(&rel)?).map_err(|e| Failure::new(detection_code(&e), format!("{rel}: {e}")))
}

impl Context<'_> {
    fn load_config(&mut self, path: Option<&Path>) -> CmdResult {
        if let Some(path) = path {
            self.config = Config::load(path).map_err(|m| Failure::usage("E_CONFIG_INVALID", m))?;
        }
        Ok(())
    }

    fn dispatch(&mut self, command: Command) -> CmdResult {
        match command {
            Command::Harvest(a) => self.harvest(a),
            Command::IngestDetections(a) => self.ingest(a),
            Command::Enrich(a) => self.enrich(a),
            Command::BuildKg(a) => self.build_kg(a),
            Command::Reconcile(a) => self.reconcile(a),
            Command::Query(a) => self.query(a),
            Command::Stats(a) => self.stats(a),
        }
    }

    fn warn(&mut self, code: &str, message: impl std::fmt::Display) {
        let _ = writeln!(self.err, "{code}: {message}");
    }

    fn harvest(&mut self, args: HarvestArgs) -> CmdResult {
        let endpoint = args
            .endpoint
            .or_else(|| self.config.endpoints.oai.clone())
            .ok_or_else(|| Failure::usage("E_USAGE", "harvest needs --endpoint (or endpoints.oai in --config)"))?;
        let datestamp = |s: Option<String>| -> Result<Option<Datestamp>, Failure> {
            s.map(|s| s.parse::<Datestamp>().map_err(|e| Failure::new(oai_code(&e), e.to_string()))).transpose()
        };
        let (transport, base): (Box<dyn Transport>, Url) = if Path::new(&endpoint).is_dir() {
            let t = FixtureTransport::open(&endpoint).map_err(|e| Failure::new("E_OAI_FIXTURE", e.to_string()))?;
            (Box::new(t), Url::parse(FIXTURE_ENDPOINT).expect("valid"))
        } else {
            let url =
                Url::parse(&endpoint).map_err(|e| Failure::new("E_OAI_BAD_ENDPOINT", format!("{endpoint}: {e}")))?;
            let t = HttpTransport::new().map_err(|e| Failure::new("E_OAI_TRANSPORT", e.to_string()))?;
            (Box::new(t), url)
        };
        let request = HarvestRequest {
            endpoint: base,
            metadata_prefix: args.prefix,
            set: args.set,
            from: datestamp(args.from)?,
            until: datestamp(args.until)?,
        };

        let mut store = Store::open(&args.store.store)?;
        let _lock = store.lock()?;
        let produced_by = self.produced_by.clone();
        let mut bad_records: Vec<String> = Vec::new();
        let harvester = Harvester::new(transport);
        let outcome = harvester.harvest(&request, &mut |record: OaiRecord| {
            let sid = sanitize_id(&record.identifier)?;
            if record.deleted {
                let tombstone = serde_json::json!({"source_identifier": record.identifier, "deleted": true});
                store.put(Stage::Record, &record_path(&sid), &pretty_json(&tombstone), &produced_by)?;
                store.remove(&raw_path(&sid))?;
                return Ok(());
            }
            if let Some(xml) = &record.metadata_xml {
                store.put(Stage::Raw, &raw_path(&sid), xml, &produced_by)?;
            }
            match parse_dc(&record) {
                Ok(dc) => store.put(Stage::Record, &record_path(&sid), &pretty_json(&dc), &produced_by)?,
                Err(e) => bad_records.push(e.to_string()),
            }
            Ok(())
        });
        store.commit()?;

        let summary = outcome.map_err(|e| Failure::new(oai_code(&e), e.to_string()))?;
        let _ = writeln!(self.out, "records_received\t{}", summary.records_received);
        let _ = writeln!(self.out, "records_deleted\t{}", summary.records_deleted);
        let _ = writeln!(self.out, "pages_fetched\t{}", summary.pages_fetched);
        let _ = writeln!(self.out, "completed\t{}", summary.completed);
        for message in &bad_records {
            self.warn("E_SCHEMA_DC", message);
        }
        if let Some(HarvestInterruption::TokenExpired { token, message }) = summary.interruption {
            return Err(Failure::new(
                "E_OAI_TOKEN_EXPIRED",
                format!("resumption token '{token}' rejected ({message}); harvest is incomplete"),
            ));
        }
        if !bad_records.is_empty() {
            return Err(Failure::new("E_SCHEMA_DC", format!("{} records had unusable metadata", bad_records.len())));
        }
        Ok(())
    }

    fn ingest(&mut self, args: IngestArgs) -> CmdResult {
        let mut store = Store::open(&args.store.store)?;
        let _lock = store.lock()?;
        if !store.has_stage(Stage::Record) {
            return Err(Failure::new(
                "E_SCHEMA_MISSING_RECORDS",
                "no harvested records in the store; run harvest first",
            ));
        }
        let min_confidence = args.min_confidence.unwrap_or(self.config.thresholds.min_confidence);
        let iou = args.iou.unwrap_or(self.config.thresholds.iou);

        let inputs: Vec<PathBuf> = if args.input.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(&args.input)
                .map_err(|e| Failure::new("E_STORE_IO", format!("{}: {e}", args.input.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            files
        } else {
            vec![args.input.clone()]
        };

        let mut docs: Vec<(String, Vec<PageDetections>)> = Vec::new();
        let mut failures: Vec<Failure> = Vec::new();
        let mut seen = BTreeSet::new();
        for path in &inputs {
            let shown = path.display();
            let bytes = match fs::read(path) {
                Ok(b) => b,
                Err(e) => {
                    failures.push(Failure::new("E_STORE_IO", format!("{shown}: {e}")));
                    continue;
                }
            };
            let pages = match parse_detections(&bytes) {
                Ok(p) => p,
                Err(e) => {
                    failures.push(Failure::new(detection_code(&e), format!("{shown}: {e}")));
                    continue;
                }
            };
            let manuscript = serde_json::from_slice::<Value>(&bytes)
                .ok()
                .and_then(|v| v.get("manuscript_id").and_then(Value::as_str).map(str::to_string))
                .unwrap_or_default();
            let sid = sanitize_id(&manuscript)?;
            let rel = record_path(&sid);
            let known =
                store.manifest().contains_key(&rel) && matches!(load_record(&store, &rel)?, StoredRecord::Live(_));
            if !known {
                failures.push(Failure::new(
                    "E_SCHEMA_UNKNOWN_MANUSCRIPT",
                    format!("{shown}: no harvested record for manuscript '{manuscript}'"),
                ));
                continue;
            }
            if !seen.insert(manuscript.clone()) {
                failures.push(Failure::new(
                    "E_SCHEMA_DUPLICATE_MANUSCRIPT",
                    format!("{shown}: manuscript '{manuscript}' appears in more than one input"),
                ));
                continue;
            }
            docs.push((manuscript, pages));
        }
        if let Some(last) = failures.pop() {
            for f in &failures {
                self.warn(f.code, &f.message);
            }
            return Err(last);
        }

        let (mut kept, mut dropped, mut page_count) = (0, 0, 0);
        for (manuscript, mut pages) in docs {
            for page in &mut pages {
                let before = page.regions.len();
                page.regions = dedupe_regions(&filter_regions(&page.regions, min_confidence), iou);
                kept += page.regions.len();
                dropped += before - page.regions.len();
            }
            page_count += pages.len();
            let bytes = serialize_detections(&manuscript, &pages)
                .map_err(|e| Failure::new(detection_code(&e), e.to_string()))?;
            store.put(Stage::Detections, &detections_path(&sanitize_id(&manuscript)?), &bytes, &self.produced_by)?;
        }
        store.commit()?;
        let _ = writeln!(self.out, "documents\t{}", seen.len());
        let _ = writeln!(self.out, "pages\t{page_count}");
        let _ = writeln!(self.out, "regions_kept\t{kept}");
        let _ = writeln!(self.out, "regions_dropped\t{dropped}");
        Ok(())
    }

    fn enrich(&mut self, args: EnrichArgs) -> CmdResult {
        let mut store = Store::open(&args.store.store)?;
        let _lock = store.lock()?;
        if !store.has_stage(Stage::Detections) {
            return Err(Failure::new(
                "E_SCHEMA_MISSING_DETECTIONS",
                "no detections in the store; run ingest-detections first",
            ));
        }
        let mut thresholds = self.config.thresholds.condition();
        if let Some(v) = args.stained {
            thresholds.stained = v;
        }
        if let Some(v) = args.heavily_stained {
            thresholds.heavily_stained = v;
        }

        let records: Vec<String> = store.entries(Stage::Record).into_iter().map(str::to_string).collect();
        let mut written = 0;
        for rel in records {
            let StoredRecord::Live(record) = load_record(&store, &rel)? else { continue };
            let sid = stem(&rel).to_string();
            let pages = load_pages(&store, &sid)?;
            let enriched = enrich(&record, &pages, &thresholds)
                .map_err(|e| Failure::new("E_SCHEMA_MANUSCRIPT_MISMATCH", format!("{rel}: {e}")))?;
            store.put(Stage::Enriched, &enriched_path(&sid), &pretty_json(&enriched), &self.produced_by)?;
            written += 1;
        }
        store.commit()?;
        let _ = writeln!(self.out, "enriched\t{written}");
        Ok(())
    }

    fn build_kg(&mut self, args: StoreArgs) -> CmdResult {
        let mut store = Store::open(&args.store)?;
        let _lock = store.lock()?;
        if !store.has_stage(Stage::Enriched) {
            return Err(Failure::new(
                "E_SCHEMA_MISSING_ENRICHED",
                "no enriched records in the store; run enrich first",
            ));
        }
        let enriched: Vec<String> = store.entries(Stage::Enriched).into_iter().map(str::to_string).collect();
        let mut triples = 0;
        for rel in &enriched {
            let record: EnrichedRecord = serde_json::from_slice(&store.read(rel)?)
                .map_err(|e| Failure::new("E_SCHEMA_ENRICHED", format!("{rel}: {e}")))?;
            let sid = stem(rel).to_string();
            let pages = load_pages(&store, &sid)?;
            let graph = build_graph(&record, &pages);
            triples += graph.len();
            let dir = Stage::Graph.dir();
            store.put(
                Stage::Graph,
                &format!("{dir}/{sid}.nt"),
                serialize_ntriples(&graph).as_bytes(),
                &self.produced_by,
            )?;
            store.put(
                Stage::Graph,
                &format!("{dir}/{sid}.ttl"),
                serialize_turtle(&graph).as_bytes(),
                &self.produced_by,
            )?;
        }
        store.commit()?;
        let _ = writeln!(self.out, "graphs\t{}", enriched.len());
        let _ = writeln!(self.out, "triples\t{triples}");
        Ok(())
    }

    fn reconcile(&mut self, args: ReconArgs) -> CmdResult {
        let mut store = Store::open(&args.store.store)?;
        let _lock = store.lock()?;
        if !store.has_stage(Stage::Record) {
            return Err(Failure::new(
                "E_SCHEMA_MISSING_RECORDS",
                "no harvested records in the store; run harvest first",
            ));
        }
        let mut thresholds = self.config.thresholds.recon();
        if let Some(v) = args.accept {
            thresholds.accept = v;
        }
        if let Some(v) = args.review {
            thresholds.review = v;
        }
        let client: Box<dyn SearchClient> =
            match (args.fixture, args.endpoint.or_else(|| self.config.endpoints.search.clone())) {
                (Some(path), _) => {
                    Box::new(FixtureClient::open(&path).map_err(|e| Failure::new("E_RECON_FIXTURE", e.to_string()))?)
                }
                (None, Some(endpoint)) => Box::new(
                    HttpSearchClient::new(
                        endpoint,
                        self.config.search_fields.clone().unwrap_or_default(),
                        self.config.rate_limits.search_per_second,
                    )
                    .map_err(|e| Failure::new("E_RECON_CLIENT", e.to_string()))?,
                ),
                (None, None) => {
                    return Err(Failure::usage(
                        "E_USAGE",
                        "reconcile needs --fixture or --endpoint (or endpoints.search)",
                    ))
                }
            };

        let mut creators = BTreeSet::new();
        let mut subjects = BTreeSet::new();
        for rel in store.entries(Stage::Record) {
            if let StoredRecord::Live(r) = load_record(&store, rel)? {
                creators.extend(r.creators);
                subjects.extend(r.subjects);
            }
        }

        let mut links: Vec<(Iri, Iri)> = Vec::new();
        for (kind, labels) in [(IriKind::Agent, creators), (IriKind::Concept, subjects)] {
            let labels: Vec<String> = labels.into_iter().collect();
            let outcome: ReconOutcome = reconcile(&labels, client.as_ref(), &thresholds)
                .map_err(|e| Failure::new("E_RECON_THRESHOLDS", e.to_string()))?;
            for (label, external) in &outcome.links {
                let local = mint_iri(kind, &[label]).map_err(|e| Failure::new("E_RECON_LABEL", e.to_string()))?;
                let _ = writeln!(self.out, "link\t{label}\t{external}");
                links.push((local, external.clone()));
            }
            for c in &outcome.candidates {
                let _ = writeln!(
                    self.out,
                    "candidate\t{}\t{}\t{}\t{}",
                    c.query,
                    c.external_iri,
                    c.external_label,
                    fixed6(c.score)
                );
            }
            for (label, reason) in &outcome.skipped {
                self.warn("E_RECON_UNAVAILABLE", format!("{label}: {reason}"));
            }
        }
        let graph = sameas_triples(&links);
        let rel = format!("{}/sameas.nt", Stage::Links.dir());
        store.put(Stage::Links, &rel, serialize_ntriples(&graph).as_bytes(), &self.produced_by)?;
        store.commit()?;
        Ok(())
    }

    fn query(&mut self, args: QueryArgs) -> CmdResult {
        let store = Store::open_existing(&args.store.store)?;
        if !store.has_stage(Stage::Graph) {
            return Err(Failure::new("E_QUERY_NO_GRAPH", "no graphs in the store; run build-kg first"));
        }
        let text = match (args.query, args.file) {
            (Some(q), _) => q,
            (None, Some(path)) => fs::read_to_string(&path)
                .map_err(|e| Failure::new("E_QUERY_FILE", format!("{}: {e}", path.display())))?,
            (None, None) => unreachable!("clap requires one source"),
        };
        let patterns = parse_query(&text).map_err(|e| Failure::new(query_code(&e), e.to_string()))?;

        let mut graph = KnowledgeGraph::new();
        for rel in store.entries(Stage::Graph).into_iter().chain(store.entries(Stage::Links)) {
            if !rel.ends_with(".nt") {
                continue;
            }
            let text = String::from_utf8(store.read(rel)?)
                .map_err(|e| Failure::new("E_QUERY_GRAPH", format!("{rel}: {e}")))?;
            let part = parse_ntriples(&text).map_err(|e| Failure::new("E_QUERY_GRAPH", format!("{rel}: {e}")))?;
            graph.merge(&part);
        }

        let mut result = evaluate(&patterns, &graph);
        if !args.select.is_empty() {
            let vars: Vec<String> = args.select.iter().map(|v| v.trim().trim_start_matches('?').to_string()).collect();
            result = result.project(&vars).map_err(|e| Failure::new(query_code(&e), e.to_string()))?;
        }
        let _ = write!(self.out, "{}", result.to_tsv());
        Ok(())
    }

    fn stats(&mut self, args: StoreArgs) -> CmdResult {
        let store = Store::open_existing(&args.store)?;
        for stage in Stage::ALL {
            let _ = writeln!(self.out, "files.{stage}\t{}", store.entries(stage).len());
        }
        // Aggregates are only meaningful over files that match the manifest.
        let report = verify_store(store.root())?;
        if !report.is_clean() {
            let _ = writeln!(self.out, "verify\t{} missing, {} modified", report.missing.len(), report.modified.len());
            for p in &report.missing {
                self.warn("E_STORE_MISSING", p);
            }
            for p in &report.modified {
                self.warn("E_STORE_MODIFIED", p);
            }
            return Err(Failure::new("E_STORE_CORRUPT", "store contents do not match the manifest"));
        }
        let (mut live, mut deleted) = (0, 0);
        for rel in store.entries(Stage::Record) {
            match load_record(&store, rel)? {
                StoredRecord::Live(_) => live += 1,
                StoredRecord::Deleted => deleted += 1,
            }
        }
        let _ = writeln!(self.out, "records.live\t{live}");
        let _ = writeln!(self.out, "records.deleted\t{deleted}");
        let (mut with_stamp, mut stained, mut pages) = (0, 0, 0);
        for rel in store.entries(Stage::Enriched) {
            let e: EnrichedRecord = serde_json::from_slice(&store.read(rel)?)
                .map_err(|e| Failure::new("E_SCHEMA_ENRICHED", format!("{rel}: {e}")))?;
            with_stamp += usize::from(e.has_stamp);
            stained += usize::from(!e.condition_flags.is_empty());
            pages += e.pages_analyzed;
        }
        let _ = writeln!(self.out, "enriched.pages_analyzed\t{pages}");
        let _ = writeln!(self.out, "enriched.with_stamp\t{with_stamp}");
        let _ = writeln!(self.out, "enriched.stained\t{stained}");
        let _ = writeln!(self.out, "verify\tclean");
        Ok(())
    }
}
