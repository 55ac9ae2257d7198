use roxmltree::{Document, Node};

use super::{Datestamp, Granularity, OaiError, OaiRecord, OaiVerb, ProtocolCode, OAI_NS};

/// Continuation marker of a list response. An empty token marks the last page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResumptionToken {
    pub token: String,
    pub complete_list_size: Option<u64>,
    pub cursor: Option<u64>,
}

impl ResumptionToken {
    pub fn is_final(&self) -> bool {
        self.token.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifyInfo {
    pub repository_name: String,
    pub base_url: String,
    pub protocol_version: String,
    pub earliest_datestamp: String,
    pub deleted_record: String,
    pub granularity: Granularity,
    pub admin_emails: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataFormat {
    pub prefix: String,
    pub schema: String,
    pub namespace: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetInfo {
    pub spec: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OaiPayload {
    Identify(IdentifyInfo),
    MetadataFormats(Vec<MetadataFormat>),
    Sets(Vec<SetInfo>),
    /// `ListIdentifiers`: headers only, `metadata_xml` is always `None`.
    Headers(Vec<OaiRecord>),
    /// `ListRecords` and `GetRecord`.
    Records(Vec<OaiRecord>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OaiResponse {
    pub response_date: Option<String>,
    pub payload: OaiPayload,
    pub resumption: Option<ResumptionToken>,
}

impl OaiResponse {
    pub fn records(&self) -> &[OaiRecord] {
        match &self.payload {
            OaiPayload::Records(r) | OaiPayload::Headers(r) => r,
            _ => &[],
        }
    }

    /// Token to request the next page with, if there is one.
    pub fn next_token(&self) -> Option<&str> {
        self.resumption.as_ref().filter(|t| !t.is_final()).map(|t| t.token.as_str())
    }
}

fn malformed(msg: impl Into<String>) -> OaiError {
    OaiError::XmlMalformed(msg.into())
}

fn oai_children<'a, 'input>(node: Node<'a, 'input>, name: &'a str) -> impl Iterator<Item = Node<'a, 'input>> + 'a {
    node.children()
        .filter(move |c| c.is_element() && c.tag_name().name() == name && c.tag_name().namespace() == Some(OAI_NS))
}

fn oai_child<'a, 'input>(node: Node<'a, 'input>, name: &'a str) -> Option<Node<'a, 'input>> {
    oai_children(node, name).next()
}

fn text_of(node: Node) -> String {
    node.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect::<String>().trim().to_string()
}

fn child_text(node: Node, name: &str) -> String {
    oai_child(node, name).map(text_of).unwrap_or_default()
}

/// Parses an OAI-PMH response envelope.
///
/// Protocol `<error>` elements come back as [`OaiError::Protocol`]; when a
/// response carries several errors the first one is reported.
pub fn parse_response(xml: &[u8], expected_verb: OaiVerb) -> Result<OaiResponse, OaiError> {
    let text = std::str::from_utf8(xml).map_err(|e| malformed(format!("not UTF-8: {e}")))?;
    let doc = Document::parse(text).map_err(|e| malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "OAI-PMH" || root.tag_name().namespace() != Some(OAI_NS) {
        return Err(malformed(format!("root element is <{}>, not an OAI-PMH envelope", root.tag_name().name())));
    }

    if let Some(verb) = oai_child(root, "request").and_then(|r| r.attribute("verb")) {
        if verb != expected_verb.as_str() {
            return Err(OaiError::VerbMismatch { expected: expected_verb, found: verb.to_string() });
        }
    }

    if let Some(err) = oai_child(root, "error") {
        let code = err.attribute("code").unwrap_or_default();
        let code = ProtocolCode::parse(code).ok_or_else(|| malformed(format!("unknown error code '{code}'")))?;
        return Err(OaiError::Protocol { code, message: text_of(err) });
    }

    let body = root
        .children()
        .find(|c| {
            c.is_element()
                && c.tag_name().namespace() == Some(OAI_NS)
                && !matches!(c.tag_name().name(), "responseDate" | "request")
        })
        .ok_or_else(|| malformed("response has no payload element"))?;
    if body.tag_name().name() != expected_verb.as_str() {
        return Err(OaiError::VerbMismatch { expected: expected_verb, found: body.tag_name().name().to_string() });
    }

    let payload = match expected_verb {
        OaiVerb::Identify => OaiPayload::Identify(parse_identify(body)?),
        OaiVerb::ListMetadataFormats => OaiPayload::MetadataFormats(
            oai_children(body, "metadataFormat")
                .map(|f| MetadataFormat {
                    prefix: child_text(f, "metadataPrefix"),
                    schema: child_text(f, "schema"),
                    namespace: child_text(f, "metadataNamespace"),
                })
                .collect(),
        ),
        OaiVerb::ListSets => OaiPayload::Sets(
            oai_children(body, "set")
                .map(|s| SetInfo { spec: child_text(s, "setSpec"), name: child_text(s, "setName") })
                .collect(),
        ),
        OaiVerb::ListIdentifiers => OaiPayload::Headers(
            oai_children(body, "header").map(|h| parse_header(h, None, text)).collect::<Result<_, _>>()?,
        ),
        OaiVerb::ListRecords | OaiVerb::GetRecord => OaiPayload::Records(
            oai_children(body, "record")
                .map(|r| {
                    let header = oai_child(r, "header").ok_or_else(|| malformed("record without header"))?;
                    parse_header(header, oai_child(r, "metadata"), text)
                })
                .collect::<Result<_, _>>()?,
        ),
    };

    let resumption = oai_child(body, "resumptionToken")
        .map(|t| {
            let number = |attr: &str| -> Result<Option<u64>, OaiError> {
                t.attribute(attr)
                    .map(|v| v.trim().parse::<u64>().map_err(|_| malformed(format!("bad {attr} '{v}'"))))
                    .transpose()
            };
            Ok::<_, OaiError>(ResumptionToken {
                token: text_of(t),
                complete_list_size: number("completeListSize")?,
                cursor: number("cursor")?,
            })
        })
        .transpose()?;

    Ok(OaiResponse { response_date: oai_child(root, "responseDate").map(text_of), payload, resumption })
}

fn parse_identify(body: Node) -> Result<IdentifyInfo, OaiError> {
    let granularity = child_text(body, "granularity");
    Ok(IdentifyInfo {
        repository_name: child_text(body, "repositoryName"),
        base_url: child_text(body, "baseURL"),
        protocol_version: child_text(body, "protocolVersion"),
        earliest_datestamp: child_text(body, "earliestDatestamp"),
        deleted_record: child_text(body, "deletedRecord"),
        granularity: Granularity::parse(&granularity)
            .ok_or_else(|| malformed(format!("unknown granularity '{granularity}'")))?,
        admin_emails: oai_children(body, "adminEmail").map(text_of).collect(),
    })
}

fn parse_header(header: Node, metadata: Option<Node>, source: &str) -> Result<OaiRecord, OaiError> {
    let identifier = child_text(header, "identifier");
    if identifier.is_empty() {
        return Err(malformed("record header without identifier"));
    }
    let datestamp = Datestamp::parse(&child_text(header, "datestamp"))?;
    let deleted = header.attribute("status") == Some("deleted");
    let metadata_xml = match metadata {
        Some(m) if !deleted => Some(standalone_subtree(m, source).into_bytes()),
        _ => None,
    };
    Ok(OaiRecord {
        identifier,
        datestamp,
        set_specs: oai_children(header, "setSpec").map(text_of).collect(),
        metadata_xml,
        deleted,
    })
}

/// Source text of `node`, with in-scope namespace declarations that were
/// made on ancestors copied onto its start tag.
fn standalone_subtree(node: Node, source: &str) -> String {
    let raw = &source[node.range()];
    let tag_end = start_tag_end(raw);
    let start_tag = &raw[..tag_end];
    let name_end = raw[1..].find(|c: char| c.is_whitespace() || c == '>' || c == '/').map(|i| i + 1).unwrap_or(tag_end);

    let mut extra = String::new();
    for ns in node.namespaces() {
        let decl = match ns.name() {
            Some(prefix) => format!("xmlns:{prefix}"),
            None => "xmlns".to_string(),
        };
        if prefix_declared(start_tag, &decl) || ns.name() == Some("xml") {
            continue;
        }
        extra.push_str(&format!(" {decl}=\"{}\"", escape_attr(ns.uri())));
    }

    let mut out = String::with_capacity(raw.len() + extra.len());
    out.push_str(&raw[..name_end]);
    out.push_str(&extra);
    out.push_str(&raw[name_end..]);
    out
}

fn start_tag_end(raw: &str) -> usize {
    let mut quote = None;
    for (i, c) in raw.char_indices() {
        match (quote, c) {
            (None, '"' | '\'') => quote = Some(c),
            (Some(q), _) if c == q => quote = None,
            (None, '>') => return i,
            _ => {}
        }
    }
    raw.len()
}

fn prefix_declared(start_tag: &str, decl: &str) -> bool {
    start_tag.match_indices(decl).any(|(i, _)| {
        let before_ok = start_tag[..i].ends_with(char::is_whitespace);
        let after = start_tag[i + decl.len()..].trim_start();
        before_ok && after.starts_with('=')
    })
}

fn escape_attr(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;")
}
