use std::collections::BTreeMap;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use url::Url;

use super::{OaiError, OaiVerb};

/// Everything except RFC 3986 unreserved characters.
const QUERY_VALUE: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

/// Request argument names understood by the protocol.
pub struct ArgKey;

impl ArgKey {
    pub const METADATA_PREFIX: &'static str = "metadataPrefix";
    pub const FROM: &'static str = "from";
    pub const UNTIL: &'static str = "until";
    pub const SET: &'static str = "set";
    pub const IDENTIFIER: &'static str = "identifier";
    pub const RESUMPTION_TOKEN: &'static str = "resumptionToken";
}

fn allowed(verb: OaiVerb) -> &'static [&'static str] {
    match verb {
        OaiVerb::Identify => &[],
        OaiVerb::ListMetadataFormats => &[ArgKey::IDENTIFIER],
        OaiVerb::ListSets => &[ArgKey::RESUMPTION_TOKEN],
        OaiVerb::ListIdentifiers | OaiVerb::ListRecords => {
            &[ArgKey::METADATA_PREFIX, ArgKey::FROM, ArgKey::UNTIL, ArgKey::SET, ArgKey::RESUMPTION_TOKEN]
        }
        OaiVerb::GetRecord => &[ArgKey::IDENTIFIER, ArgKey::METADATA_PREFIX],
    }
}

/// Builds the request URL for `verb`.
///
/// The query string always starts with `verb=` followed by the remaining
/// arguments in lexicographic key order, so equal inputs give byte-equal
/// URLs. Values are percent-encoded, keeping only unreserved characters.
pub fn build_request(endpoint: &Url, verb: OaiVerb, args: &BTreeMap<String, String>) -> Result<Url, OaiError> {
    if endpoint.query().is_some() || endpoint.fragment().is_some() || endpoint.cannot_be_a_base() {
        return Err(OaiError::BadEndpoint(endpoint.to_string()));
    }

    let permitted = allowed(verb);
    if let Some(key) = args.keys().find(|k| !permitted.contains(&k.as_str())) {
        return Err(OaiError::IllegalArgument { verb, argument: key.clone() });
    }

    if args.contains_key(ArgKey::RESUMPTION_TOKEN) {
        let exclusive = [ArgKey::FROM, ArgKey::UNTIL, ArgKey::SET, ArgKey::METADATA_PREFIX];
        if let Some(other) = args.keys().find(|k| exclusive.contains(&k.as_str())) {
            return Err(OaiError::IllegalArgumentCombination(other.clone()));
        }
    } else {
        let required: &[&'static str] = match verb {
            OaiVerb::GetRecord => &[ArgKey::IDENTIFIER, ArgKey::METADATA_PREFIX],
            OaiVerb::ListIdentifiers | OaiVerb::ListRecords => &[ArgKey::METADATA_PREFIX],
            _ => &[],
        };
        if let Some(missing) = required.iter().find(|k| !args.contains_key(**k)) {
            return Err(OaiError::MissingArgument { verb, argument: missing });
        }
    }

    let mut query = format!("verb={}", verb.as_str());
    // BTreeMap iteration is already lexicographic by key.
    for (key, value) in args {
        query.push('&');
        query.push_str(key);
        query.push('=');
        query.extend(utf8_percent_encode(value, QUERY_VALUE));
    }

    let mut url = endpoint.clone();
    url.set_query(Some(&query));
    Ok(url)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn endpoint() -> Url {
        Url::parse("https://x/oai").unwrap()
    }

    #[test]
    fn list_records_with_prefix() {
        let url = build_request(&endpoint(), OaiVerb::ListRecords, &args(&[("metadataPrefix", "oai_dc")])).unwrap();
        assert_eq!(url.as_str(), "https://x/oai?verb=ListRecords&metadataPrefix=oai_dc");
    }

    #[test]
    fn token_is_exclusive() {
        let err = build_request(&endpoint(), OaiVerb::ListRecords, &args(&[("resumptionToken", "t1"), ("set", "mss")]))
            .unwrap_err();
        assert!(matches!(err, OaiError::IllegalArgumentCombination(k) if k == "set"));
    }

    #[test]
    fn get_record_encodes_identifier() {
        let url = build_request(
            &endpoint(),
            OaiVerb::GetRecord,
            &args(&[("identifier", "oai:jbc:1"), ("metadataPrefix", "oai_dc")]),
        )
        .unwrap();
        assert_eq!(url.as_str(), "https://x/oai?verb=GetRecord&identifier=oai%3Ajbc%3A1&metadataPrefix=oai_dc");
    }

    #[test]
    fn get_record_requires_both_arguments() {
        let err = build_request(&endpoint(), OaiVerb::GetRecord, &args(&[("identifier", "oai:jbc:1")])).unwrap_err();
        assert!(matches!(err, OaiError::MissingArgument { argument: "metadataPrefix", .. }));
        let err = build_request(&endpoint(), OaiVerb::GetRecord, &args(&[])).unwrap_err();
        assert!(matches!(err, OaiError::MissingArgument { argument: "identifier", .. }));
    }

    #[test]
    fn list_records_requires_prefix_without_token() {
        let err = build_request(&endpoint(), OaiVerb::ListRecords, &args(&[("set", "mss")])).unwrap_err();
        assert!(matches!(err, OaiError::MissingArgument { argument: "metadataPrefix", .. }));
        let url = build_request(&endpoint(), OaiVerb::ListRecords, &args(&[("resumptionToken", "a b/c")])).unwrap();
        assert_eq!(url.query(), Some("verb=ListRecords&resumptionToken=a%20b%2Fc"));
    }

    #[test]
    fn rejects_arguments_outside_the_verb() {
        let err = build_request(&endpoint(), OaiVerb::Identify, &args(&[("set", "x")])).unwrap_err();
        assert!(matches!(err, OaiError::IllegalArgument { .. }));
        let err =
            build_request(&endpoint(), OaiVerb::ListRecords, &args(&[("metadataPrefix", "oai_dc"), ("page", "2")]))
                .unwrap_err();
        assert!(matches!(err, OaiError::IllegalArgument { argument, .. } if argument == "page"));
    }

    #[test]
    fn rejects_endpoint_with_query() {
        let e = Url::parse("https://x/oai?foo=1").unwrap();
        assert!(matches!(build_request(&e, OaiVerb::Identify, &args(&[])), Err(OaiError::BadEndpoint(_))));
    }

    #[test]
    fn remaining_keys_sorted() {
        let url = build_request(
            &endpoint(),
            OaiVerb::ListRecords,
            &args(&[("until", "2024-12-31"), ("set", "mss"), ("metadataPrefix", "oai_dc"), ("from", "2024-01-01")]),
        )
        .unwrap();
        assert_eq!(
            url.query(),
            Some("verb=ListRecords&from=2024-01-01&metadataPrefix=oai_dc&set=mss&until=2024-12-31")
        );
    }
}
