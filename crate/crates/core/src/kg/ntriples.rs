use super::vocab::XSD_STRING;
use super::{Iri, KgError, KnowledgeGraph, Literal, Term, Triple};

/// Canonical N-Triples: one statement per line, lines sorted bytewise,
/// each terminated by `\n`.
pub fn serialize_ntriples(graph: &KnowledgeGraph) -> String {
    let mut lines: Vec<String> = graph.iter().map(|t| t.to_string()).collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Parses an N-Triples document. Blank lines and `#` comments are skipped.
pub fn parse_ntriples(text: &str) -> Result<KnowledgeGraph, KgError> {
    let mut graph = KnowledgeGraph::new();
    for (i, line) in text.lines().enumerate() {
        let mut cur = Cursor { rest: line, line: i + 1 };
        cur.skip_ws();
        if cur.rest.is_empty() || cur.rest.starts_with('#') {
            continue;
        }
        let subject = match cur.peek() {
            Some('<') => Term::Iri(cur.iri()?),
            Some('_') => cur.blank()?,
            _ => return Err(cur.error("expected IRI or blank node as subject")),
        };
        cur.skip_ws();
        let predicate = match cur.peek() {
            Some('<') => cur.iri()?,
            _ => return Err(cur.error("expected IRI as predicate")),
        };
        cur.skip_ws();
        let object = match cur.peek() {
            Some('<') => Term::Iri(cur.iri()?),
            Some('_') => cur.blank()?,
            Some('"') => Term::Literal(cur.literal()?),
            _ => return Err(cur.error("expected IRI, blank node or literal as object")),
        };
        cur.skip_ws();
        if !cur.eat('.') {
            return Err(cur.error("expected '.'"));
        }
        cur.skip_ws();
        if !(cur.rest.is_empty() || cur.rest.starts_with('#')) {
            return Err(cur.error("trailing characters after '.'"));
        }
        let line = cur.line;
        let triple =
            Triple::new(subject, predicate, object).map_err(|e| KgError::Parse { line, message: e.to_string() })?;
        graph.insert(triple);
    }
    Ok(graph)
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> KgError {
        KgError::Parse { line: self.line, message: message.into() }
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn uchar(&mut self, digits: usize) -> Result<char, KgError> {
        if self.rest.len() < digits || !self.rest.is_char_boundary(digits) {
            return Err(self.error("truncated \\u escape"));
        }
        let (hex, rest) = self.rest.split_at(digits);
        let code = u32::from_str_radix(hex, 16).map_err(|_| self.error(format!("bad escape digits '{hex}'")))?;
        self.rest = rest;
        char::from_u32(code).ok_or_else(|| self.error(format!("escape U+{code:X} is not a character")))
    }

    fn iri(&mut self) -> Result<Iri, KgError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated IRI")),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.uchar(4)?),
                    Some('U') => out.push(self.uchar(8)?),
                    _ => return Err(self.error("invalid escape in IRI")),
                },
                Some(c) => out.push(c),
            }
        }
        Iri::new(out).map_err(|e| self.error(e.to_string()))
    }

    fn blank(&mut self) -> Result<Term, KgError> {
        if !self.rest.starts_with("_:") {
            return Err(self.error("expected '_:'"));
        }
        self.rest = &self.rest[2..];
        let end =
            self.rest.find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))).unwrap_or(self.rest.len());
        // A trailing '.' is the statement terminator, not part of the label.
        let label = self.rest[..end].trim_end_matches('.');
        self.rest = &self.rest[label.len()..];
        Term::blank(label).map_err(|e| self.error(e.to_string()))
    }

    fn literal(&mut self) -> Result<Literal, KgError> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string literal")),
                Some('"') => break,
                Some('\\') => lexical.push(match self.bump() {
                    Some('t') => '\t',
                    Some('b') => '\u{8}',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u') => self.uchar(4)?,
                    Some('U') => self.uchar(8)?,
                    _ => return Err(self.error("invalid escape in literal")),
                }),
                Some('\n') | Some('\r') => return Err(self.error("raw line break in literal")),
                Some(c) => lexical.push(c),
            }
        }
        if self.rest.starts_with("^^") {
            self.rest = &self.rest[2..];
            if self.peek() != Some('<') {
                return Err(self.error("expected datatype IRI after '^^'"));
            }
            let datatype = self.iri()?;
            if datatype.as_str() == XSD_STRING {
                return Ok(Literal::string(lexical));
            }
            Ok(Literal::typed(lexical, datatype))
        } else if self.eat('@') {
            let end = self.rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '-')).unwrap_or(self.rest.len());
            let tag = &self.rest[..end];
            self.rest = &self.rest[end..];
            Literal::lang(lexical, tag).map_err(|e| self.error(e.to_string()))
        } else {
            Ok(Literal::string(lexical))
        }
    }
}
