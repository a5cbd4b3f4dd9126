//! N-Triples subset, pipe/TAB triple files, and the graph snapshot format.

use super::{Graph, NodeId, Triple};
use crate::error::{Error, Result};
use crate::records;

const SNAPSHOT_HEADER: &str = "#walkrag-graph v1";
const ENTITY_BASE: &str = "http://walkrag.local/entity/";
const RELATION_BASE: &str = "http://walkrag.local/relation/";

#[derive(Debug, PartialEq)]
enum Term {
    Iri(String),
    Literal(String),
}

impl Term {
    /// Node label: IRI local name or literal value.
    fn label(self) -> String {
        match self {
            Term::Iri(iri) => local_name(&iri).to_owned(),
            Term::Literal(s) => s,
        }
    }
}

/// Substring after the last `/` or `#`; the whole IRI if that is empty.
fn local_name(iri: &str) -> &str {
    match iri.rfind(['/', '#']) {
        Some(i) if i + 1 < iri.len() => &iri[i + 1..],
        Some(_) => iri,
        None => iri,
    }
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, msg)
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        let mut chars = self.rest.chars();
        match chars.next() {
            Some('<') => {
                let end = self.rest.find('>').ok_or_else(|| self.err("unterminated IRI"))?;
                let raw = &self.rest[1..end];
                if raw.contains([' ', '<', '"']) {
                    return Err(self.err(format!("invalid character in IRI <{raw}>")));
                }
                let iri = unescape_nt(raw, self.line)?;
                self.rest = &self.rest[end + 1..];
                Ok(Term::Iri(iri))
            }
            Some('"') => {
                let mut escaped = false;
                let mut end = None;
                for (i, c) in self.rest.char_indices().skip(1) {
                    match (escaped, c) {
                        (true, _) => escaped = false,
                        (false, '\\') => escaped = true,
                        (false, '"') => {
                            end = Some(i);
                            break;
                        }
                        _ => {}
                    }
                }
                let end = end.ok_or_else(|| self.err("unterminated literal"))?;
                let value = unescape_nt(&self.rest[1..end], self.line)?;
                self.rest = &self.rest[end + 1..];
                if self.rest.starts_with("^^") {
                    return Err(Error::Unsupported { line: self.line, feature: "datatyped literal".into() });
                }
                if self.rest.starts_with('@') {
                    return Err(Error::Unsupported { line: self.line, feature: "language-tagged literal".into() });
                }
                Ok(Term::Literal(value))
            }
            Some('_') if self.rest.starts_with("_:") => {
                Err(Error::Unsupported { line: self.line, feature: "blank node".into() })
            }
            Some(c) => Err(self.err(format!("unexpected character `{c}`"))),
            None => Err(self.err("unexpected end of line")),
        }
    }
}

fn unescape_nt(s: &str, line: usize) -> Result<String> {
    if !s.contains('\\') {
        return Ok(s.to_owned());
    }
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let hex_char = |chars: &mut std::str::Chars<'_>, n: usize| -> Result<char> {
            let hex: String = chars.take(n).collect();
            u32::from_str_radix(&hex, 16)
                .ok()
                .filter(|_| hex.len() == n)
                .and_then(char::from_u32)
                .ok_or_else(|| Error::parse(line, format!("invalid unicode escape `{hex}`")))
        };
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('b') => out.push('\u{8}'),
            Some('f') => out.push('\u{c}'),
            Some('"') => out.push('"'),
            Some('\'') => out.push('\''),
            Some('\\') => out.push('\\'),
            Some('u') => out.push(hex_char(&mut chars, 4)?),
            Some('U') => out.push(hex_char(&mut chars, 8)?),
            other => return Err(Error::parse(line, format!("invalid escape `\\{}`", other.unwrap_or(' ')))),
        }
    }
    Ok(out)
}

/// Parses the N-Triples subset: IRIs in angle brackets, plain literals in
/// double quotes, no blank nodes. Node labels are IRI local names or
/// literal values.
pub fn parse_ntriples(text: &str) -> Result<Graph> {
    let mut triples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cur = Cursor { rest: line, line: line_no };
        let subject = cur.term()?;
        let predicate = match cur.term()? {
            Term::Iri(iri) => local_name(&iri).to_owned(),
            Term::Literal(_) => return Err(cur.err("predicate must be an IRI")),
        };
        let object = cur.term()?;
        cur.skip_ws();
        let Some(after) = cur.rest.strip_prefix('.') else {
            return Err(cur.err("expected `.` after object"));
        };
        let after = after.trim_start();
        if !after.is_empty() && !after.starts_with('#') {
            return Err(cur.err(format!("trailing content `{after}`")));
        }
        let (head, tail) = (subject.label(), object.label());
        if head.is_empty() || tail.is_empty() || predicate.is_empty() {
            return Err(cur.err("empty label"));
        }
        triples.push(Triple::new(head.as_str(), predicate.as_str(), tail.as_str()));
    }
    Ok(Graph::from_triples(triples))
}

/// Parses `head|relation|tail` or `head<TAB>relation<TAB>tail` lines. The
/// separator is chosen once from the first data line (TAB wins when present).
pub fn parse_tsv(text: &str) -> Result<Graph> {
    let mut separator = None;
    let mut triples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let sep = *separator.get_or_insert(if line.contains('\t') { '\t' } else { '|' });
        let fields: Vec<&str> = line.split(sep).collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 fields separated by {:?}, found {}", sep, fields.len()),
            ));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(Error::parse(line_no, "empty field"));
        }
        triples.push(Triple::new(fields[0], fields[1], fields[2]));
    }
    Ok(Graph::from_triples(triples))
}

fn tsv_safe(label: &str) -> bool {
    !label.is_empty() && !label.contains(['\t', '\n', '\r'])
}

/// Canonical TSV: TAB-separated, sorted by head, relation, tail. Isolated
/// nodes are not representable and are omitted.
pub fn to_tsv(g: &Graph) -> Result<String> {
    let mut out = String::new();
    for t in g.triples() {
        for label in [t.head.as_str(), t.relation.as_str(), t.tail.as_str()] {
            if !tsv_safe(label) {
                return Err(Error::InvalidConfig(format!("label {label:?} cannot be written as TSV")));
            }
        }
        out.push_str(&format!("{}\t{}\t{}\n", t.head, t.relation, t.tail));
    }
    Ok(out)
}

fn iri_safe(label: &str) -> bool {
    !label.is_empty()
        && !label.chars().any(|c| {
            c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' | '/' | '#')
        })
}

fn literal(label: &str) -> String {
    let mut out = String::from("\"");
    for c in label.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_term(n: &NodeId) -> String {
    if iri_safe(n.as_str()) {
        format!("<{ENTITY_BASE}{n}>")
    } else {
        literal(n.as_str())
    }
}

/// N-Triples rendering that [`parse_ntriples`] maps back to the same graph.
/// Labels that are not IRI-safe become literals; relation labels must be
/// IRI-safe.
pub fn to_ntriples(g: &Graph) -> Result<String> {
    let mut out = String::new();
    for t in g.triples() {
        if !iri_safe(t.relation.as_str()) {
            return Err(Error::InvalidConfig(format!("relation {:?} cannot be written as an IRI", t.relation.as_str())));
        }
        out.push_str(&format!("{} <{RELATION_BASE}{}> {} .\n", node_term(&t.head), t.relation, node_term(&t.tail)));
    }
    Ok(out)
}

/// Lossless snapshot including isolated nodes.
pub fn to_snapshot(g: &Graph) -> String {
    let mut out = String::from(SNAPSHOT_HEADER);
    out.push('\n');
    for t in g.triples() {
        out.push_str(&records::join(["E", t.head.as_str(), t.relation.as_str(), t.tail.as_str()]));
        out.push('\n');
    }
    for n in g.nodes() {
        if g.neighbors(n.as_str()).is_ok_and(|s| s.is_empty()) && g.predecessors(n.as_str()).is_ok_and(|s| s.is_empty()) {
            out.push_str(&records::join(["N", n.as_str()]));
            out.push('\n');
        }
    }
    out
}

pub fn parse_snapshot(text: &str) -> Result<Graph> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(Error::parse(1, "missing graph snapshot header"));
    }
    let mut triples = Vec::new();
    let mut isolated = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields = records::split(line, line_no)?;
        match fields.as_slice() {
            [tag, h, r, t] if tag == "E" => triples.push(Triple::new(h.as_str(), r.as_str(), t.as_str())),
            [tag, n] if tag == "N" => isolated.push(NodeId::new(n)),
            _ => return Err(Error::parse(line_no, "malformed snapshot record")),
        }
    }
    let mut g = Graph::from_triples(triples);
    for n in &isolated {
        g.add_node(n);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(g: &Graph) -> Vec<String> {
        g.triples().map(|t| t.to_string()).collect()
    }

    #[test]
    fn single_triple() {
        let g = parse_ntriples("<http://x/A> <http://x/knows> <http://x/B> .").unwrap();
        assert_eq!(g.nodes().map(|n| n.as_str()).collect::<Vec<_>>(), ["A", "B"]);
        assert_eq!(edges(&g), ["(A, knows, B)"]);
    }

    #[test]
    fn empty_documents() {
        assert!(parse_ntriples("").unwrap().is_empty());
        assert!(parse_tsv("").unwrap().is_empty());
    }

    #[test]
    fn duplicate_lines_collapse() {
        let line = "<http://x/A> <http://x/knows> <http://x/B> .\n";
        let g = parse_ntriples(&line.repeat(2)).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn literals_comments_and_fragments() {
        let doc = "# header\n\n<http://x/film#Heat> <http://x/ont#directedBy> \"Michael \\\"M\\\" Mann\" . # trailing\n";
        let g = parse_ntriples(doc).unwrap();
        assert_eq!(edges(&g), ["(Heat, directedBy, Michael \"M\" Mann)"]);
    }

    #[test]
    fn blank_nodes_are_unsupported() {
        let err = parse_ntriples("<http://x/A> <http://x/p> <http://x/B> .\n_:b0 <http://x/p> <http://x/B> .").unwrap_err();
        assert!(matches!(err, Error::Unsupported { line: 2, .. }), "{err}");
    }

    #[test]
    fn typed_literals_are_unsupported() {
        let err = parse_ntriples("<http://x/A> <http://x/p> \"1\"^^<http://x/int> .").unwrap_err();
        assert!(matches!(err, Error::Unsupported { line: 1, .. }));
        let err = parse_ntriples("<http://x/A> <http://x/p> \"hi\"@en .").unwrap_err();
        assert!(matches!(err, Error::Unsupported { line: 1, .. }));
    }

    #[test]
    fn malformed_lines_report_line_number() {
        for (doc, line) in [
            ("<http://x/A> <http://x/p> <http://x/B>", 1),
            ("\n<http://x/A> \"p\" <http://x/B> .", 2),
            ("<http://x/A> <http://x/p> <http://x/B> . extra", 1),
            ("<http://x/A> <http://x/p", 1),
        ] {
            match parse_ntriples(doc) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{doc}"),
                other => panic!("{doc}: {other:?}"),
            }
        }
    }

    #[test]
    fn tsv_pipe_and_tab() {
        assert_eq!(edges(&parse_tsv("A|directedBy|B").unwrap()), ["(A, directedBy, B)"]);
        assert_eq!(edges(&parse_tsv("A\tdirectedBy\tB").unwrap()), ["(A, directedBy, B)"]);
    }

    #[test]
    fn tsv_arity_violation() {
        assert!(matches!(parse_tsv("A|b"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_tsv("A|r|B\nC|r|D|E"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn tsv_separator_is_fixed_per_file() {
        // first line selects TAB; a pipe line afterwards has one field
        assert!(matches!(parse_tsv("A\tr\tB\nC|r|D"), Err(Error::Parse { line: 2, .. })));
        // first line selects pipe; pipes inside TAB-separated lines are not re-detected
        let g = parse_tsv("Kismet|directed_by|William Dieterle\r\nKismet|release_year|1944\n").unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn canonical_tsv_is_sorted() {
        let g = parse_tsv("b|r|c\na|s|b\na|r|c\n").unwrap();
        assert_eq!(to_tsv(&g).unwrap(), "a\tr\tc\na\ts\tb\nb\tr\tc\n");
    }

    #[test]
    fn ntriples_writer_uses_literals_for_unsafe_labels() {
        let g = Graph::from_triples([Triple::new("Sergio Leone", "wrote", "A/B")]);
        let nt = to_ntriples(&g).unwrap();
        assert_eq!(parse_ntriples(&nt).unwrap(), g);
    }

    #[test]
    fn snapshot_keeps_isolated_nodes() {
        let mut g = Graph::from_triples([Triple::new("a", "r", "b\tc")]);
        g.add_node(&NodeId::new("lonely"));
        assert_eq!(parse_snapshot(&to_snapshot(&g)).unwrap(), g);
    }
}
