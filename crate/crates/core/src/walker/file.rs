//! Corpus file: a header record with the configuration and graph
//! fingerprint, then one record per distinct walk:
//!
//! ```text
//! root  kind  length  multiplicity  seed|-  relation_1  node_1  ...
//! ```
//!
//! A root without walks is written as a single record with length and
//! multiplicity 0.

use std::collections::BTreeMap;

use super::{Corpus, CorpusEntry, Traversal, Walk, WalkConfig};
use crate::error::{Error, Result};
use crate::graph::{Fingerprint, NodeId, RelationId};
use crate::records;

const MAGIC: &str = "#walkrag-corpus v1";

pub fn write_corpus(corpus: &Corpus) -> String {
    let cfg = &corpus.config;
    let mut out = format!(
        "{MAGIC}\ttraversal={}\tdepth={}\tnum_walks={}\tseed={}\tfingerprint={}\n",
        cfg.traversal, cfg.depth, cfg.num_walks, cfg.global_seed, corpus.fingerprint
    );
    for (root, entries) in corpus.entries() {
        if entries.is_empty() {
            out.push_str(&records::join([root.as_str(), &cfg.traversal.to_string(), "0", "0", "-"]));
            out.push('\n');
            continue;
        }
        for e in entries {
            let w = &e.walk;
            let head = [
                w.root.to_string(),
                w.kind.to_string(),
                w.len().to_string(),
                e.multiplicity.to_string(),
                w.seed.map_or_else(|| "-".to_owned(), |s| s.to_string()),
            ];
            let steps = w.steps.iter().flat_map(|(r, n)| [r.to_string(), n.to_string()]);
            out.push_str(&records::join(head.into_iter().chain(steps)));
            out.push('\n');
        }
    }
    out
}

fn header_value<'a>(field: Option<&'a str>, key: &str) -> Result<&'a str> {
    field
        .and_then(|f| f.strip_prefix(key))
        .and_then(|f| f.strip_prefix('='))
        .ok_or_else(|| Error::parse(1, format!("corpus header is missing `{key}`")))
}

fn number<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::parse(line, format!("invalid {what} `{s}`")))
}

pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty corpus file"))?;
    let mut fields = header.split('\t');
    if fields.next() != Some(MAGIC) {
        return Err(Error::parse(1, "not a corpus file"));
    }
    let traversal: Traversal = header_value(fields.next(), "traversal")?.parse()?;
    let config = WalkConfig {
        traversal,
        depth: number(header_value(fields.next(), "depth")?, 1, "depth")?,
        num_walks: number(header_value(fields.next(), "num_walks")?, 1, "num_walks")?,
        global_seed: number(header_value(fields.next(), "seed")?, 1, "seed")?,
    };
    let fingerprint = Fingerprint(header_value(fields.next(), "fingerprint")?.to_owned());

    let mut roots: BTreeMap<NodeId, Vec<CorpusEntry>> = BTreeMap::new();
    let mut last_root: Option<NodeId> = None;
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let f = records::split(line, line_no)?;
        if f.len() < 5 {
            return Err(Error::parse(line_no, "walk record needs at least 5 fields"));
        }
        let root = NodeId::new(&f[0]);
        let kind: Traversal = f[1].parse()?;
        if kind != traversal {
            return Err(Error::parse(line_no, "walk kind differs from corpus traversal"));
        }
        let length: usize = number(&f[2], line_no, "length")?;
        let multiplicity: u32 = number(&f[3], line_no, "multiplicity")?;
        let seed = match f[4].as_str() {
            "-" => None,
            s => Some(number(s, line_no, "seed")?),
        };
        if f.len() != 5 + 2 * length {
            return Err(Error::parse(line_no, "step count does not match length"));
        }
        if last_root.as_ref() != Some(&root) && roots.contains_key(&root) {
            return Err(Error::parse(line_no, format!("records for root `{root}` are not contiguous")));
        }
        last_root = Some(root.clone());
        let list = roots.entry(root.clone()).or_default();
        if multiplicity == 0 {
            if length != 0 || !list.is_empty() {
                return Err(Error::parse(line_no, "zero multiplicity is only valid for a root without walks"));
            }
            continue;
        }
        let steps = f[5..].chunks(2).map(|p| (RelationId::new(&p[0]), NodeId::new(&p[1]))).collect();
        list.push(CorpusEntry { walk: Walk { root, steps, kind, seed }, multiplicity });
    }
    Ok(Corpus::from_parts(config, fingerprint, roots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Triple};
    use crate::walker::generate_corpus;

    fn graph() -> Graph {
        let mut g = Graph::from_triples([
            Triple::new("a", "r", "b"),
            Triple::new("a", "s", "c\td"),
            Triple::new("b", "r", "a"),
        ]);
        g.add_node(&NodeId::new("lonely"));
        g
    }

    #[test]
    fn round_trip_both_kinds() {
        for cfg in [WalkConfig::bfs(2), WalkConfig::random(3, 12, 9)] {
            let c = generate_corpus(&graph(), &cfg).unwrap();
            let text = write_corpus(&c);
            let back = parse_corpus(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(write_corpus(&back), text);
        }
    }

    #[test]
    fn header_echoes_config() {
        let c = generate_corpus(&graph(), &WalkConfig::random(4, 60, 1)).unwrap();
        let text = write_corpus(&c);
        let header = text.lines().next().unwrap();
        assert!(header.contains("traversal=rw\tdepth=4\tnum_walks=60\tseed=1\tfingerprint="));
    }

    #[test]
    fn rejects_bad_records() {
        let c = generate_corpus(&graph(), &WalkConfig::bfs(1)).unwrap();
        let text = write_corpus(&c);
        let header = text.lines().next().unwrap();
        assert!(parse_corpus(&format!("{header}\na\tbfs\t2\t1\t-\tr\tb\n")).is_err());
        assert!(parse_corpus(&format!("{header}\na\trw\t1\t1\t-\tr\tb\n")).is_err());
        assert!(parse_corpus(&format!("{header}\na\tbfs\t1\t1\t-\tr\tb\nb\tbfs\t1\t1\t-\tr\ta\na\tbfs\t1\t1\t-\ts\tc\n")).is_err());
        assert!(parse_corpus("garbage").is_err());
    }
}
