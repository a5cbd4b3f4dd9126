//! Walk verbalization.
//!
//! A walk becomes one sentence, either through the language model (one call
//! per distinct walk, using the fixed verbalization prompt) or through a
//! deterministic template. Results are cached by walk key so incremental
//! updates only verbalize walks that are new.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::{ChatRequest, LlmClient};
use crate::records;
use crate::template::fill;
use crate::walker::{Corpus, Walk, WalkKey};

pub const VERBALIZE_SYSTEM: &str = include_str!("../assets/prompts/verbalize_system.txt");
pub const VERBALIZE_HUMAN: &str = include_str!("../assets/prompts/verbalize_human.txt");

const CACHE_MAGIC: &str = "#walkrag-verbalizations v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Llm,
    Template,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Llm => "llm",
            Method::Template => "template",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerbalizedWalk {
    pub key: WalkKey,
    pub text: String,
    pub method: Method,
}

/// `writtenBy` -> `written by`, `directed_by` -> `directed by`,
/// `HTTPServer` -> `http server`.
pub fn relation_words(relation: &str) -> String {
    let chars: Vec<char> = relation.chars().collect();
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c.is_whitespace() {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                words.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    if words.is_empty() {
        relation.to_owned()
    } else {
        words.join(" ")
    }
}

/// Deterministic offline verbalization: `"<head> <relation words> <tail>"`
/// per edge, joined by `", and "`, ending with a period.
pub fn verbalize_template(walk: &Walk) -> Result<VerbalizedWalk> {
    if walk.is_empty() {
        return Err(Error::EmptyWalk);
    }
    let segments: Vec<String> =
        walk.triples().map(|(h, r, t)| format!("{h} {} {t}", relation_words(r.as_str()))).collect();
    Ok(VerbalizedWalk { key: walk.key(), text: format!("{}.", segments.join(", and ")), method: Method::Template })
}

/// The walk's edges as `(head, relation, tail)` tuples in walk order.
pub fn triples_list(walk: &Walk) -> String {
    walk.triples().map(|(h, r, t)| format!("({h}, {r}, {t})")).collect::<Vec<_>>().join(", ")
}

pub fn verbalization_prompt(walk: &Walk) -> Result<ChatRequest> {
    if walk.is_empty() {
        return Err(Error::EmptyWalk);
    }
    Ok(ChatRequest::new(VERBALIZE_SYSTEM, fill(VERBALIZE_HUMAN, &[("triples", &triples_list(walk))])))
}

/// Verbalizes through the model. Transient client failures and empty
/// responses fall back to the template; other client errors propagate.
pub fn verbalize_llm(walk: &Walk, client: &dyn LlmClient) -> Result<VerbalizedWalk> {
    let request = verbalization_prompt(walk)?;
    match client.send(&request) {
        Ok(text) if !text.trim().is_empty() => {
            Ok(VerbalizedWalk { key: walk.key(), text: text.trim().to_owned(), method: Method::Llm })
        }
        Ok(_) => {
            log::warn!("empty verbalization for walk {:?}; using template", walk.key().as_str());
            verbalize_template(walk)
        }
        Err(e) if e.is_retryable() => {
            log::warn!("verbalization failed ({e}) for walk {:?}; using template", walk.key().as_str());
            verbalize_template(walk)
        }
        Err(e) => Err(e.into()),
    }
}

/// Walk-key to verbalization map. Safe for concurrent inserts of distinct
/// keys; inserting a different value under an existing key is rejected.
#[derive(Debug, Default)]
pub struct VerbalizationCache {
    entries: RwLock<BTreeMap<WalkKey, VerbalizedWalk>>,
}

impl Clone for VerbalizationCache {
    fn clone(&self) -> Self {
        Self { entries: RwLock::new(self.entries.read().expect("cache lock").clone()) }
    }
}

impl PartialEq for VerbalizationCache {
    fn eq(&self, other: &Self) -> bool {
        *self.entries.read().expect("cache lock") == *other.entries.read().expect("cache lock")
    }
}

impl VerbalizationCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, key: &WalkKey) -> bool {
        self.entries.read().expect("cache lock").contains_key(key)
    }

    pub fn get(&self, key: &WalkKey) -> Option<VerbalizedWalk> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    /// Returns `true` if the key was new.
    pub fn insert(&self, v: VerbalizedWalk) -> Result<bool> {
        let mut map = self.entries.write().expect("cache lock");
        match map.get(&v.key) {
            Some(existing) if *existing == v => Ok(false),
            Some(_) => Err(Error::CacheConflict(v.key.0)),
            None => {
                map.insert(v.key.clone(), v);
                Ok(true)
            }
        }
    }

    /// Drops every entry whose key is not in `keep`; returns how many went.
    pub fn retain_keys(&self, keep: &BTreeSet<WalkKey>) -> usize {
        let mut map = self.entries.write().expect("cache lock");
        let before = map.len();
        map.retain(|k, _| keep.contains(k));
        before - map.len()
    }

    /// Entries in key order.
    pub fn to_vec(&self) -> Vec<VerbalizedWalk> {
        self.entries.read().expect("cache lock").values().cloned().collect()
    }

    pub fn write(&self) -> String {
        let mut out = format!("{CACHE_MAGIC}\n");
        for v in self.entries.read().expect("cache lock").values() {
            out.push_str(&records::join([v.key.as_str(), &v.method.to_string(), &v.text]));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(CACHE_MAGIC) {
            return Err(Error::parse(1, "not a verbalization cache file"));
        }
        let cache = VerbalizationCache::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let f = records::split(line, line_no)?;
            let [key, method, text] = <[String; 3]>::try_from(f).map_err(|_| Error::parse(line_no, "expected 3 fields"))?;
            let method = match method.as_str() {
                "llm" => Method::Llm,
                "template" => Method::Template,
                other => return Err(Error::parse(line_no, format!("unknown method `{other}`"))),
            };
            if text.is_empty() {
                return Err(Error::parse(line_no, "empty verbalization"));
            }
            cache.insert(VerbalizedWalk { key: WalkKey(key), text, method }).map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(cache)
    }
}

/// Keys of all walks with at least one step.
pub fn verbalizable_keys(corpus: &Corpus) -> BTreeSet<WalkKey> {
    corpus.walks().filter(|e| !e.walk.is_empty()).map(|e| e.walk.key()).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VerbalizeStats {
    /// Newly verbalized walks.
    pub verbalized: usize,
    /// Walks already present in the cache.
    pub cached: usize,
    pub via_llm: usize,
    pub via_template: usize,
}

/// Verbalizes every distinct walk with at least one step that is not yet in
/// `cache`. Multiplicity is ignored. With a client, up to `parallelism`
/// requests run at once.
pub fn verbalize_corpus(
    corpus: &Corpus,
    client: Option<&dyn LlmClient>,
    cache: &VerbalizationCache,
    parallelism: usize,
) -> Result<VerbalizeStats> {
    let mut stats = VerbalizeStats::default();
    let mut pending: Vec<&Walk> = Vec::new();
    for entry in corpus.walks().filter(|e| !e.walk.is_empty()) {
        if cache.contains(&entry.walk.key()) {
            stats.cached += 1;
        } else {
            pending.push(&entry.walk);
        }
    }

    let completed = AtomicUsize::new(0);
    let llm = AtomicUsize::new(0);
    let work = |walk: &&Walk| -> Result<()> {
        let v = match client {
            Some(c) => verbalize_llm(walk, c),
            None => verbalize_template(walk),
        };
        let v = v.map_err(|e| match e {
            Error::Llm(source) => Error::Verbalization { completed: completed.load(Ordering::SeqCst), source },
            other => other,
        })?;
        if v.method == Method::Llm {
            llm.fetch_add(1, Ordering::Relaxed);
        }
        cache.insert(v)?;
        completed.fetch_add(1, Ordering::SeqCst);
        Ok(())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| pending.par_iter().try_for_each(work))?;

    stats.verbalized = completed.into_inner();
    stats.via_llm = llm.into_inner();
    stats.via_template = stats.verbalized - stats.via_llm;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, Triple};
    use crate::llm::{CountingClient, FnClient, LlmError};
    use crate::walker::{generate_corpus, Traversal, WalkConfig};

    fn walk(labels: &[&str]) -> Walk {
        Walk {
            root: labels[0].into(),
            steps: labels[1..].chunks(2).map(|p| (p[0].into(), p[1].into())).collect(),
            kind: Traversal::Bfs,
            seed: None,
        }
    }

    #[test]
    fn relation_word_splitting() {
        assert_eq!(relation_words("writtenBy"), "written by");
        assert_eq!(relation_words("directed_by"), "directed by");
        assert_eq!(relation_words("has_imdbRating"), "has imdb rating");
        assert_eq!(relation_words("HTTPServer"), "http server");
        assert_eq!(relation_words("r1"), "r1");
        assert_eq!(relation_words("__"), "__");
    }

    #[test]
    fn template_single_edge() {
        let v = verbalize_template(&walk(&["A Fistful of Dollars", "writtenBy", "Sergio Leone"])).unwrap();
        assert_eq!(v.text, "A Fistful of Dollars written by Sergio Leone.");
        assert_eq!(v.method, Method::Template);
    }

    #[test]
    fn template_two_edges() {
        let v = verbalize_template(&walk(&["a", "r1", "b", "hasPart", "c"])).unwrap();
        assert_eq!(v.text, "a r1 b, and b has part c.");
    }

    #[test]
    fn template_rejects_empty_walk() {
        assert!(matches!(verbalize_template(&walk(&["a"])), Err(Error::EmptyWalk)));
    }

    #[test]
    fn prompt_has_one_tuple_per_edge() {
        let req = verbalization_prompt(&walk(&["a", "r", "b"])).unwrap();
        assert_eq!(req.system, VERBALIZE_SYSTEM);
        assert!(req.human.ends_with("Knowledge Graph: (a, r, b)."));
        assert_eq!(req.human.matches('(').count(), 1);
        let req = verbalization_prompt(&walk(&["a", "r", "b", "s", "c"])).unwrap();
        assert!(req.human.ends_with(": (a, r, b), (b, s, c)."));
    }

    #[test]
    fn llm_response_is_trimmed() {
        let client = FnClient::new("m", |_: &ChatRequest| Ok("  X wrote Y.  \n".to_owned()));
        let v = verbalize_llm(&walk(&["Y", "writtenBy", "X"]), &client).unwrap();
        assert_eq!(v.text, "X wrote Y.");
        assert_eq!(v.method, Method::Llm);
    }

    #[test]
    fn timeout_and_empty_fall_back_to_template() {
        let w = walk(&["Y", "writtenBy", "X"]);
        let timeout = FnClient::new("m", |_: &ChatRequest| Err(LlmError::Timeout));
        let v = verbalize_llm(&w, &timeout).unwrap();
        assert_eq!((v.method, v.text.as_str()), (Method::Template, "Y written by X."));
        let empty = FnClient::new("m", |_: &ChatRequest| Ok("   ".to_owned()));
        assert_eq!(verbalize_llm(&w, &empty).unwrap().method, Method::Template);
    }

    #[test]
    fn fatal_client_error_propagates() {
        let bad = FnClient::new("m", |_: &ChatRequest| Err(LlmError::Status { status: 401, body: "no".into() }));
        assert!(matches!(verbalize_llm(&walk(&["a", "r", "b"]), &bad), Err(Error::Llm(_))));
    }

    #[test]
    fn duplicated_walk_is_verbalized_once() {
        let g = Graph::from_triples([Triple::new("a", "r", "b")]);
        let corpus = generate_corpus(&g, &WalkConfig::random(1, 60, 0)).unwrap();
        assert_eq!(corpus.walks_of("a").unwrap()[0].multiplicity, 60);
        let client = CountingClient::new(FnClient::new("m", |_: &ChatRequest| Ok("a r b".to_owned())));
        let cache = VerbalizationCache::new();
        let stats = verbalize_corpus(&corpus, Some(&client), &cache, 4).unwrap();
        assert_eq!(client.calls(), 1);
        assert_eq!(stats.verbalized, 1);
        // second pass is served from the cache
        let stats = verbalize_corpus(&corpus, Some(&client), &cache, 4).unwrap();
        assert_eq!(client.calls(), 1);
        assert_eq!(stats.cached, 1);
    }

    #[test]
    fn no_client_means_template() {
        let g = Graph::from_triples([Triple::new("a", "r", "b"), Triple::new("b", "s", "c")]);
        let corpus = generate_corpus(&g, &WalkConfig::bfs(2)).unwrap();
        let cache = VerbalizationCache::new();
        let stats = verbalize_corpus(&corpus, None, &cache, 1).unwrap();
        assert_eq!(stats.verbalized, corpus.stats().nonempty_walks);
        assert!(cache.to_vec().iter().all(|v| v.method == Method::Template));
    }

    #[test]
    fn fatal_error_reports_progress() {
        let g = Graph::from_triples([Triple::new("a", "r", "b")]);
        let corpus = generate_corpus(&g, &WalkConfig::bfs(1)).unwrap();
        let bad = FnClient::new("m", |_: &ChatRequest| Err(LlmError::Config("no key".into())));
        let err = verbalize_corpus(&corpus, Some(&bad), &VerbalizationCache::new(), 1).unwrap_err();
        assert!(matches!(err, Error::Verbalization { completed: 0, .. }));
    }

    #[test]
    fn cache_rejects_conflicts() {
        let cache = VerbalizationCache::new();
        let v = verbalize_template(&walk(&["a", "r", "b"])).unwrap();
        assert!(cache.insert(v.clone()).unwrap());
        assert!(!cache.insert(v.clone()).unwrap());
        let other = VerbalizedWalk { text: "different".into(), ..v };
        assert!(matches!(cache.insert(other), Err(Error::CacheConflict(_))));
    }

    #[test]
    fn cache_file_round_trip() {
        let cache = VerbalizationCache::new();
        cache.insert(verbalize_template(&walk(&["a\tb", "r", "c"])).unwrap()).unwrap();
        cache
            .insert(VerbalizedWalk { key: walk(&["x", "r", "y"]).key(), text: "multi\nline".into(), method: Method::Llm })
            .unwrap();
        let text = cache.write();
        let back = VerbalizationCache::parse(&text).unwrap();
        assert_eq!(back, cache);
        assert_eq!(back.write(), text);
    }
}
