//! Two-stage retrieval: the `k` nodes closest to the question, then for each
//! of them the `k` closest walks among the walks that node owns.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::embed::{Embedder, EmbeddingIndex};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::verbalizer::VerbalizationCache;
use crate::walker::WalkKey;

/// Number of nodes, and of walks per node, retrieved by default.
pub const DEFAULT_K: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievedNode {
    pub id: NodeId,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievedWalk {
    pub key: WalkKey,
    pub owner: NodeId,
    pub similarity: f64,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RetrievalResult {
    pub query_text: String,
    /// Selected nodes, most similar first.
    pub nodes: Vec<RetrievedNode>,
    /// Context walks without duplicates, by similarity descending then key.
    pub walks: Vec<RetrievedWalk>,
    pub k: usize,
}

impl RetrievalResult {
    pub fn context_texts(&self) -> Vec<&str> {
        self.walks.iter().map(|w| w.text.as_str()).collect()
    }
}

pub fn retrieve(
    query: &str,
    index: &EmbeddingIndex,
    verbalizations: &VerbalizationCache,
    embedder: &dyn Embedder,
    k: usize,
) -> Result<RetrievalResult> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let q = embedder.embed(query)?;
    let nodes = index.knn_nodes(&q, k)?;

    let mut best: BTreeMap<WalkKey, (NodeId, f64)> = BTreeMap::new();
    for (node, _) in &nodes {
        for (key, sim) in index.knn_walks_of(node.as_str(), &q, k)? {
            match best.get(&key) {
                Some((_, s)) if *s >= sim => {}
                _ => {
                    best.insert(key, (node.clone(), sim));
                }
            }
        }
    }
    let mut walks = Vec::with_capacity(best.len());
    for (key, (owner, similarity)) in best {
        let text = verbalizations
            .get(&key)
            .ok_or_else(|| Error::NotFound { kind: "verbalization", id: key.0.clone() })?
            .text;
        walks.push(RetrievedWalk { key, owner, similarity, text });
    }
    walks.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.key.cmp(&b.key)));

    Ok(RetrievalResult {
        query_text: query.to_owned(),
        nodes: nodes.into_iter().map(|(id, similarity)| RetrievedNode { id, similarity }).collect(),
        walks,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::HashedBowEmbedder;
    use crate::verbalizer::{Method, VerbalizedWalk};

    fn setup(walks: &[(&str, &str)]) -> (EmbeddingIndex, VerbalizationCache, HashedBowEmbedder) {
        let e = HashedBowEmbedder::default();
        let mut idx = EmbeddingIndex::new(256, "hashed-bow-256");
        let cache = VerbalizationCache::new();
        for (owner, text) in walks {
            if idx.node_vector(owner).is_none() {
                idx.upsert_node(NodeId::new(owner), e.vector(owner)).unwrap();
            }
            let key = WalkKey(format!("{owner}\t{text}"));
            cache.insert(VerbalizedWalk { key: key.clone(), text: (*text).into(), method: Method::Template }).unwrap();
            idx.upsert_walk(key, NodeId::new(owner), e.vector(text)).unwrap();
        }
        (idx, cache, e)
    }

    #[test]
    fn fewer_than_k_available() {
        let (idx, cache, e) = setup(&[("heat", "heat directed by michael mann")]);
        let r = retrieve("who directed heat", &idx, &cache, &e, DEFAULT_K).unwrap();
        assert_eq!((r.nodes.len(), r.walks.len()), (1, 1));
        assert_eq!(r.walks[0].text, "heat directed by michael mann");
    }

    #[test]
    fn empty_index() {
        let (idx, cache, e) = setup(&[]);
        assert!(matches!(retrieve("q", &idx, &cache, &e, 3), Err(Error::EmptyIndex)));
    }

    #[test]
    fn walks_ordered_and_bounded() {
        let (idx, cache, e) = setup(&[
            ("a", "a x"),
            ("a", "a y"),
            ("a", "a z"),
            ("a", "a x y"),
            ("b", "b x"),
            ("c", "c q"),
        ]);
        let r = retrieve("x", &idx, &cache, &e, 2).unwrap();
        assert_eq!(r.nodes.len(), 2);
        for n in &r.nodes {
            assert!(r.walks.iter().filter(|w| w.owner == n.id).count() <= 2);
        }
        for pair in r.walks.windows(2) {
            assert!(pair[0].similarity > pair[1].similarity || (pair[0].similarity == pair[1].similarity && pair[0].key < pair[1].key));
        }
    }
}
