//! In-memory orchestration: graph to corpus to verbalizations to index, and
//! incremental maintenance of all three after graph updates.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::embed::{node_representation, Embedder, EmbeddingIndex};
use crate::error::{Error, Result};
use crate::graph::{ChangeSet, Graph, GraphUpdate, NodeId};
use crate::llm::LlmClient;
use crate::qa::{self, Answer};
use crate::verbalizer::{verbalizable_keys, verbalize_corpus, VerbalizationCache, VerbalizeStats};
use crate::walker::{generate_corpus, incremental_update, Corpus, CorpusStats, WalkConfig, WalkKey};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub walk: WalkConfig,
    /// Add a `<relation>_inv` edge for every edge before traversal.
    pub undirected: bool,
    /// Concurrent language-model requests during verbalization.
    pub parallelism: usize,
}

impl BuildOptions {
    pub fn new(walk: WalkConfig) -> Self {
        Self { walk, undirected: false, parallelism: 4 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KnowledgeBase {
    /// The traversed graph; includes inverse edges when built undirected.
    pub graph: Graph,
    pub corpus: Corpus,
    pub verbalizations: VerbalizationCache,
    pub index: EmbeddingIndex,
    pub undirected: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    pub nodes: usize,
    pub edges: usize,
    pub corpus: CorpusStats,
    pub verbalization: VerbalizeStats,
    pub indexed_nodes: usize,
    pub indexed_walks: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UpdateReport {
    pub updates: usize,
    pub changed_nodes: usize,
    pub changed_edges: usize,
    pub recomputed_roots: usize,
    pub new_verbalizations: usize,
    pub dropped_verbalizations: usize,
    pub reindexed_nodes: usize,
}

/// Node vector and walk vectors for one root.
type RootVectors = (NodeId, Vec<f32>, Vec<(WalkKey, Vec<f32>)>);

fn root_vectors(root: &NodeId, corpus: &Corpus, cache: &VerbalizationCache, embedder: &dyn Embedder) -> Result<RootVectors> {
    let mut verbalized = Vec::new();
    for entry in corpus.walks_of(root.as_str()).unwrap_or_default() {
        if entry.walk.is_empty() {
            continue;
        }
        let key = entry.walk.key();
        let v = cache.get(&key).ok_or_else(|| Error::NotFound { kind: "verbalization", id: key.0.clone() })?;
        verbalized.push(v);
    }
    let node = node_representation(&verbalized, embedder)?;
    let mut walks = Vec::with_capacity(verbalized.len());
    for v in verbalized {
        let vector = embedder.embed(&v.text)?;
        walks.push((v.key, vector));
    }
    Ok((root.clone(), node, walks))
}

/// (Re)indexes the given roots; roots missing from the corpus are removed.
fn reindex<'a>(
    index: &mut EmbeddingIndex,
    roots: impl IntoParallelIterator<Item = &'a NodeId>,
    corpus: &Corpus,
    cache: &VerbalizationCache,
    embedder: &dyn Embedder,
) -> Result<usize> {
    let (present, gone): (Vec<&NodeId>, Vec<&NodeId>) =
        roots.into_par_iter().partition(|r| corpus.contains_root(r.as_str()));
    for r in gone {
        if index.node_vector(r.as_str()).is_some() {
            index.remove_node(r.as_str())?;
        }
    }
    let computed: Vec<RootVectors> =
        present.par_iter().map(|r| root_vectors(r, corpus, cache, embedder)).collect::<Result<_>>()?;
    let n = computed.len();
    for (root, node, walks) in computed {
        if index.node_vector(root.as_str()).is_some() {
            index.remove_node(root.as_str())?;
        }
        index.upsert_node(root.clone(), node)?;
        for (key, v) in walks {
            index.upsert_walk(key, root.clone(), v)?;
        }
    }
    Ok(n)
}

impl KnowledgeBase {
    pub fn build(
        graph: Graph,
        opts: &BuildOptions,
        llm: Option<&dyn LlmClient>,
        embedder: &dyn Embedder,
    ) -> Result<(Self, BuildReport)> {
        let graph = if opts.undirected { graph.with_inverse_edges() } else { graph };
        let corpus = generate_corpus(&graph, &opts.walk)?;
        let verbalizations = VerbalizationCache::new();
        let vstats = verbalize_corpus(&corpus, llm, &verbalizations, opts.parallelism)?;
        let mut index = EmbeddingIndex::new(embedder.dimension(), embedder.id());
        let roots: Vec<&NodeId> = corpus.roots().collect();
        reindex(&mut index, roots, &corpus, &verbalizations, embedder)?;
        let report = BuildReport {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            corpus: corpus.stats(),
            verbalization: vstats,
            indexed_nodes: index.node_count(),
            indexed_walks: index.walk_count(),
        };
        Ok((Self { graph, corpus, verbalizations, index, undirected: opts.undirected }, report))
    }

    /// Applies `updates` and recomputes only what they can affect. Either
    /// everything is updated or, on error, nothing is.
    pub fn apply_updates(
        &mut self,
        updates: &[GraphUpdate],
        llm: Option<&dyn LlmClient>,
        embedder: &dyn Embedder,
        parallelism: usize,
    ) -> Result<UpdateReport> {
        let prior = self.graph.fingerprint();
        if self.corpus.fingerprint != prior {
            return Err(Error::StaleCorpus { expected: self.corpus.fingerprint.0.clone(), found: prior.0 });
        }
        if embedder.id() != self.index.embedder_id() || embedder.dimension() != self.index.dimension() {
            return Err(Error::InvalidConfig(format!(
                "index was built with embedder `{}`, not `{}`",
                self.index.embedder_id(),
                embedder.id()
            )));
        }
        let mut graph = self.graph.clone();
        let mut changes = ChangeSet::default();
        for u in updates {
            let expanded = if self.undirected { u.clone().with_inverse() } else { vec![u.clone()] };
            for u in &expanded {
                changes.extend(graph.apply_update(u)?);
            }
        }

        let mut corpus = self.corpus.clone();
        let recomputed = incremental_update(&graph, &mut corpus, &prior, &changes)?;
        let verbalizations = self.verbalizations.clone();
        let vstats = verbalize_corpus(&corpus, llm, &verbalizations, parallelism)?;
        let keep: BTreeSet<WalkKey> = verbalizable_keys(&corpus);
        let dropped = verbalizations.retain_keys(&keep);
        let mut index = self.index.clone();
        let roots: Vec<&NodeId> = recomputed.iter().collect();
        let reindexed = reindex(&mut index, roots, &corpus, &verbalizations, embedder)?;

        let report = UpdateReport {
            updates: updates.len(),
            changed_nodes: changes.nodes.len(),
            changed_edges: changes.edges.len(),
            recomputed_roots: recomputed.len(),
            new_verbalizations: vstats.verbalized,
            dropped_verbalizations: dropped,
            reindexed_nodes: reindexed,
        };
        *self = Self { graph, corpus, verbalizations, index, undirected: self.undirected };
        Ok(report)
    }

    pub fn answer(&self, question: &str, embedder: &dyn Embedder, client: &dyn LlmClient, k: usize) -> Result<Answer> {
        qa::answer(question, &self.index, &self.verbalizations, embedder, client, k)
    }
}
