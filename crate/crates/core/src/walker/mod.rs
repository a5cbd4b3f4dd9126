//! Walk corpus generation.
//!
//! Two traversal strategies build the per-entity walk sets:
//!
//! - random walks: `num_walks` memoryless walks of at most `depth` steps,
//!   choosing uniformly among the outgoing `(relation, target)` pairs;
//!   identical walks are collapsed and counted,
//! - BFS walks: one root-to-node path in the breadth-first spanning tree for
//!   every node within `depth` hops.
//!
//! Generation is a pure function of `(graph, config)`; per-walk seeds derive
//! from the root label, so roots can be processed in any order or in
//! parallel and regenerated individually after graph updates.

mod bfs;
mod file;
mod incremental;
mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Fingerprint, Graph, NodeId, RelationId};
use crate::records;

pub use bfs::{bfs_layers, bfs_walks};
pub use file::{parse_corpus, write_corpus};
pub use incremental::{affected_roots, incremental_update};
pub use random::{random_walk, walk_seed};

/// Default number of random walks per entity.
pub const DEFAULT_NUM_WALKS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Traversal {
    #[serde(rename = "rw")]
    RandomWalk,
    #[serde(rename = "bfs")]
    Bfs,
}

impl fmt::Display for Traversal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Traversal::RandomWalk => "rw",
            Traversal::Bfs => "bfs",
        })
    }
}

impl FromStr for Traversal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rw" => Ok(Traversal::RandomWalk),
            "bfs" => Ok(Traversal::Bfs),
            other => Err(Error::InvalidConfig(format!("unknown traversal `{other}` (expected rw or bfs)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub traversal: Traversal,
    /// Walk length for random walks, maximum BFS distance otherwise.
    pub depth: usize,
    /// Walks per entity; random walks only.
    pub num_walks: usize,
    pub global_seed: u64,
}

impl WalkConfig {
    pub fn bfs(depth: usize) -> Self {
        Self { traversal: Traversal::Bfs, depth, num_walks: DEFAULT_NUM_WALKS, global_seed: 0 }
    }

    pub fn random(depth: usize, num_walks: usize, global_seed: u64) -> Self {
        Self { traversal: Traversal::RandomWalk, depth, num_walks, global_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if self.traversal == Traversal::RandomWalk && self.num_walks == 0 {
            return Err(Error::InvalidConfig("num_walks must be at least 1 for random walks".into()));
        }
        if u32::try_from(self.num_walks).is_err() {
            return Err(Error::InvalidConfig("num_walks is too large".into()));
        }
        Ok(())
    }
}

/// Canonical identity of a walk: escaped root and step labels joined by TAB.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WalkKey(pub String);

impl WalkKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for WalkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Alternating node/relation sequence starting at `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub root: NodeId,
    pub steps: Vec<(RelationId, NodeId)>,
    pub kind: Traversal,
    /// Generator seed; random walks only.
    pub seed: Option<u64>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn key(&self) -> WalkKey {
        let labels = std::iter::once(self.root.as_str())
            .chain(self.steps.iter().flat_map(|(r, n)| [r.as_str(), n.as_str()]));
        WalkKey(records::join(labels))
    }

    /// The walk's edges in traversal order.
    pub fn triples(&self) -> impl Iterator<Item = (&NodeId, &RelationId, &NodeId)> + '_ {
        let heads = std::iter::once(&self.root).chain(self.steps.iter().map(|(_, n)| n));
        heads.zip(self.steps.iter()).map(|(h, (r, t))| (h, r, t))
    }

    pub fn last_node(&self) -> &NodeId {
        self.steps.last().map_or(&self.root, |(_, n)| n)
    }
}

/// A distinct walk and how many times generation produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub walk: Walk,
    pub multiplicity: u32,
}

/// All walks for all entities of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub config: WalkConfig,
    pub fingerprint: Fingerprint,
    roots: BTreeMap<NodeId, Vec<CorpusEntry>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub roots: usize,
    pub distinct_walks: usize,
    /// Walks with at least one step; the ones that get verbalized.
    pub nonempty_walks: usize,
    /// Sum of multiplicities.
    pub generated_walks: u64,
    /// Fraction of generated walks that were duplicates.
    pub duplicate_ratio: f64,
    pub mean_distinct_per_root: f64,
}

impl Corpus {
    pub(crate) fn from_parts(config: WalkConfig, fingerprint: Fingerprint, roots: BTreeMap<NodeId, Vec<CorpusEntry>>) -> Self {
        Self { config, fingerprint, roots }
    }

    pub fn roots(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.roots.keys()
    }

    pub fn contains_root(&self, root: &str) -> bool {
        self.roots.contains_key(root)
    }

    pub fn walks_of(&self, root: &str) -> Option<&[CorpusEntry]> {
        self.roots.get(root).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&NodeId, &[CorpusEntry])> + '_ {
        self.roots.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn walks(&self) -> impl Iterator<Item = &CorpusEntry> + '_ {
        self.roots.values().flatten()
    }

    pub(crate) fn set_root(&mut self, root: NodeId, entries: Vec<CorpusEntry>) {
        self.roots.insert(root, entries);
    }

    pub(crate) fn remove_root(&mut self, root: &str) -> Option<Vec<CorpusEntry>> {
        self.roots.remove(root)
    }

    pub fn stats(&self) -> CorpusStats {
        let distinct = self.walks().count();
        let generated: u64 = self.walks().map(|e| u64::from(e.multiplicity)).sum();
        CorpusStats {
            roots: self.roots.len(),
            distinct_walks: distinct,
            nonempty_walks: self.walks().filter(|e| !e.walk.is_empty()).count(),
            generated_walks: generated,
            duplicate_ratio: if generated == 0 { 0.0 } else { 1.0 - distinct as f64 / generated as f64 },
            mean_distinct_per_root: if self.roots.is_empty() { 0.0 } else { distinct as f64 / self.roots.len() as f64 },
        }
    }
}

/// Walks for a single root under `cfg`.
pub fn root_walks(g: &Graph, root: &NodeId, cfg: &WalkConfig) -> Vec<CorpusEntry> {
    match cfg.traversal {
        Traversal::RandomWalk => random::root_entries(g, root, cfg),
        Traversal::Bfs => bfs::root_entries(g, root, cfg.depth),
    }
}

/// Builds the corpus for every node of `g`, in parallel across roots.
pub fn generate_corpus(g: &Graph, cfg: &WalkConfig) -> Result<Corpus> {
    cfg.validate()?;
    let nodes: Vec<&NodeId> = g.nodes().collect();
    let roots: BTreeMap<NodeId, Vec<CorpusEntry>> =
        nodes.par_iter().map(|&root| (root.clone(), root_walks(g, root, cfg))).collect::<Vec<_>>().into_iter().collect();
    Ok(Corpus { config: cfg.clone(), fingerprint: g.fingerprint(), roots })
}

/// Random-walk corpus. Errors if `cfg` is not a random-walk config.
pub fn generate_rw_corpus(g: &Graph, cfg: &WalkConfig) -> Result<Corpus> {
    if cfg.traversal != Traversal::RandomWalk {
        return Err(Error::InvalidConfig("expected a random-walk config".into()));
    }
    generate_corpus(g, cfg)
}

/// BFS spanning-tree corpus. Errors if `cfg` is not a BFS config.
pub fn generate_bfs_corpus(g: &Graph, cfg: &WalkConfig) -> Result<Corpus> {
    if cfg.traversal != Traversal::Bfs {
        return Err(Error::InvalidConfig("expected a BFS config".into()));
    }
    generate_corpus(g, cfg)
}
