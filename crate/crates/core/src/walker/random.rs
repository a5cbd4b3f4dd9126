use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusEntry, Traversal, Walk, WalkConfig};
use crate::error::Result;
use crate::graph::{Graph, NodeId, RelationId};
use crate::hash::{fnv1a64, splitmix64};

/// Seed of the `index`-th walk rooted at `root`. Depends only on the global
/// seed, the root label and the index.
pub fn walk_seed(global_seed: u64, root: &str, index: u64) -> u64 {
    let root_hash = splitmix64(fnv1a64(root.as_bytes()));
    splitmix64(splitmix64(global_seed ^ root_hash).wrapping_add(index))
}

/// One memoryless random walk of at most `depth` steps. Each step picks
/// uniformly among the current node's outgoing `(relation, target)` pairs;
/// the walk stops early at a node without outgoing edges.
pub fn random_walk(g: &Graph, root: &str, depth: usize, seed: u64) -> Result<Walk> {
    let root = g.node_id(root)?.clone();
    Ok(walk_from(g, root, depth, seed))
}

fn walk_from(g: &Graph, root: NodeId, depth: usize, seed: u64) -> Walk {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps: Vec<(RelationId, NodeId)> = Vec::with_capacity(depth);
    let mut current = root.clone();
    for _ in 0..depth {
        let neighbors = g.neighbors(current.as_str()).expect("walk stays inside the graph");
        if neighbors.is_empty() {
            break;
        }
        let (rel, next) = &neighbors[rng.random_range(0..neighbors.len())];
        steps.push((rel.clone(), next.clone()));
        current = next.clone();
    }
    Walk { root, steps, kind: Traversal::RandomWalk, seed: Some(seed) }
}

/// `cfg.num_walks` walks from `root`, duplicates folded into multiplicities
/// in order of first appearance.
pub(super) fn root_entries(g: &Graph, root: &NodeId, cfg: &WalkConfig) -> Vec<CorpusEntry> {
    let mut entries: Vec<CorpusEntry> = Vec::new();
    let mut position: HashMap<Vec<(RelationId, NodeId)>, usize> = HashMap::new();
    for i in 0..cfg.num_walks {
        let walk = walk_from(g, root.clone(), cfg.depth, walk_seed(cfg.global_seed, root.as_str(), i as u64));
        match position.get(&walk.steps) {
            Some(&p) => entries[p].multiplicity += 1,
            None => {
                position.insert(walk.steps.clone(), entries.len());
                entries.push(CorpusEntry { walk, multiplicity: 1 });
            }
        }
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Triple;
    use crate::walker::generate_rw_corpus;

    fn chain() -> Graph {
        Graph::from_triples([Triple::new("a", "r", "b"), Triple::new("b", "r", "c")])
    }

    #[test]
    fn stops_at_sink() {
        let w = random_walk(&chain(), "a", 5, 7).unwrap();
        assert_eq!(w.key().as_str(), "a\tr\tb\tr\tc");
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn sink_root_has_no_steps() {
        let w = random_walk(&chain(), "c", 3, 7).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn unknown_root() {
        assert!(random_walk(&chain(), "nope", 3, 7).is_err());
    }

    #[test]
    fn same_seed_same_walk() {
        let g = Graph::from_triples((0..10).flat_map(|i| {
            [Triple::new("hub", "to", format!("n{i}").as_str()), Triple::new(format!("n{i}").as_str(), "back", "hub")]
        }));
        for seed in 0..20 {
            assert_eq!(random_walk(&g, "hub", 6, seed).unwrap(), random_walk(&g, "hub", 6, seed).unwrap());
        }
        // memoryless: walks revisit the hub
        assert_eq!(random_walk(&g, "hub", 4, 1).unwrap().steps[1].1.as_str(), "hub");
    }

    #[test]
    fn single_path_collapses() {
        let g = Graph::from_triples([Triple::new("a", "r", "b")]);
        let c = generate_rw_corpus(&g, &WalkConfig::random(2, 10, 42)).unwrap();
        let a = c.walks_of("a").unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a[0].multiplicity, 10);
        // sink root keeps one zero-step walk carrying all multiplicity
        let b = c.walks_of("b").unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].walk.is_empty());
        assert_eq!(b[0].multiplicity, 10);
    }

    #[test]
    fn seeds_depend_on_root_and_index() {
        assert_ne!(walk_seed(1, "a", 0), walk_seed(1, "b", 0));
        assert_ne!(walk_seed(1, "a", 0), walk_seed(1, "a", 1));
        assert_ne!(walk_seed(1, "a", 0), walk_seed(2, "a", 0));
        assert_eq!(walk_seed(1, "a", 0), walk_seed(1, "a", 0));
    }
}
