use std::collections::BTreeSet;

use super::{root_walks, Corpus};
use crate::error::{Error, Result};
use crate::graph::{ChangeSet, Fingerprint, Graph, NodeId};

fn check_fresh(corpus: &Corpus, prior: &Fingerprint) -> Result<()> {
    if corpus.fingerprint != *prior {
        return Err(Error::StaleCorpus { expected: corpus.fingerprint.0.clone(), found: prior.0.clone() });
    }
    Ok(())
}

/// Roots whose walk set may differ after `changes` were applied.
///
/// `prior` is the fingerprint of the graph before the update and must match
/// the corpus. A walk can only change if it touches a changed edge, and any
/// path from a root to such an edge reaches a changed endpoint through edges
/// that survived the update, so reverse reachability within `depth` hops on
/// the post-update graph covers every affected root. Endpoints that no longer
/// exist are included so their entries get dropped.
pub fn affected_roots(
    graph_after: &Graph,
    corpus: &Corpus,
    prior: &Fingerprint,
    changes: &ChangeSet,
) -> Result<BTreeSet<NodeId>> {
    check_fresh(corpus, prior)?;
    let endpoints = changes.endpoints();
    let mut affected = graph_after.reverse_reachable(&endpoints, corpus.config.depth);
    affected.extend(endpoints.into_iter().filter(|n| !graph_after.contains_node(n.as_str())));
    Ok(affected)
}

/// Regenerates walks for the affected roots only and re-stamps the corpus
/// with the post-update fingerprint. Returns the recomputed roots.
pub fn incremental_update(
    graph_after: &Graph,
    corpus: &mut Corpus,
    prior: &Fingerprint,
    changes: &ChangeSet,
) -> Result<BTreeSet<NodeId>> {
    let affected = affected_roots(graph_after, corpus, prior, changes)?;
    for root in &affected {
        match graph_after.node_id(root.as_str()) {
            Ok(id) => {
                let entries = root_walks(graph_after, id, &corpus.config);
                corpus.set_root(id.clone(), entries);
            }
            Err(_) => {
                corpus.remove_root(root.as_str());
            }
        }
    }
    corpus.fingerprint = graph_after.fingerprint();
    Ok(affected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphUpdate, Triple};
    use crate::walker::{generate_corpus, WalkConfig};

    fn chain() -> Graph {
        Graph::from_triples([Triple::new("a", "r", "b"), Triple::new("b", "r", "c")])
    }

    #[test]
    fn change_at_tail_reaches_back() {
        let mut g = chain();
        let corpus = generate_corpus(&g, &WalkConfig::bfs(2)).unwrap();
        let prior = g.fingerprint();
        let changes = g.apply_update(&GraphUpdate::AddEdge(Triple::new("c", "r", "d"))).unwrap();
        let got: Vec<String> =
            affected_roots(&g, &corpus, &prior, &changes).unwrap().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(got, ["a", "b", "c", "d"]);
    }

    #[test]
    fn far_change_stays_local() {
        // x0 -> x1 -> ... -> x5, plus an unrelated component
        let mut g = Graph::from_triples(
            (0..5).map(|i| Triple::new(format!("x{i}").as_str(), "r", format!("x{}", i + 1).as_str())),
        );
        g.add_edge(&Triple::new("other", "r", "thing"));
        let cfg = WalkConfig::bfs(3);
        let corpus = generate_corpus(&g, &cfg).unwrap();
        let prior = g.fingerprint();
        let changes = g.apply_update(&GraphUpdate::AddEdge(Triple::new("x5", "s", "y"))).unwrap();
        let got: Vec<String> =
            affected_roots(&g, &corpus, &prior, &changes).unwrap().into_iter().map(|n| n.to_string()).collect();
        assert_eq!(got, ["x2", "x3", "x4", "x5", "y"]);

        // brute force: exactly the roots whose walk sets differ are inside the bound
        let rebuilt = generate_corpus(&g, &cfg).unwrap();
        for root in g.nodes() {
            let differs = corpus.walks_of(root.as_str()) != rebuilt.walks_of(root.as_str());
            if differs {
                assert!(got.contains(&root.to_string()), "{root} changed but was not flagged");
            }
        }
    }

    #[test]
    fn empty_change_set() {
        let g = chain();
        let corpus = generate_corpus(&g, &WalkConfig::bfs(2)).unwrap();
        let affected = affected_roots(&g, &corpus, &g.fingerprint(), &ChangeSet::default()).unwrap();
        assert!(affected.is_empty());
    }

    #[test]
    fn stale_fingerprint() {
        let g = chain();
        let mut corpus = generate_corpus(&g, &WalkConfig::bfs(2)).unwrap();
        let other = Fingerprint("deadbeef".into());
        assert!(matches!(
            incremental_update(&g, &mut corpus, &other, &ChangeSet::default()),
            Err(Error::StaleCorpus { .. })
        ));
    }

    #[test]
    fn removed_node_leaves_no_dangling_walks() {
        let mut g = chain();
        let cfg = WalkConfig::random(3, 8, 5);
        let mut corpus = generate_corpus(&g, &cfg).unwrap();
        let prior = g.fingerprint();
        let changes = g.apply_update(&GraphUpdate::RemoveNode(NodeId::new("b"))).unwrap();
        incremental_update(&g, &mut corpus, &prior, &changes).unwrap();
        assert!(!corpus.contains_root("b"));
        assert!(corpus.walks().all(|e| e.walk.steps.iter().all(|(_, n)| n.as_str() != "b")));
        assert_eq!(corpus, generate_corpus(&g, &cfg).unwrap());
    }

    #[test]
    fn noop_update_keeps_corpus() {
        let mut g = chain();
        let mut corpus = generate_corpus(&g, &WalkConfig::bfs(2)).unwrap();
        let before = corpus.clone();
        let prior = g.fingerprint();
        let changes = g.apply_update(&GraphUpdate::AddEdge(Triple::new("a", "r", "b"))).unwrap();
        let recomputed = incremental_update(&g, &mut corpus, &prior, &changes).unwrap();
        assert!(recomputed.is_empty());
        assert_eq!(corpus, before);
    }
}
