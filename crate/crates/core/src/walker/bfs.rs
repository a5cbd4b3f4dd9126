use std::collections::{BTreeSet, HashSet};

use super::{CorpusEntry, Traversal, Walk};
use crate::error::Result;
use crate::graph::{Graph, NodeId, RelationId};

struct TreeNode<'g> {
    node: &'g NodeId,
    parent: Option<(usize, &'g RelationId)>,
    distance: usize,
}

/// Breadth-first spanning tree in discovery order. A node's parent is the
/// first tree node, in queue order and then sorted neighbor order, that
/// reaches it.
fn spanning_tree<'g>(g: &'g Graph, root: &'g NodeId, max_depth: usize) -> Vec<TreeNode<'g>> {
    let mut tree = vec![TreeNode { node: root, parent: None, distance: 0 }];
    let mut seen: HashSet<&str> = HashSet::from([root.as_str()]);
    let mut head = 0;
    while head < tree.len() {
        let (node, distance) = (tree[head].node, tree[head].distance);
        if distance < max_depth {
            for (rel, next) in g.neighbors(node.as_str()).expect("tree nodes are graph nodes") {
                if seen.insert(next.as_str()) {
                    tree.push(TreeNode { node: next, parent: Some((head, rel)), distance: distance + 1 });
                }
            }
        }
        head += 1;
    }
    tree
}

/// Nodes grouped by shortest-path distance from `root`: `L_0 = {root}` and
/// each following layer holds the nodes first reached one hop further.
/// Trailing empty layers are omitted.
pub fn bfs_layers(g: &Graph, root: &str, max_depth: usize) -> Result<Vec<BTreeSet<NodeId>>> {
    let root = g.node_id(root)?;
    let mut layers: Vec<BTreeSet<NodeId>> = Vec::new();
    for t in spanning_tree(g, root, max_depth) {
        if layers.len() <= t.distance {
            layers.push(BTreeSet::new());
        }
        layers[t.distance].insert(t.node.clone());
    }
    Ok(layers)
}

/// One walk per node reached within `max_depth`: its root-to-node path in
/// the spanning tree. The root itself contributes no walk.
pub fn bfs_walks(g: &Graph, root: &str, max_depth: usize) -> Result<Vec<Walk>> {
    let root = g.node_id(root)?;
    let tree = spanning_tree(g, root, max_depth);
    let mut paths: Vec<Vec<(RelationId, NodeId)>> = Vec::with_capacity(tree.len());
    for t in &tree {
        let path = match t.parent {
            None => Vec::new(),
            Some((p, rel)) => {
                let mut path = Vec::with_capacity(t.distance);
                path.extend_from_slice(&paths[p]);
                path.push((rel.clone(), t.node.clone()));
                path
            }
        };
        paths.push(path);
    }
    Ok(paths
        .into_iter()
        .skip(1)
        .map(|steps| Walk { root: root.clone(), steps, kind: Traversal::Bfs, seed: None })
        .collect())
}

pub(super) fn root_entries(g: &Graph, root: &NodeId, depth: usize) -> Vec<CorpusEntry> {
    bfs_walks(g, root.as_str(), depth)
        .expect("root is a graph node")
        .into_iter()
        .map(|walk| CorpusEntry { walk, multiplicity: 1 })
        .collect()
}
