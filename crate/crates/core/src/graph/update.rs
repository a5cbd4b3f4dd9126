use std::collections::BTreeSet;

use super::{inverse_edge, Graph, NodeId, Triple};
use crate::error::{Error, Result};
use crate::records;

/// A single graph mutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphUpdate {
    AddEdge(Triple),
    RemoveEdge(Triple),
    AddNode(NodeId),
    /// Removes the node together with all of its incident edges.
    RemoveNode(NodeId),
}

/// Nodes whose adjacency changed, plus the edges that were added or removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Triple>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn extend(&mut self, other: ChangeSet) {
        self.nodes.extend(other.nodes);
        self.edges.extend(other.edges);
    }

    /// Changed nodes plus both endpoints of every changed edge.
    pub fn endpoints(&self) -> BTreeSet<NodeId> {
        let mut out = self.nodes.clone();
        for e in &self.edges {
            out.insert(e.head.clone());
            out.insert(e.tail.clone());
        }
        out
    }

    fn edge(t: &Triple) -> Self {
        let mut c = ChangeSet::default();
        c.nodes.insert(t.head.clone());
        c.nodes.insert(t.tail.clone());
        c.edges.insert(t.clone());
        c
    }
}

impl GraphUpdate {
    /// The same update followed by its inverse-edge counterpart, for graphs
    /// built with undirected augmentation.
    pub fn with_inverse(self) -> Vec<GraphUpdate> {
        match &self {
            GraphUpdate::AddEdge(t) => {
                let inv = GraphUpdate::AddEdge(inverse_edge(t));
                vec![self, inv]
            }
            GraphUpdate::RemoveEdge(t) => {
                let inv = GraphUpdate::RemoveEdge(inverse_edge(t));
                vec![self, inv]
            }
            _ => vec![self],
        }
    }
}

impl Graph {
    /// Applies one update in place and reports what changed. Adding an
    /// existing element is a no-op with an empty change set; removing a
    /// missing one is an error and leaves the graph untouched.
    pub fn apply_update(&mut self, update: &GraphUpdate) -> Result<ChangeSet> {
        match update {
            GraphUpdate::AddEdge(t) => {
                if self.add_edge(t) {
                    Ok(ChangeSet::edge(t))
                } else {
                    Ok(ChangeSet::default())
                }
            }
            GraphUpdate::RemoveEdge(t) => {
                self.remove_edge(t)?;
                Ok(ChangeSet::edge(t))
            }
            GraphUpdate::AddNode(n) => {
                let mut c = ChangeSet::default();
                if self.add_node(n) {
                    c.nodes.insert(n.clone());
                }
                Ok(c)
            }
            GraphUpdate::RemoveNode(n) => {
                let removed = self.remove_node(n.as_str())?;
                let mut c = ChangeSet::default();
                c.nodes.insert(n.clone());
                for t in removed {
                    c.extend(ChangeSet::edge(&t));
                }
                Ok(c)
            }
        }
    }
}

/// Parses an update file: one TAB-separated record per line,
/// `add_edge|remove_edge <head> <relation> <tail>` or
/// `add_node|remove_node <label>`. Blank lines and `#` comments are skipped.
pub fn parse_updates(text: &str) -> Result<Vec<GraphUpdate>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = records::split(line, line_no)?;
        let update = match fields.as_slice() {
            [op, h, r, t] if op == "add_edge" => GraphUpdate::AddEdge(Triple::new(h.as_str(), r.as_str(), t.as_str())),
            [op, h, r, t] if op == "remove_edge" => {
                GraphUpdate::RemoveEdge(Triple::new(h.as_str(), r.as_str(), t.as_str()))
            }
            [op, n] if op == "add_node" => GraphUpdate::AddNode(NodeId::new(n)),
            [op, n] if op == "remove_node" => GraphUpdate::RemoveNode(NodeId::new(n)),
            _ => return Err(Error::parse(line_no, format!("unrecognized update record `{line}`"))),
        };
        out.push(update);
    }
    Ok(out)
}
