//! Directed, labeled multigraph with mirrored forward and reverse adjacency.

mod parse;
mod update;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use parse::{parse_ntriples, parse_snapshot, parse_tsv, to_ntriples, to_snapshot, to_tsv};
pub use update::{parse_updates, ChangeSet, GraphUpdate};

macro_rules! label_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(label: &str) -> Self {
                Self(Arc::from(label))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(label: &str) -> Self {
                Self::new(label)
            }
        }

        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.0)
            }
        }
    };
}

label_type!(
    /// Entity label. Identity is the exact, case-sensitive string.
    NodeId
);
label_type!(
    /// Relation type label.
    RelationId
);

/// A `(head, relation, tail)` edge. Ordered by head, relation, then tail.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub head: NodeId,
    pub relation: RelationId,
    pub tail: NodeId,
}

impl Triple {
    pub fn new(head: impl Into<NodeId>, relation: impl Into<RelationId>, tail: impl Into<NodeId>) -> Self {
        Self { head: head.into(), relation: relation.into(), tail: tail.into() }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// Content hash of a graph (hex SHA-256 over its canonical form).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub String);

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Adjacency {
    /// Outgoing `(relation, target)`, sorted and unique.
    out: Vec<(RelationId, NodeId)>,
    /// Incoming `(relation, source)`, sorted and unique.
    inc: Vec<(RelationId, NodeId)>,
}

/// Knowledge graph `G = (V, E, R)`.
///
/// Adjacency lists are kept sorted by relation label, then neighbor label, so
/// every traversal over them is deterministic. Exact duplicate triples are
/// stored once; parallel edges with distinct relations are kept.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    nodes: BTreeMap<NodeId, Adjacency>,
    /// Relation label to the number of edges carrying it.
    relations: BTreeMap<RelationId, usize>,
    edge_count: usize,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bulk construction. Duplicates collapse.
    pub fn from_triples<I>(triples: I) -> Self
    where
        I: IntoIterator<Item = Triple>,
    {
        let mut triples: Vec<Triple> = triples.into_iter().collect();
        triples.sort_unstable();
        triples.dedup();

        let mut interner: HashMap<Arc<str>, NodeId> = HashMap::new();
        let mut intern = |n: &NodeId| -> NodeId { interner.entry(n.0.clone()).or_insert_with(|| n.clone()).clone() };

        let mut g = Graph::new();
        for t in &triples {
            let head = intern(&t.head);
            let tail = intern(&t.tail);
            // sorted input keeps each head's `out` list sorted
            g.nodes.entry(head.clone()).or_default().out.push((t.relation.clone(), tail.clone()));
            g.nodes.entry(tail).or_default().inc.push((t.relation.clone(), head));
            *g.relations.entry(t.relation.clone()).or_insert(0) += 1;
        }
        for adj in g.nodes.values_mut() {
            adj.inc.sort_unstable();
        }
        g.edge_count = triples.len();
        g
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains_node(&self, label: &str) -> bool {
        self.nodes.contains_key(label)
    }

    pub fn contains_edge(&self, t: &Triple) -> bool {
        self.nodes
            .get(&t.head)
            .is_some_and(|adj| adj.out.binary_search(&(t.relation.clone(), t.tail.clone())).is_ok())
    }

    /// The stored (interned) identifier for a label.
    pub fn node_id(&self, label: &str) -> Result<&NodeId> {
        self.nodes.get_key_value(label).map(|(k, _)| k).ok_or_else(|| Error::node_not_found(label))
    }

    /// Nodes in ascending label order.
    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes.keys()
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationId> + '_ {
        self.relations.keys()
    }

    /// All edges, sorted by head, relation, tail.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.nodes.iter().flat_map(|(h, adj)| {
            adj.out.iter().map(move |(r, t)| Triple { head: h.clone(), relation: r.clone(), tail: t.clone() })
        })
    }

    /// Outgoing `(relation, target)` pairs of `v`, sorted by relation then
    /// target label. Parallel relations to the same target each appear.
    pub fn neighbors(&self, v: &str) -> Result<&[(RelationId, NodeId)]> {
        self.nodes.get(v).map(|adj| adj.out.as_slice()).ok_or_else(|| Error::node_not_found(v))
    }

    /// Incoming `(relation, source)` pairs of `v`.
    pub fn predecessors(&self, v: &str) -> Result<&[(RelationId, NodeId)]> {
        self.nodes.get(v).map(|adj| adj.inc.as_slice()).ok_or_else(|| Error::node_not_found(v))
    }

    pub fn out_degree(&self, v: &str) -> usize {
        self.nodes.get(v).map_or(0, |adj| adj.out.len())
    }

    /// Returns the interned id, inserting the node if absent.
    fn ensure_node(&mut self, label: &NodeId) -> NodeId {
        if let Some((k, _)) = self.nodes.get_key_value(label.as_str()) {
            return k.clone();
        }
        self.nodes.insert(label.clone(), Adjacency::default());
        label.clone()
    }

    fn ensure_relation(&self, r: &RelationId) -> RelationId {
        self.relations.get_key_value(r.as_str()).map_or_else(|| r.clone(), |(k, _)| k.clone())
    }

    /// Inserts a node. Returns `false` if it already existed.
    pub fn add_node(&mut self, label: &NodeId) -> bool {
        if self.nodes.contains_key(label.as_str()) {
            return false;
        }
        self.nodes.insert(label.clone(), Adjacency::default());
        true
    }

    /// Inserts an edge, creating missing endpoints. Returns `false` for an
    /// exact duplicate.
    pub fn add_edge(&mut self, t: &Triple) -> bool {
        if self.contains_edge(t) {
            return false;
        }
        let head = self.ensure_node(&t.head);
        let tail = self.ensure_node(&t.tail);
        let rel = self.ensure_relation(&t.relation);

        let out = &mut self.nodes.get_mut(head.as_str()).expect("head inserted").out;
        let entry = (rel.clone(), tail.clone());
        let pos = out.binary_search(&entry).unwrap_err();
        out.insert(pos, entry);

        let inc = &mut self.nodes.get_mut(tail.as_str()).expect("tail inserted").inc;
        let entry = (rel.clone(), head);
        let pos = inc.binary_search(&entry).unwrap_err();
        inc.insert(pos, entry);

        *self.relations.entry(rel).or_insert(0) += 1;
        self.edge_count += 1;
        true
    }

    pub fn remove_edge(&mut self, t: &Triple) -> Result<()> {
        let key = (t.relation.clone(), t.tail.clone());
        let out = self.nodes.get_mut(t.head.as_str()).map(|adj| &mut adj.out);
        let Some(pos) = out.as_ref().and_then(|out| out.binary_search(&key).ok()) else {
            return Err(Error::NotFound { kind: "edge", id: t.to_string() });
        };
        out.expect("checked above").remove(pos);

        let inc = &mut self.nodes.get_mut(t.tail.as_str()).expect("mirror invariant").inc;
        let pos = inc.binary_search(&(t.relation.clone(), t.head.clone())).expect("mirror invariant");
        inc.remove(pos);

        match self.relations.get_mut(t.relation.as_str()) {
            Some(1) => {
                self.relations.remove(t.relation.as_str());
            }
            Some(n) => *n -= 1,
            None => unreachable!("relation count missing for stored edge"),
        }
        self.edge_count -= 1;
        Ok(())
    }

    /// Removes a node and all incident edges; returns the removed edges.
    pub fn remove_node(&mut self, label: &str) -> Result<Vec<Triple>> {
        let adj = self.nodes.get(label).ok_or_else(|| Error::node_not_found(label))?;
        let node = self.node_id(label)?.clone();
        let mut incident: Vec<Triple> = adj
            .out
            .iter()
            .map(|(r, t)| Triple { head: node.clone(), relation: r.clone(), tail: t.clone() })
            .chain(adj.inc.iter().map(|(r, h)| Triple { head: h.clone(), relation: r.clone(), tail: node.clone() }))
            .collect();
        incident.sort_unstable();
        incident.dedup(); // self-loops appear in both lists
        for t in &incident {
            self.remove_edge(t)?;
        }
        self.nodes.remove(label);
        Ok(incident)
    }

    /// All nodes with a directed path of length `<= hops` into `targets`,
    /// including the targets themselves. Unknown targets are ignored.
    pub fn reverse_reachable<'a, I>(&self, targets: I, hops: usize) -> BTreeSet<NodeId>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut seen: BTreeSet<NodeId> = BTreeSet::new();
        let mut queue: VecDeque<(NodeId, usize)> = VecDeque::new();
        for t in targets {
            if let Some((k, _)) = self.nodes.get_key_value(t.as_str()) {
                if seen.insert(k.clone()) {
                    queue.push_back((k.clone(), 0));
                }
            }
        }
        while let Some((v, dist)) = queue.pop_front() {
            if dist == hops {
                continue;
            }
            for (_, pred) in &self.nodes[v.as_str()].inc {
                if seen.insert(pred.clone()) {
                    queue.push_back((pred.clone(), dist + 1));
                }
            }
        }
        seen
    }

    /// Copy where every edge `(h, r, t)` also gets a reverse edge
    /// `(t, r_inv, h)`.
    pub fn with_inverse_edges(&self) -> Graph {
        let mut g = self.clone();
        for t in self.triples() {
            g.add_edge(&inverse_edge(&t));
        }
        g
    }

    /// Rebuilds reverse adjacency from forward adjacency alone.
    pub fn rebuilt_reverse(&self) -> Graph {
        let mut g = self.clone();
        for adj in g.nodes.values_mut() {
            adj.inc.clear();
        }
        for t in self.triples() {
            g.nodes.get_mut(t.tail.as_str()).expect("endpoint exists").inc.push((t.relation, t.head));
        }
        for adj in g.nodes.values_mut() {
            adj.inc.sort_unstable();
        }
        g
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut h = Sha256::new();
        for (node, adj) in &self.nodes {
            h.update(b"N\t");
            h.update(crate::records::escape(node.as_str()).as_bytes());
            h.update(b"\n");
            for (r, t) in &adj.out {
                h.update(crate::records::join([node.as_str(), r.as_str(), t.as_str()]).as_bytes());
                h.update(b"\n");
            }
        }
        let digest = h.finalize();
        Fingerprint(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Reverse edge used for undirected augmentation.
pub fn inverse_edge(t: &Triple) -> Triple {
    Triple {
        head: t.tail.clone(),
        relation: RelationId::new(&format!("{}_inv", t.relation)),
        tail: t.head.clone(),
    }
}
