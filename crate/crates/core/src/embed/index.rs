use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::cosine;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::walker::WalkKey;

const MAGIC: &[u8; 8] = b"WRAGIDX1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Node,
    Walk,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Node => "node",
            Kind::Walk => "walk",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkVector {
    pub vector: Vec<f32>,
    pub owner: NodeId,
}

/// Exact cosine kNN over node vectors and walk vectors. Every walk vector
/// belongs to a node present in the index.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingIndex {
    dimension: usize,
    embedder_id: String,
    nodes: BTreeMap<NodeId, Vec<f32>>,
    walks: BTreeMap<WalkKey, WalkVector>,
    owned: BTreeMap<NodeId, BTreeSet<WalkKey>>,
}

/// Top `k` by similarity descending, ties by ascending id.
fn top_k<'a, I: Ord + Clone + 'a>(
    items: impl Iterator<Item = (&'a I, &'a [f32])>,
    query: &[f32],
    k: usize,
) -> Result<Vec<(I, f64)>> {
    let mut scored = Vec::new();
    for (id, v) in items {
        scored.push((id, cosine(query, v)?));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(id, s)| (id.clone(), s)).collect())
}

impl EmbeddingIndex {
    pub fn new(dimension: usize, embedder_id: impl Into<String>) -> Self {
        Self {
            dimension,
            embedder_id: embedder_id.into(),
            nodes: BTreeMap::new(),
            walks: BTreeMap::new(),
            owned: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn walk_count(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_vector(&self, id: &str) -> Option<&[f32]> {
        self.nodes.get(id).map(Vec::as_slice)
    }

    pub fn walk_vector(&self, key: &WalkKey) -> Option<&WalkVector> {
        self.walks.get(key)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &[f32])> + '_ {
        self.nodes.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn walks(&self) -> impl Iterator<Item = (&WalkKey, &WalkVector)> + '_ {
        self.walks.iter()
    }

    /// Keys of the walks owned by `owner`, in key order.
    pub fn walks_of(&self, owner: &str) -> impl Iterator<Item = &WalkKey> + '_ {
        self.owned.get(owner).into_iter().flatten()
    }

    fn check_dim(&self, v: &[f32]) -> Result<()> {
        if v.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: v.len() });
        }
        Ok(())
    }

    pub fn upsert_node(&mut self, id: NodeId, vector: Vec<f32>) -> Result<()> {
        self.check_dim(&vector)?;
        self.nodes.insert(id, vector);
        Ok(())
    }

    /// Inserts or replaces a walk vector. The owner must already be indexed.
    pub fn upsert_walk(&mut self, key: WalkKey, owner: NodeId, vector: Vec<f32>) -> Result<()> {
        self.check_dim(&vector)?;
        if !self.nodes.contains_key(&owner) {
            return Err(Error::node_not_found(owner.as_str()));
        }
        if let Some(old) = self.walks.get(&key) {
            if old.owner != owner {
                let old_owner = old.owner.clone();
                self.disown(&old_owner, &key);
            }
        }
        self.owned.entry(owner.clone()).or_default().insert(key.clone());
        self.walks.insert(key, WalkVector { vector, owner });
        Ok(())
    }

    fn disown(&mut self, owner: &NodeId, key: &WalkKey) {
        if let Some(set) = self.owned.get_mut(owner) {
            set.remove(key);
            if set.is_empty() {
                self.owned.remove(owner);
            }
        }
    }

    pub fn remove_walk(&mut self, key: &WalkKey) -> Result<()> {
        let wv = self.walks.remove(key).ok_or_else(|| Error::NotFound { kind: "walk", id: key.0.clone() })?;
        self.disown(&wv.owner, key);
        Ok(())
    }

    /// Removes a node and every walk it owns; returns the removed walk keys.
    pub fn remove_node(&mut self, id: &str) -> Result<Vec<WalkKey>> {
        if self.nodes.remove(id).is_none() {
            return Err(Error::node_not_found(id));
        }
        let keys: Vec<WalkKey> = self.owned.remove(id).map(|s| s.into_iter().collect()).unwrap_or_default();
        for k in &keys {
            self.walks.remove(k);
        }
        Ok(keys)
    }

    pub fn knn_nodes(&self, query: &[f32], k: usize) -> Result<Vec<(NodeId, f64)>> {
        self.check_query(query, k)?;
        top_k(self.nodes.iter().map(|(id, v)| (id, v.as_slice())), query, k)
    }

    pub fn knn_walks(&self, query: &[f32], k: usize) -> Result<Vec<(WalkKey, f64)>> {
        self.check_query(query, k)?;
        top_k(self.walks.iter().map(|(id, w)| (id, w.vector.as_slice())), query, k)
    }

    /// kNN restricted to the walks owned by `owner`.
    pub fn knn_walks_of(&self, owner: &str, query: &[f32], k: usize) -> Result<Vec<(WalkKey, f64)>> {
        self.check_query(query, k)?;
        let items = self.walks_of(owner).map(|key| (key, self.walks[key].vector.as_slice()));
        top_k(items, query, k)
    }

    pub fn knn(&self, query: &[f32], k: usize, kind: Kind) -> Result<Vec<(String, f64)>> {
        Ok(match kind {
            Kind::Node => self.knn_nodes(query, k)?.into_iter().map(|(id, s)| (id.as_str().to_owned(), s)).collect(),
            Kind::Walk => self.knn_walks(query, k)?.into_iter().map(|(id, s)| (id.0, s)).collect(),
        })
    }

    fn check_query(&self, query: &[f32], k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        self.check_dim(query)
    }

    /// Binary encoding: magic, dimension, embedder id, counts, then node and
    /// walk records in key order with little-endian `f32` components.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + (self.nodes.len() + self.walks.len()) * (self.dimension * 4 + 32));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dimension as u32).to_le_bytes());
        put_str(&mut out, &self.embedder_id);
        out.extend_from_slice(&(self.nodes.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.walks.len() as u64).to_le_bytes());
        for (id, v) in &self.nodes {
            put_str(&mut out, id.as_str());
            put_vec(&mut out, v);
        }
        for (key, wv) in &self.walks {
            put_str(&mut out, key.as_str());
            put_str(&mut out, wv.owner.as_str());
            put_vec(&mut out, &wv.vector);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Corrupt("not an index file".into()));
        }
        let dimension = r.u32()? as usize;
        let mut idx = EmbeddingIndex::new(dimension, r.string()?);
        let nodes = r.u64()?;
        let walks = r.u64()?;
        for _ in 0..nodes {
            let id = NodeId::new(&r.string()?);
            let v = r.vector(dimension)?;
            idx.upsert_node(id, v)?;
        }
        for _ in 0..walks {
            let key = WalkKey(r.string()?);
            let owner = NodeId::new(&r.string()?);
            let v = r.vector(dimension)?;
            idx.upsert_walk(key, owner, v).map_err(|e| Error::Corrupt(e.to_string()))?;
        }
        if r.pos != bytes.len() {
            return Err(Error::Corrupt("trailing bytes after index records".into()));
        }
        Ok(idx)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn put_vec(out: &mut Vec<u8>, v: &[f32]) {
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Corrupt("index file is truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Corrupt("label is not UTF-8".into()))
    }

    fn vector(&mut self, dim: usize) -> Result<Vec<f32>> {
        let raw = self.take(dim.checked_mul(4).ok_or_else(|| Error::Corrupt("dimension overflow".into()))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
}
