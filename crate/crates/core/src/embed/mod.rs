//! Embedders, cosine similarity and the exact nearest-neighbour index.

mod index;
mod remote;

use crate::error::{Error, Result};
use crate::fnv1a64;
use crate::verbalizer::VerbalizedWalk;

pub use index::{EmbeddingIndex, Kind, WalkVector};
pub use remote::RemoteEmbedder;

pub const DEFAULT_DIMENSION: usize = 256;

/// Text to fixed-dimension vector. The same text must always map to the
/// same vector, and implementations must be callable from many threads.
pub trait Embedder: Send + Sync {
    fn id(&self) -> &str;

    fn dimension(&self) -> usize;

    fn embed(&self, text: &str) -> Result<Vec<f32>>;
}

impl<E: Embedder + ?Sized> Embedder for &E {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        (**self).embed(text)
    }
}

impl<E: Embedder + ?Sized> Embedder for Box<E> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        (**self).embed(text)
    }
}

/// Signed feature hashing of lowercase alphanumeric tokens, L2-normalized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HashedBowEmbedder {
    dimension: usize,
    id: String,
}

impl Default for HashedBowEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

impl HashedBowEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self { dimension, id: format!("hashed-bow-{dimension}") }
    }

    pub fn vector(&self, text: &str) -> Vec<f32> {
        let mut acc = vec![0f64; self.dimension];
        for token in tokens(text) {
            let h = fnv1a64(token.as_bytes());
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            acc[(h % self.dimension as u64) as usize] += sign;
        }
        let norm = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; self.dimension];
        }
        acc.iter().map(|x| (x / norm) as f32).collect()
    }
}

impl Embedder for HashedBowEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>> {
        Ok(self.vector(text))
    }
}

/// Maximal runs of alphanumeric characters, lowercased.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

/// Cosine similarity computed in double precision; 0 if either norm is 0.
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Texts sorted, joined by newlines, embedded once. No texts gives the zero
/// vector.
pub fn node_representation_text<S: AsRef<str>>(texts: &[S]) -> String {
    let mut sorted: Vec<&str> = texts.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    sorted.join("\n")
}

pub fn node_representation(walks: &[VerbalizedWalk], embedder: &dyn Embedder) -> Result<Vec<f32>> {
    if walks.is_empty() {
        return Ok(vec![0.0; embedder.dimension()]);
    }
    let texts: Vec<&str> = walks.iter().map(|w| w.text.as_str()).collect();
    embedder.embed(&node_representation_text(&texts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verbalizer::Method;
    use crate::walker::WalkKey;

    #[test]
    fn empty_text_is_zero() {
        assert!(HashedBowEmbedder::default().vector("").iter().all(|&x| x == 0.0));
        assert!(HashedBowEmbedder::default().vector(" ,. ").iter().all(|&x| x == 0.0));
    }

    #[test]
    fn repetition_does_not_change_direction() {
        let e = HashedBowEmbedder::default();
        let c = cosine(&e.vector("abc abc"), &e.vector("ABC")).unwrap();
        assert!((c - 1.0).abs() < 1e-6);
    }

    #[test]
    fn known_vector() {
        // fnv1a64("a") = 0xaf63dc4c8601ec8c: top bit set, so the sign is
        // negative; index = hash mod 256 = 0x8c
        let v = HashedBowEmbedder::default().vector("A");
        assert_eq!(v[0x8c], -1.0);
        assert_eq!(v.iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn unit_norm() {
        let v = HashedBowEmbedder::default().vector("The quick brown fox jumps over the lazy dog 42 times");
        let n: f64 = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn tokenizer() {
        let t: Vec<String> = tokens("Heat (1995), directed_by Michael-Mann; Zoë").collect();
        assert_eq!(t, ["heat", "1995", "directed", "by", "michael", "mann", "zoë"]);
    }

    #[test]
    fn cosine_closed_forms() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn vw(text: &str) -> VerbalizedWalk {
        VerbalizedWalk { key: WalkKey(text.into()), text: text.into(), method: Method::Template }
    }

    #[test]
    fn node_representation_rules() {
        let e = HashedBowEmbedder::default();
        assert_eq!(node_representation(&[vw("a b c")], &e).unwrap(), e.vector("a b c"));
        assert!(node_representation(&[], &e).unwrap().iter().all(|&x| x == 0.0));
        let ab = node_representation(&[vw("x y"), vw("z")], &e).unwrap();
        let ba = node_representation(&[vw("z"), vw("x y")], &e).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(node_representation_text(&["z", "x y"]), "x y\nz");
    }
}
