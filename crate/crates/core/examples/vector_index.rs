//! Hashed bag-of-words embeddings and the exact cosine index.
//!
//!     cargo run --example vector_index

use walkrag::embed::{cosine, Embedder, EmbeddingIndex, HashedBowEmbedder, Kind};
use walkrag::graph::NodeId;
use walkrag::walker::WalkKey;

fn main() -> walkrag::Result<()> {
    let e = HashedBowEmbedder::default();
    let a = e.embed("Heat directed by Michael Mann.")?;
    let b = e.embed("who directed heat")?;
    println!("cosine = {:.4}", cosine(&a, &b)?);

    let mut idx = EmbeddingIndex::new(e.dimension(), e.id());
    let walks = [
        ("Heat", "Heat directed by Michael Mann."),
        ("Heat", "Heat starred actors Al Pacino."),
        ("Alien", "Alien directed by Ridley Scott."),
        ("Jaws", "Jaws has genre Horror."),
    ];
    for (owner, text) in walks {
        if idx.node_vector(owner).is_none() {
            idx.upsert_node(NodeId::new(owner), e.embed(owner)?)?;
        }
        idx.upsert_walk(WalkKey(text.to_owned()), NodeId::new(owner), e.embed(text)?)?;
    }

    let q = e.embed("who directed alien")?;
    for (id, sim) in idx.knn(&q, 3, Kind::Walk)? {
        println!("  {sim:.4}  {id}");
    }
    println!("walks owned by Heat: {:?}", idx.knn_walks_of("Heat", &q, 3)?);

    let bytes = idx.to_bytes();
    let back = EmbeddingIndex::from_bytes(&bytes)?;
    println!("{} bytes on disk, round trip equal: {}", bytes.len(), back == idx);

    idx.remove_node("Heat")?;
    println!("after removing Heat: {} nodes, {} walks", idx.node_count(), idx.walk_count());
    Ok(())
}
