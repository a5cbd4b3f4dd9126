//! Two-stage retrieval: closest entities, then their closest walks.
//!
//!     cargo run --example retrieve_context -- "who directed Gladiator"

use walkrag::embed::HashedBowEmbedder;
use walkrag::graph::parse_tsv;
use walkrag::pipeline::{BuildOptions, KnowledgeBase};
use walkrag::retriever::{retrieve, DEFAULT_K};
use walkrag::walker::WalkConfig;

fn main() -> walkrag::Result<()> {
    let question = std::env::args().nth(1).unwrap_or_else(|| "who directed Gladiator".to_owned());
    let e = HashedBowEmbedder::default();
    let g = parse_tsv(include_str!("data/movies.tsv"))?;
    let (kb, _) = KnowledgeBase::build(g, &BuildOptions::new(WalkConfig::bfs(2)), None, &e)?;

    let r = retrieve(&question, &kb.index, &kb.verbalizations, &e, DEFAULT_K)?;
    println!("question: {question}\nentities:");
    for n in &r.nodes {
        println!("  {:.4}  {}", n.similarity, n.id);
    }
    println!("context:");
    for w in &r.walks {
        println!("  {:.4}  [{}] {}", w.similarity, w.owner, w.text);
    }
    println!("\n{}", serde_json::to_string(&r)?);
    Ok(())
}
