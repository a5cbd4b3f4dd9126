//! Apply graph updates and recompute only the affected part of the corpus,
//! verbalizations and index, then check against a full rebuild.
//!
//!     cargo run --example incremental_update

use std::time::Instant;

use walkrag::embed::HashedBowEmbedder;
use walkrag::graph::{parse_tsv, parse_updates};
use walkrag::pipeline::{BuildOptions, KnowledgeBase};
use walkrag::walker::{affected_roots, WalkConfig};

fn main() -> walkrag::Result<()> {
    let e = HashedBowEmbedder::default();
    let opts = BuildOptions { undirected: true, ..BuildOptions::new(WalkConfig::random(3, 20, 7)) };
    let graph = parse_tsv(include_str!("data/movies.tsv"))?;
    let updates = parse_updates(include_str!("data/movies_updates.tsv"))?;

    let (mut kb, built) = KnowledgeBase::build(graph.clone(), &opts, None, &e)?;
    println!("built: {} nodes, {} distinct walks", built.nodes, built.corpus.distinct_walks);

    let start = Instant::now();
    let report = kb.apply_updates(&updates, None, &e, 1)?;
    println!("update took {:.2?}:\n{report:#?}", start.elapsed());

    let mut target = graph.with_inverse_edges();
    let mut changes = walkrag::graph::ChangeSet::default();
    let prior = target.fingerprint();
    let before = walkrag::walker::generate_corpus(&target, &opts.walk)?;
    for u in &updates {
        for u in u.clone().with_inverse() {
            changes.extend(target.apply_update(&u)?);
        }
    }
    let affected = affected_roots(&target, &before, &prior, &changes)?;
    println!("affected roots: {}", affected.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", "));

    let mut plain = graph;
    for u in &updates {
        plain.apply_update(u)?;
    }
    let (rebuilt, _) = KnowledgeBase::build(plain, &opts, None, &e)?;
    println!("incremental result equals full rebuild: {}", rebuilt == kb);
    Ok(())
}
