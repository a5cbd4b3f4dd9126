//! Breadth-first layers and spanning-tree walks from one entity.
//!
//!     cargo run --example bfs_spanning_tree -- [entity] [depth]

use walkrag::graph::parse_tsv;
use walkrag::walker::{bfs_layers, bfs_walks, generate_bfs_corpus, WalkConfig};

fn main() -> walkrag::Result<()> {
    let mut args = std::env::args().skip(1);
    let root = args.next().unwrap_or_else(|| "Ridley Scott".to_owned());
    let depth = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);

    let g = parse_tsv(include_str!("data/movies.tsv"))?.with_inverse_edges();
    for (i, layer) in bfs_layers(&g, &root, depth)?.iter().enumerate() {
        let names: Vec<&str> = layer.iter().map(|n| n.as_str()).collect();
        println!("layer {i}: {}", names.join(", "));
    }
    println!();
    for w in bfs_walks(&g, &root, depth)? {
        let path: Vec<String> = w.triples().map(|(h, r, t)| format!("{h} -{r}-> {t}")).collect();
        println!("{}", path.join(" | "));
    }

    let corpus = generate_bfs_corpus(&g, &WalkConfig::bfs(depth))?;
    let s = corpus.stats();
    println!("\nwhole graph: {} walks over {} entities, duplicate ratio {}", s.distinct_walks, s.roots, s.duplicate_ratio);
    Ok(())
}
