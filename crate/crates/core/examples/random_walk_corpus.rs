//! Random-walk corpus with duplicate statistics.
//!
//! Sixty walks per entity on a sparse graph repeat themselves a lot; the
//! corpus keeps each distinct walk once with its multiplicity.
//!
//!     cargo run --example random_walk_corpus -- [num_walks] [depth]

use walkrag::graph::parse_tsv;
use walkrag::walker::{generate_rw_corpus, WalkConfig, DEFAULT_NUM_WALKS};

fn main() -> walkrag::Result<()> {
    let mut args = std::env::args().skip(1);
    let num_walks = args.next().and_then(|a| a.parse().ok()).unwrap_or(DEFAULT_NUM_WALKS);
    let depth = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);

    let g = parse_tsv(include_str!("data/movies.tsv"))?.with_inverse_edges();
    let corpus = generate_rw_corpus(&g, &WalkConfig::random(depth, num_walks, 42))?;
    let stats = corpus.stats();
    println!("{num_walks} walks of depth {depth} per entity over {} entities", stats.roots);
    println!("generated: {}", stats.generated_walks);
    println!("distinct: {}", stats.distinct_walks);
    println!("distinct per entity: {:.2}", stats.mean_distinct_per_root);
    println!("duplicate ratio: {:.3}", stats.duplicate_ratio);

    println!("\nmost frequent walks from Heat:");
    let mut heat = corpus.walks_of("Heat").unwrap_or_default().to_vec();
    heat.sort_by_key(|e| std::cmp::Reverse(e.multiplicity));
    for e in heat.iter().take(8) {
        let path: Vec<String> = e.walk.triples().map(|(h, r, t)| format!("{h} -{r}-> {t}")).collect();
        println!("  x{:<3} {}", e.multiplicity, path.join(" | "));
    }
    Ok(())
}
