//! Load a graph from N-Triples and from delimited text, inspect it, and
//! write it back out.
//!
//!     cargo run --example parse_graphs

use walkrag::graph::{parse_ntriples, parse_tsv, to_snapshot, to_tsv};

fn main() -> walkrag::Result<()> {
    let nt = parse_ntriples(include_str!("data/tiny.nt"))?;
    println!("N-Triples: {} nodes, {} edges", nt.node_count(), nt.edge_count());
    for t in nt.triples() {
        println!("  {t}");
    }

    let movies = parse_tsv(include_str!("data/movies.tsv"))?;
    println!("\nmovies.tsv: {} nodes, {} edges", movies.node_count(), movies.edge_count());
    println!("relations: {}", movies.relations().map(|r| r.as_str()).collect::<Vec<_>>().join(", "));
    for (r, n) in movies.neighbors("Heat")? {
        println!("  Heat --{r}--> {n}");
    }
    println!("fingerprint: {}", movies.fingerprint());

    let undirected = movies.with_inverse_edges();
    println!("\nwith inverse edges: {} edges", undirected.edge_count());
    for (r, n) in undirected.neighbors("Ridley Scott")? {
        println!("  Ridley Scott --{r}--> {n}");
    }

    print!("\ncanonical TSV of the N-Triples graph:\n{}", to_tsv(&nt)?);
    print!("\nsnapshot:\n{}", to_snapshot(&nt));
    Ok(())
}
