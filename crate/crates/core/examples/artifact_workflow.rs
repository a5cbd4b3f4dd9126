//! The on-disk workflow behind the `walkrag` binary: build artifacts,
//! query them, apply an update file and evaluate.
//!
//!     cargo run --example artifact_workflow

use std::path::Path;

use walkrag::app::{cmd_build, cmd_eval, cmd_query, cmd_update, MockLlm, RunConfig};
use walkrag::walker::Traversal;

fn main() -> walkrag::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let dir = tempfile::tempdir()?;
    let cfg = RunConfig {
        graph: Some(data.join("movies.tsv")),
        traversal: Traversal::Bfs,
        depth: 2,
        undirected: true,
        mock_llm: Some(MockLlm::Echo),
        out: dir.path().join("movies"),
        ..RunConfig::default()
    };

    println!("== build\n{}", cmd_build(&cfg)?);
    println!("\n== query\n{}", cmd_query(&cfg, "who directed Alien")?);
    println!("\n== update\n{}", cmd_update(&cfg, &data.join("movies_updates.tsv"))?);
    println!("\n== query\n{}", cmd_query(&cfg, "who directed Dune")?);
    let eval = cmd_eval(&cfg, &data.join("movies_questions.txt"), None)?;
    print!("\n== eval\n{}", eval.report.to_table());

    println!("\nfiles:");
    let mut names: Vec<String> =
        std::fs::read_dir(&cfg.out)?.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    for n in names {
        println!("  {n}");
    }
    Ok(())
}
