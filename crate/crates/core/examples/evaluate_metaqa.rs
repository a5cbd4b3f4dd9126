//! Score a MetaQA-style question file: Hits@1, accuracy, hallucination,
//! missing and truthfulness, overall and per hop.
//!
//!     cargo run --example evaluate_metaqa -- [questions.txt]

use std::time::Instant;

use walkrag::embed::HashedBowEmbedder;
use walkrag::eval::{aggregate, load_metaqa, EvalRecord, ExactMatchJudge, LatencySummary};
use walkrag::graph::parse_tsv;
use walkrag::llm::{EchoClient, LlmClient, RefuseClient};
use walkrag::pipeline::{BuildOptions, KnowledgeBase};
use walkrag::walker::WalkConfig;

fn main() -> walkrag::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => include_str!("data/movies_questions.txt").to_owned(),
    };
    let examples = load_metaqa(&text)?;
    let e = HashedBowEmbedder::default();
    let g = parse_tsv(include_str!("data/movies.tsv"))?;
    let opts = BuildOptions { undirected: true, ..BuildOptions::new(WalkConfig::bfs(3)) };
    let (kb, _) = KnowledgeBase::build(g, &opts, None, &e)?;

    let clients: [&dyn LlmClient; 2] = [&EchoClient, &RefuseClient];
    for client in clients {
        let mut records = Vec::new();
        let mut latencies = Vec::new();
        for ex in &examples {
            let start = Instant::now();
            let a = kb.answer(&ex.question, &e, client, 3)?;
            latencies.push(start.elapsed());
            records.push(EvalRecord::new(ex, &a.response_text, a.abstained, &ExactMatchJudge));
        }
        let mut report = aggregate(&records)?;
        report.latency = LatencySummary::from_durations(&latencies);
        println!("{} on {} questions\n{}", client.model(), examples.len(), report.to_table());
    }
    Ok(())
}
