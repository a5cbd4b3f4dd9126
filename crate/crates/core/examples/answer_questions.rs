//! Answer questions with one model call each.
//!
//! Runs offline with the echo and refuse mocks. With `WALKRAG_LLM_ENDPOINT`
//! and `WALKRAG_LLM_MODEL` set, a real chat model answers as well.
//!
//!     cargo run --example answer_questions

use walkrag::embed::HashedBowEmbedder;
use walkrag::graph::parse_tsv;
use walkrag::llm::{CountingClient, EchoClient, HttpChatClient, HttpSettings, LlmClient, RefuseClient};
use walkrag::pipeline::{BuildOptions, KnowledgeBase};
use walkrag::qa::build_answer_prompt;
use walkrag::walker::WalkConfig;

fn main() -> walkrag::Result<()> {
    let e = HashedBowEmbedder::default();
    let g = parse_tsv(include_str!("data/movies.tsv"))?;
    let (kb, _) = KnowledgeBase::build(g, &BuildOptions::new(WalkConfig::bfs(2)), None, &e)?;

    let mut clients: Vec<Box<dyn LlmClient>> = vec![Box::new(EchoClient), Box::new(RefuseClient)];
    if let (Ok(endpoint), Ok(model)) = (std::env::var("WALKRAG_LLM_ENDPOINT"), std::env::var("WALKRAG_LLM_MODEL")) {
        clients.push(Box::new(HttpChatClient::new(HttpSettings::new(endpoint, model))));
    }

    let questions = ["who directed Heat", "when was Jaws released", "what is the capital of France"];
    let shown = build_answer_prompt(questions[0], &kb.answer(questions[0], &e, &EchoClient, 3)?.context_used);
    println!("prompt for {:?}:\n{}\n", questions[0], shown.human);

    for client in &clients {
        let counting = CountingClient::new(client.as_ref());
        for q in questions {
            let a = kb.answer(q, &e, &counting, 3)?;
            println!("[{}] {q}\n    -> {} (abstained: {})", a.llm_model, a.response_text, a.abstained);
        }
        println!("    {} questions, {} model calls\n", questions.len(), counting.calls());
    }
    Ok(())
}
