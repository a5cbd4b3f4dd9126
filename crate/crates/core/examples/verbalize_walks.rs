//! Turn walks into sentences.
//!
//! Without configuration the deterministic template is used. Set
//! `WALKRAG_LLM_ENDPOINT` and `WALKRAG_LLM_MODEL` (and `WALKRAG_API_KEY` if
//! the service needs one) to verbalize through an OpenAI-compatible model.
//!
//!     cargo run --example verbalize_walks

use walkrag::graph::parse_tsv;
use walkrag::llm::{HttpChatClient, HttpSettings, LlmClient};
use walkrag::verbalizer::{verbalization_prompt, verbalize_corpus, VerbalizationCache};
use walkrag::walker::{generate_bfs_corpus, WalkConfig};

fn main() -> walkrag::Result<()> {
    let g = parse_tsv(include_str!("data/movies.tsv"))?;
    let corpus = generate_bfs_corpus(&g, &WalkConfig::bfs(2))?;

    let client: Option<HttpChatClient> = match (std::env::var("WALKRAG_LLM_ENDPOINT"), std::env::var("WALKRAG_LLM_MODEL")) {
        (Ok(endpoint), Ok(model)) => Some(HttpChatClient::new(HttpSettings::new(endpoint, model))),
        _ => None,
    };

    let first = corpus.walks_of("Heat").unwrap_or_default().iter().find(|e| e.walk.len() == 2).map(|e| &e.walk);
    if let Some(w) = first {
        let prompt = verbalization_prompt(w)?;
        println!("system: {}\nhuman:  {}\n", prompt.system, prompt.human);
    }

    let cache = VerbalizationCache::new();
    let stats = verbalize_corpus(&corpus, client.as_ref().map(|c| c as &dyn LlmClient), &cache, 4)?;
    println!("verbalized {} walks ({} by model, {} by template)", stats.verbalized, stats.via_llm, stats.via_template);
    for v in cache.to_vec().iter().filter(|v| v.key.as_str().starts_with("Heat\t")) {
        println!("  [{}] {}", v.method, v.text);
    }

    let again = verbalize_corpus(&corpus, client.as_ref().map(|c| c as &dyn LlmClient), &cache, 4)?;
    println!("second pass: {} new, {} cached", again.verbalized, again.cached);
    Ok(())
}
