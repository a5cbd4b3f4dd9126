//! Answer generation: prompt assembly, the single model call per question,
//! and abstention detection.

use serde::{Deserialize, Serialize};

use crate::embed::{Embedder, EmbeddingIndex};
use crate::error::{Error, Result};
use crate::llm::{ChatRequest, LlmClient};
use crate::retriever::{retrieve, RetrievalResult};
use crate::template::fill;
use crate::verbalizer::VerbalizationCache;

pub const ANSWER_SYSTEM: &str = include_str!("../assets/prompts/answer_system.txt");
pub const ANSWER_HUMAN: &str = include_str!("../assets/prompts/answer_human.txt");

/// The sentence the model is instructed to return when it cannot answer.
pub const ABSTENTION: &str = "I do not know the answer";

/// Fills the context slot when retrieval returned nothing.
pub const NO_CONTEXT: &str = "No context retrieved.";

/// Context items numbered `1. ...`, one per line. Line breaks inside an item
/// become spaces so that every item stays on its own line.
pub fn format_context<S: AsRef<str>>(context: &[S]) -> String {
    if context.is_empty() {
        return NO_CONTEXT.to_owned();
    }
    context
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{}. {}", i + 1, c.as_ref().replace(['\r', '\n'], " ")))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn build_answer_prompt<S: AsRef<str>>(question: &str, context: &[S]) -> ChatRequest {
    let context = format_context(context);
    ChatRequest::new(ANSWER_SYSTEM, fill(ANSWER_HUMAN, &[("question", question), ("context", &context)]))
}

/// Recovers the context items from a human text produced by
/// [`build_answer_prompt`]. Returns an empty list for an empty context or a
/// text that does not follow the template.
pub fn context_lines(human: &str) -> Vec<String> {
    let (Some(q), Some(c)) = (ANSWER_HUMAN.find("{question}"), ANSWER_HUMAN.find("{context}")) else {
        return Vec::new();
    };
    let marker = &ANSWER_HUMAN[q + "{question}".len()..c];
    let suffix = &ANSWER_HUMAN[c + "{context}".len()..];
    let Some(start) = human.rfind(marker) else {
        return Vec::new();
    };
    let block = &human[start + marker.len()..];
    let block = block.strip_suffix(suffix).unwrap_or(block);
    if block == NO_CONTEXT {
        return Vec::new();
    }
    block
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let prefix = format!("{}. ", i + 1);
            line.strip_prefix(prefix.as_str()).unwrap_or(line).to_owned()
        })
        .collect()
}

fn normalize(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '`' | '\u{201c}' | '\u{201d}'))
        .trim_end_matches(|c: char| matches!(c, '.' | '!' | '?' | ',' | ';' | ':') || c.is_whitespace())
        .trim_matches(|c: char| c.is_whitespace() || matches!(c, '"' | '\'' | '`' | '\u{201c}' | '\u{201d}'))
        .to_lowercase()
}

/// True if the response is the abstention sentence, or opens with it as its
/// complete first sentence. Case, surrounding whitespace, quotes and
/// terminal punctuation are ignored.
pub fn is_abstention(response: &str) -> bool {
    let target = ABSTENTION.to_lowercase();
    if normalize(response) == target {
        return true;
    }
    let trimmed = response.trim();
    match trimmed.find(['.', '!', '?', '\n']) {
        Some(end) => normalize(&trimmed[..end]) == target,
        None => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Answer {
    pub question: String,
    pub response_text: String,
    pub abstained: bool,
    pub context_used: Vec<String>,
    pub llm_model: String,
    pub retrieval: RetrievalResult,
}

/// Generates the answer for an already computed retrieval with exactly one
/// client call. On failure the retrieval is returned inside the error.
pub fn answer_with(question: &str, retrieval: RetrievalResult, client: &dyn LlmClient) -> Result<Answer> {
    let context_used: Vec<String> = retrieval.walks.iter().map(|w| w.text.clone()).collect();
    let request = build_answer_prompt(question, &context_used);
    match client.send(&request) {
        Ok(response) => Ok(Answer {
            question: question.to_owned(),
            abstained: is_abstention(&response),
            response_text: response,
            context_used,
            llm_model: client.model().to_owned(),
            retrieval,
        }),
        Err(source) => Err(Error::Answer { source, retrieval: Box::new(retrieval) }),
    }
}

/// Retrieves context for `question` and answers it.
pub fn answer(
    question: &str,
    index: &EmbeddingIndex,
    verbalizations: &VerbalizationCache,
    embedder: &dyn Embedder,
    client: &dyn LlmClient,
    k: usize,
) -> Result<Answer> {
    let retrieval = retrieve(question, index, verbalizations, embedder, k)?;
    answer_with(question, retrieval, client)
}

/// One line of the answer log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerLogRecord {
    pub question: String,
    pub response: String,
    pub abstained: bool,
    pub k: usize,
    pub model: String,
    pub context: Vec<String>,
}

impl From<&Answer> for AnswerLogRecord {
    fn from(a: &Answer) -> Self {
        Self {
            question: a.question.clone(),
            response: a.response_text.clone(),
            abstained: a.abstained,
            k: a.retrieval.k,
            model: a.llm_model.clone(),
            context: a.retrieval.walks.iter().map(|w| w.key.0.clone()).collect(),
        }
    }
}
