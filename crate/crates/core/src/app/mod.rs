//! Command implementations over an artifact directory.
//!
//! `build` writes the graph snapshot, corpus, verbalization cache and index
//! into the output directory together with the run configuration; `update`,
//! `query` and `eval` work from those files.

mod store;

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::embed::{Embedder, HashedBowEmbedder, RemoteEmbedder, DEFAULT_DIMENSION};
use crate::error::{Error, Result};
use crate::eval::{aggregate, load_metaqa, sample, EvalRecord, ExactMatchJudge, LatencySummary, Report};
use crate::graph::{parse_ntriples, parse_snapshot, parse_tsv, parse_updates, Graph};
use crate::llm::{EchoClient, HttpChatClient, HttpSettings, LlmClient, RefuseClient};
use crate::pipeline::{BuildOptions, BuildReport, KnowledgeBase, UpdateReport};
use crate::qa::{Answer, AnswerLogRecord};
use crate::retriever::DEFAULT_K;
use crate::walker::{Traversal, WalkConfig, DEFAULT_NUM_WALKS};

pub use store::{
    load_kb, save_kb, write_atomic, DirLock, ANSWERS_FILE, CONFIG_FILE, CORPUS_FILE, EVAL_RECORDS_FILE,
    EVAL_REPORT_FILE, EVAL_TIMING_FILE, GRAPH_FILE, INDEX_FILE, MANIFEST_FILE, VERBALIZATIONS_FILE,
};

pub const DEFAULT_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderKind {
    #[default]
    HashedBow,
    Remote,
}

impl FromStr for EmbedderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hashed-bow" => Ok(EmbedderKind::HashedBow),
            "remote" => Ok(EmbedderKind::Remote),
            other => Err(Error::Usage(format!("unknown embedder `{other}` (expected hashed-bow or remote)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockLlm {
    Echo,
    Refuse,
}

impl FromStr for MockLlm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "echo" => Ok(MockLlm::Echo),
            "refuse" => Ok(MockLlm::Refuse),
            other => Err(Error::Usage(format!("unknown mock `{other}` (expected echo or refuse)"))),
        }
    }
}

/// Everything a command needs. Saved next to the artifacts by `build`.
/// The API credential is never part of it; see [`crate::llm::API_KEY_ENV`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub traversal: Traversal,
    pub depth: usize,
    pub num_walks: usize,
    pub seed: u64,
    pub k: usize,
    pub embedder: EmbedderKind,
    pub embedding_model: Option<String>,
    pub embedding_dim: usize,
    pub llm_endpoint: Option<String>,
    pub llm_model: Option<String>,
    pub llm_timeout_secs: u64,
    pub mock_llm: Option<MockLlm>,
    pub undirected: bool,
    pub parallelism: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            traversal: Traversal::Bfs,
            depth: DEFAULT_DEPTH,
            num_walks: DEFAULT_NUM_WALKS,
            seed: 0,
            k: DEFAULT_K,
            embedder: EmbedderKind::HashedBow,
            embedding_model: None,
            embedding_dim: DEFAULT_DIMENSION,
            llm_endpoint: None,
            llm_model: None,
            llm_timeout_secs: crate::llm::DEFAULT_TIMEOUT.as_secs(),
            mock_llm: None,
            undirected: false,
            parallelism: 4,
            out: PathBuf::from("walkrag-out"),
        }
    }
}

impl RunConfig {
    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig { traversal: self.traversal, depth: self.depth, num_walks: self.num_walks, global_seed: self.seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.walk_config().validate()?;
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
        }
        if self.llm_endpoint.is_some() != self.llm_model.is_some() {
            return Err(Error::InvalidConfig("--llm-endpoint and --llm-model must be given together".into()));
        }
        if self.embedder == EmbedderKind::Remote
            && (self.llm_endpoint.is_none() || self.embedding_model.as_ref().or(self.llm_model.as_ref()).is_none())
        {
            return Err(Error::InvalidConfig("the remote embedder needs --llm-endpoint and a model".into()));
        }
        Ok(())
    }

    fn http(&self, model: &str) -> HttpSettings {
        let mut s = HttpSettings::new(self.llm_endpoint.clone().unwrap_or_default(), model);
        s.timeout = Duration::from_secs(self.llm_timeout_secs);
        s
    }

    pub fn embedder(&self) -> Result<Box<dyn Embedder>> {
        Ok(match self.embedder {
            EmbedderKind::HashedBow => Box::new(HashedBowEmbedder::new(self.embedding_dim)),
            EmbedderKind::Remote => {
                let model = self.embedding_model.as_ref().or(self.llm_model.as_ref()).ok_or_else(|| {
                    Error::InvalidConfig("the remote embedder needs a model".into())
                })?;
                Box::new(RemoteEmbedder::new(self.http(model), self.embedding_dim))
            }
        })
    }

    /// The configured chat client, if any. A mock takes precedence over an
    /// endpoint.
    pub fn llm_client(&self) -> Option<Box<dyn LlmClient>> {
        if let Some(m) = self.mock_llm {
            return Some(match m {
                MockLlm::Echo => Box::new(EchoClient),
                MockLlm::Refuse => Box::new(RefuseClient),
            });
        }
        let model = self.llm_model.as_ref()?;
        self.llm_endpoint.as_ref()?;
        Some(Box::new(HttpChatClient::new(self.http(model))))
    }

    /// The client used to verbalize walks. Mocks only know how to answer
    /// questions, so with a mock the template verbalizer is used.
    pub fn verbalizer_client(&self) -> Option<Box<dyn LlmClient>> {
        if self.mock_llm.is_some() {
            return None;
        }
        self.llm_client()
    }

    fn require_client(&self) -> Result<Box<dyn LlmClient>> {
        self.llm_client()
            .ok_or_else(|| Error::Usage("answering needs --mock-llm or --llm-endpoint with --llm-model".into()))
    }

    /// Reads the configuration saved by a previous build.
    pub fn load(out: &Path) -> Result<Self> {
        let path = out.join(CONFIG_FILE);
        let bytes = fs::read(&path)
            .map_err(|e| Error::Artifact { path: path.clone(), message: format!("{e}; run a build first") })?;
        let mut cfg: RunConfig =
            serde_json::from_slice(&bytes).map_err(|e| Error::Artifact { path, message: e.to_string() })?;
        cfg.out = out.to_path_buf();
        Ok(cfg)
    }

    fn save(&self) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        write_atomic(&self.out, CONFIG_FILE, json.as_bytes())
    }
}

/// Reads a graph file: N-Triples for `.nt`, a snapshot if the file starts
/// with the snapshot header, delimited triples otherwise.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Artifact { path: path.to_path_buf(), message: e.to_string() })?;
    let parsed = if path.extension().is_some_and(|e| e == "nt") {
        parse_ntriples(&text)
    } else if text.starts_with("#walkrag-graph") {
        parse_snapshot(&text)
    } else {
        parse_tsv(&text)
    };
    parsed.map_err(|e| match e {
        Error::Parse { .. } | Error::Unsupported { .. } => {
            Error::Artifact { path: path.to_path_buf(), message: e.to_string() }
        }
        other => other,
    })
}

#[derive(Clone, Debug)]
pub struct BuildSummary {
    pub report: BuildReport,
    pub out: PathBuf,
}

impl fmt::Display for BuildSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.report;
        writeln!(f, "nodes: {}", r.nodes)?;
        writeln!(f, "edges: {}", r.edges)?;
        writeln!(f, "distinct walks: {} ({} verbalizable)", r.corpus.distinct_walks, r.corpus.nonempty_walks)?;
        writeln!(f, "generated walks: {}", r.corpus.generated_walks)?;
        writeln!(f, "duplicate ratio: {:.4}", r.corpus.duplicate_ratio)?;
        writeln!(f, "mean distinct walks per node: {:.2}", r.corpus.mean_distinct_per_root)?;
        writeln!(
            f,
            "verbalized: {} (model {}, template {})",
            r.verbalization.verbalized, r.verbalization.via_llm, r.verbalization.via_template
        )?;
        writeln!(f, "indexed: {} nodes, {} walks", r.indexed_nodes, r.indexed_walks)?;
        write!(f, "artifacts: {}", self.out.display())
    }
}

pub fn cmd_build(cfg: &RunConfig) -> Result<BuildSummary> {
    cfg.validate()?;
    let graph_path = cfg.graph.as_ref().ok_or_else(|| Error::Usage("build needs --graph".into()))?;
    let graph = read_graph(graph_path)?;
    let _lock = DirLock::acquire(&cfg.out)?;
    let embedder = cfg.embedder()?;
    let client = cfg.verbalizer_client();
    let opts = BuildOptions { walk: cfg.walk_config(), undirected: cfg.undirected, parallelism: cfg.parallelism };
    let (kb, report) = KnowledgeBase::build(graph, &opts, client.as_deref(), embedder.as_ref())?;
    save_kb(&cfg.out, &kb)?;
    cfg.save()?;
    Ok(BuildSummary { report, out: cfg.out.clone() })
}

impl fmt::Display for UpdateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "updates applied: {}", self.updates)?;
        writeln!(f, "changed nodes: {}, changed edges: {}", self.changed_nodes, self.changed_edges)?;
        writeln!(f, "recomputed roots: {}", self.recomputed_roots)?;
        writeln!(f, "new verbalizations: {}, dropped: {}", self.new_verbalizations, self.dropped_verbalizations)?;
        write!(f, "reindexed nodes: {}", self.reindexed_nodes)
    }
}

pub fn cmd_update(cfg: &RunConfig, updates: &Path) -> Result<UpdateReport> {
    cfg.validate()?;
    let text = fs::read_to_string(updates)
        .map_err(|e| Error::Artifact { path: updates.to_path_buf(), message: e.to_string() })?;
    let updates = parse_updates(&text)
        .map_err(|e| Error::Artifact { path: updates.to_path_buf(), message: e.to_string() })?;
    let _lock = DirLock::acquire(&cfg.out)?;
    let mut kb = load_kb(&cfg.out, cfg.undirected)?;
    if updates.is_empty() {
        return Ok(UpdateReport::default());
    }
    let embedder = cfg.embedder()?;
    let client = cfg.verbalizer_client();
    let report = kb.apply_updates(&updates, client.as_deref(), embedder.as_ref(), cfg.parallelism)?;
    save_kb(&cfg.out, &kb)?;
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub answer: Answer,
    pub elapsed: Duration,
}

impl fmt::Display for QueryOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.answer.retrieval;
        writeln!(f, "nodes (k={}):", r.k)?;
        for n in &r.nodes {
            writeln!(f, "  {:>8.4}  {}", n.similarity, n.id)?;
        }
        writeln!(f, "walks:")?;
        for w in &r.walks {
            writeln!(f, "  {:>8.4}  [{}] {}", w.similarity, w.owner, w.text)?;
        }
        writeln!(f, "answer: {}", self.answer.response_text)?;
        writeln!(f, "abstained: {}", self.answer.abstained)?;
        write!(f, "elapsed: {:.3}s", self.elapsed.as_secs_f64())
    }
}

fn append_line(path: &Path, line: &str) -> Result<()> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(format!("{line}\n").as_bytes())?;
    Ok(())
}

pub fn cmd_query(cfg: &RunConfig, question: &str) -> Result<QueryOutcome> {
    cfg.validate()?;
    let client = cfg.require_client()?;
    let _lock = DirLock::acquire(&cfg.out)?;
    let kb = load_kb(&cfg.out, cfg.undirected)?;
    let embedder = cfg.embedder()?;
    let start = Instant::now();
    let answer = kb.answer(question, embedder.as_ref(), client.as_ref(), cfg.k)?;
    let elapsed = start.elapsed();
    append_line(&cfg.out.join(ANSWERS_FILE), &serde_json::to_string(&AnswerLogRecord::from(&answer))?)?;
    Ok(QueryOutcome { answer, elapsed })
}

#[derive(Clone, Debug)]
pub struct EvalOutcome {
    pub report: Report,
    pub records: Vec<EvalRecord>,
}

/// Answers every (sampled) question, scores it with exact matching and
/// writes per-question records and the aggregate report.
pub fn cmd_eval(cfg: &RunConfig, questions: &Path, limit: Option<usize>) -> Result<EvalOutcome> {
    cfg.validate()?;
    if limit == Some(0) {
        return Err(Error::Usage("--limit must be at least 1".into()));
    }
    let text = fs::read_to_string(questions)
        .map_err(|e| Error::Artifact { path: questions.to_path_buf(), message: e.to_string() })?;
    let examples = load_metaqa(&text)
        .map_err(|e| Error::Artifact { path: questions.to_path_buf(), message: e.to_string() })?;
    let examples = match limit {
        Some(n) => sample(&examples, n, cfg.seed),
        None => examples,
    };
    let client = cfg.require_client()?;
    let _lock = DirLock::acquire(&cfg.out)?;
    let kb = load_kb(&cfg.out, cfg.undirected)?;
    let embedder = cfg.embedder()?;

    let mut records = Vec::with_capacity(examples.len());
    let mut answers = String::new();
    let mut latencies = Vec::with_capacity(examples.len());
    for ex in &examples {
        let start = Instant::now();
        let answer = kb.answer(&ex.question, embedder.as_ref(), client.as_ref(), cfg.k)?;
        latencies.push(start.elapsed());
        answers.push_str(&serde_json::to_string(&AnswerLogRecord::from(&answer))?);
        answers.push('\n');
        records.push(EvalRecord::new(ex, &answer.response_text, answer.abstained, &ExactMatchJudge));
    }
    let mut report = aggregate(&records)?;
    report.latency = LatencySummary::from_durations(&latencies);

    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    write_atomic(&cfg.out, EVAL_RECORDS_FILE, lines.as_bytes())?;
    write_atomic(&cfg.out, EVAL_REPORT_FILE, report.to_jsonl()?.as_bytes())?;
    write_atomic(&cfg.out, EVAL_TIMING_FILE, format!("{}\n", serde_json::to_string(&report.latency)?).as_bytes())?;
    append_line(&cfg.out.join(ANSWERS_FILE), answers.trim_end())?;
    Ok(EvalOutcome { report, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "Heat\tdirected_by\tMichael Mann\nAlien\tdirected_by\tRidley Scott\nHeat\thas_genre\tThriller\n\
                       Alien\thas_genre\tHorror\nMichael Mann\tnationality\tUnited States\n";

    fn setup(dir: &Path) -> RunConfig {
        let graph = dir.join("toy.tsv");
        fs::write(&graph, TOY).unwrap();
        RunConfig { graph: Some(graph), depth: 2, out: dir.join("out"), mock_llm: Some(MockLlm::Echo), ..RunConfig::default() }
    }

    #[test]
    fn build_reload_query() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = setup(dir.path());
        let summary = cmd_build(&cfg).unwrap();
        assert_eq!(summary.report.nodes, 7);
        for f in [CORPUS_FILE, INDEX_FILE, VERBALIZATIONS_FILE, GRAPH_FILE, CONFIG_FILE, MANIFEST_FILE] {
            assert!(cfg.out.join(f).exists(), "{f}");
        }
        let loaded = RunConfig::load(&cfg.out).unwrap();
        assert_eq!(loaded, cfg);
        let q = cmd_query(&loaded, "who directed Heat").unwrap();
        assert!(q.answer.response_text.contains("Michael Mann"), "{q}");
        assert!(fs::read_to_string(cfg.out.join(ANSWERS_FILE)).unwrap().lines().count() == 1);
    }

    #[test]
    fn rebuild_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig { traversal: Traversal::RandomWalk, ..setup(dir.path()) };
        cmd_build(&cfg).unwrap();
        let first = (fs::read(cfg.out.join(CORPUS_FILE)).unwrap(), fs::read(cfg.out.join(INDEX_FILE)).unwrap());
        cmd_build(&cfg).unwrap();
        let second = (fs::read(cfg.out.join(CORPUS_FILE)).unwrap(), fs::read(cfg.out.join(INDEX_FILE)).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn corrupted_artifact_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = setup(dir.path());
        cmd_build(&cfg).unwrap();
        fs::write(cfg.out.join(CORPUS_FILE), "#walkrag-corpus v1\n").unwrap();
        assert!(matches!(cmd_query(&cfg, "q"), Err(Error::Artifact { .. })));
    }

    #[test]
    fn update_and_empty_update() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = setup(dir.path());
        cmd_build(&cfg).unwrap();
        let empty = dir.path().join("empty.tsv");
        fs::write(&empty, "").unwrap();
        assert_eq!(cmd_update(&cfg, &empty).unwrap(), UpdateReport::default());
        let ups = dir.path().join("ups.tsv");
        fs::write(&ups, "add_edge\tAlien\treleased_in\t1979\n").unwrap();
        let r = cmd_update(&cfg, &ups).unwrap();
        assert!(r.recomputed_roots >= 2);
        let kb = load_kb(&cfg.out, false).unwrap();
        assert!(kb.graph.contains_node("1979"));
    }

    #[test]
    fn eval_limit_zero_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = setup(dir.path());
        let qs = dir.path().join("q.txt");
        fs::write(&qs, "who directed [Heat]\tMichael Mann\n").unwrap();
        assert!(matches!(cmd_eval(&cfg, &qs, Some(0)), Err(Error::Usage(_))));
        cmd_build(&cfg).unwrap();
        let out = cmd_eval(&cfg, &qs, None).unwrap();
        assert_eq!(out.report.overall.hits, 1);
    }

    #[test]
    fn config_validation() {
        let base = RunConfig::default();
        assert!(base.validate().is_ok());
        assert!(RunConfig { k: 0, ..base.clone() }.validate().is_err());
        assert!(RunConfig { llm_endpoint: Some("http://x".into()), ..base.clone() }.validate().is_err());
        assert!(RunConfig { embedder: EmbedderKind::Remote, ..base.clone() }.validate().is_err());
        assert!(base.llm_client().is_none());
        assert_eq!(RunConfig { mock_llm: Some(MockLlm::Refuse), ..base }.llm_client().unwrap().model(), "mock-refuse");
    }
}
