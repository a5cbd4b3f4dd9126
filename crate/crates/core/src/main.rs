use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use walkrag::app::{self, EmbedderKind, MockLlm, RunConfig};
use walkrag::walker::Traversal;
use walkrag::{Error, Result};

/// Knowledge-graph retrieval-augmented question answering.
#[derive(Parser)]
#[command(name = "walkrag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Build corpus, verbalizations and index from a graph file.
    Build,
    /// Apply an update file to existing artifacts.
    Update { updates: PathBuf },
    /// Answer one question.
    Query { question: String },
    /// Answer and score a MetaQA-style question file.
    Eval { questions: PathBuf },
}

#[derive(Args)]
struct Opts {
    /// Graph file (.nt, snapshot, or TAB- or pipe-separated triples).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// rw or bfs.
    #[arg(long, global = true)]
    traversal: Option<String>,
    #[arg(long, global = true)]
    depth: Option<usize>,
    #[arg(long, global = true)]
    num_walks: Option<usize>,
    /// Walk seed for build, sampling seed for eval.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    /// hashed-bow or remote.
    #[arg(long, global = true)]
    embedder: Option<String>,
    #[arg(long, global = true)]
    embedding_model: Option<String>,
    #[arg(long, global = true)]
    embedding_dim: Option<usize>,
    /// OpenAI-compatible base URL; the key is read from WALKRAG_API_KEY.
    #[arg(long, global = true)]
    llm_endpoint: Option<String>,
    #[arg(long, global = true)]
    llm_model: Option<String>,
    /// Request timeout in seconds.
    #[arg(long, global = true)]
    llm_timeout: Option<u64>,
    /// echo or refuse.
    #[arg(long, global = true)]
    mock_llm: Option<String>,
    #[arg(long, global = true)]
    undirected: bool,
    /// Artifact directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Evaluate a seeded sample of this many questions.
    #[arg(long, global = true)]
    limit: Option<usize>,
    /// Concurrent model requests while verbalizing.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
}

impl Opts {
    fn build_only_flags(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let flags = [
            (self.graph.is_some(), "--graph"),
            (self.traversal.is_some(), "--traversal"),
            (self.depth.is_some(), "--depth"),
            (self.num_walks.is_some(), "--num-walks"),
            (self.embedder.is_some(), "--embedder"),
            (self.embedding_model.is_some(), "--embedding-model"),
            (self.embedding_dim.is_some(), "--embedding-dim"),
            (self.undirected, "--undirected"),
        ];
        for (set, name) in flags {
            if set {
                v.push(name);
            }
        }
        v
    }

    fn apply_runtime(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if self.llm_endpoint.is_some() || self.llm_model.is_some() {
            cfg.llm_endpoint = self.llm_endpoint.clone();
            cfg.llm_model = self.llm_model.clone();
        }
        if let Some(t) = self.llm_timeout {
            cfg.llm_timeout_secs = t;
        }
        if let Some(m) = &self.mock_llm {
            cfg.mock_llm = Some(m.parse::<MockLlm>()?);
        }
        if let Some(p) = self.parallelism {
            cfg.parallelism = p;
        }
        Ok(())
    }

    fn build_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig { graph: self.graph.clone(), undirected: self.undirected, ..RunConfig::default() };
        if let Some(t) = &self.traversal {
            cfg.traversal = t.parse::<Traversal>().map_err(|e| Error::Usage(e.to_string()))?;
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(n) = self.num_walks {
            cfg.num_walks = n;
        }
        if let Some(e) = &self.embedder {
            cfg.embedder = e.parse::<EmbedderKind>()?;
        }
        cfg.embedding_model = self.embedding_model.clone();
        if let Some(d) = self.embedding_dim {
            cfg.embedding_dim = d;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        self.apply_runtime(&mut cfg)?;
        Ok(cfg)
    }

    fn saved_config(&self) -> Result<RunConfig> {
        if let Some(flag) = self.build_only_flags().first() {
            return Err(Error::Usage(format!("{flag} only applies to build")));
        }
        let out = self.out.clone().unwrap_or_else(|| RunConfig::default().out);
        let mut cfg = RunConfig::load(&out)?;
        self.apply_runtime(&mut cfg)?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.opts.limit.is_some() && !matches!(cli.command, Command::Eval { .. }) {
        return Err(Error::Usage("--limit only applies to eval".into()));
    }
    match &cli.command {
        Command::Build => println!("{}", app::cmd_build(&cli.opts.build_config()?)?),
        Command::Update { updates } => println!("{}", app::cmd_update(&cli.opts.saved_config()?, updates)?),
        Command::Query { question } => println!("{}", app::cmd_query(&cli.opts.saved_config()?, question)?),
        Command::Eval { questions } => {
            let outcome = app::cmd_eval(&cli.opts.saved_config()?, questions, cli.opts.limit)?;
            print!("{}", outcome.report.to_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
