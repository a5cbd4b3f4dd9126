mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn walkrag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkrag")).args(args).env_remove("WALKRAG_API_KEY").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup(dir: &Path) -> (String, String) {
    let graph = dir.join("movies.tsv");
    let tsv: String = common::MOVIE_TRIPLES.iter().map(|(h, r, t)| format!("{h}\t{r}\t{t}\n")).collect();
    fs::write(&graph, tsv).unwrap();
    fs::write(dir.join("questions.txt"), common::MOVIE_QUESTIONS).unwrap();
    (graph.to_str().unwrap().to_owned(), dir.join("out").to_str().unwrap().to_owned())
}

#[test]
fn build_query_update_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, out) = setup(dir.path());

    let o = walkrag(&["build", "--graph", &graph, "--traversal", "bfs", "--depth", "2", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("nodes: 12"), "{s}");
    assert!(s.contains("duplicate ratio"), "{s}");

    let o = walkrag(&["query", "who directed Heat", "--out", &out, "--mock-llm", "echo"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("answer: Heat directed by Michael Mann"), "{s}");
    assert!(s.contains("abstained: false"));
    assert!(s.contains("nodes (k=3)"));

    let o = walkrag(&["query", "zzz qqq", "--out", &out, "--mock-llm", "refuse"]);
    assert!(stdout(&o).contains("abstained: true"));

    let updates = dir.path().join("updates.tsv");
    fs::write(&updates, "add_edge\tAlien\treleased_in\t1979\n").unwrap();
    let o = walkrag(&["update", updates.to_str().unwrap(), "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("recomputed roots: 2"), "{}", stdout(&o));

    let questions = dir.path().join("questions.txt");
    let q = questions.to_str().unwrap();
    let o = walkrag(&["eval", q, "--out", &out, "--mock-llm", "echo", "--limit", "5", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("hits@1%"));
    let first = fs::read(Path::new(&out).join("eval_report.jsonl")).unwrap();
    walkrag(&["eval", q, "--out", &out, "--mock-llm", "echo", "--limit", "5", "--seed", "1"]);
    assert_eq!(fs::read(Path::new(&out).join("eval_report.jsonl")).unwrap(), first);
    assert_eq!(fs::read_to_string(Path::new(&out).join("eval_records.jsonl")).unwrap().lines().count(), 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, out) = setup(dir.path());
    let q = dir.path().join("questions.txt");
    let q = q.to_str().unwrap();

    assert_eq!(walkrag(&["build", "--bogus"]).status.code(), Some(1));
    assert_eq!(walkrag(&["build", "--graph", &graph, "--traversal", "dfs", "--out", &out]).status.code(), Some(1));
    assert_eq!(walkrag(&["build", "--graph", &graph, "--k", "0", "--out", &out]).status.code(), Some(1));
    // no artifacts yet
    assert_eq!(walkrag(&["query", "q", "--out", &out, "--mock-llm", "echo"]).status.code(), Some(2));
    assert_eq!(walkrag(&["build", "--graph", "/nonexistent.tsv", "--out", &out]).status.code(), Some(2));

    assert!(walkrag(&["build", "--graph", &graph, "--depth", "2", "--out", &out]).status.success());
    assert_eq!(walkrag(&["eval", q, "--out", &out, "--mock-llm", "echo", "--limit", "0"]).status.code(), Some(1));
    assert_eq!(walkrag(&["query", "q", "--out", &out, "--depth", "3", "--mock-llm", "echo"]).status.code(), Some(1));
    assert_eq!(walkrag(&["query", "q", "--out", &out]).status.code(), Some(1));
    let unreachable = walkrag(&[
        "query", "q", "--out", &out, "--llm-endpoint", "http://127.0.0.1:9/v1", "--llm-model", "m", "--llm-timeout", "2",
    ]);
    assert_eq!(unreachable.status.code(), Some(3));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "no tab on this line\n").unwrap();
    assert_eq!(walkrag(&["eval", bad.to_str().unwrap(), "--out", &out, "--mock-llm", "echo"]).status.code(), Some(2));
}

#[test]
fn rebuild_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, out) = setup(dir.path());
    let out2 = format!("{out}2");
    for o in [&out, &out2] {
        let args = ["build", "--graph", &graph, "--traversal", "rw", "--num-walks", "60", "--depth", "4", "--seed", "3", "--out", o];
        assert!(walkrag(&args).status.success());
    }
    for f in ["corpus.tsv", "index.bin", "verbalizations.tsv", "graph.kg"] {
        assert_eq!(fs::read(Path::new(&out).join(f)).unwrap(), fs::read(Path::new(&out2).join(f)).unwrap(), "{f}");
    }
    let header = fs::read_to_string(Path::new(&out).join("corpus.tsv")).unwrap();
    assert!(header.lines().next().unwrap().contains("traversal=rw\tdepth=4\tnum_walks=60\tseed=3"));
}
