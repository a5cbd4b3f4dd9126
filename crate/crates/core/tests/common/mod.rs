#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkrag::graph::{Graph, NodeId, Triple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random directed multigraph over nodes `n0..n{nodes-1}` with relation
/// labels drawn from `relations` choices. Every node exists even if isolated.
pub fn random_graph(rng: &mut impl Rng, nodes: usize, edges: usize, relations: usize) -> Graph {
    let mut g = Graph::new();
    for i in 0..nodes {
        g.add_node(&NodeId::new(&format!("n{i}")));
    }
    if nodes == 0 {
        return g;
    }
    for _ in 0..edges {
        let h = rng.random_range(0..nodes);
        let t = rng.random_range(0..nodes);
        let r = rng.random_range(0..relations.max(1));
        g.add_edge(&Triple::new(format!("n{h}").as_str(), format!("r{r}").as_str(), format!("n{t}").as_str()));
    }
    g
}

/// Unweighted all-pairs shortest paths by Floyd–Warshall over node indices
/// in `g.nodes()` order.
pub fn all_pairs_hops(g: &Graph) -> (Vec<String>, Vec<Vec<Option<usize>>>) {
    let names: Vec<String> = g.nodes().map(|n| n.as_str().to_owned()).collect();
    let n = names.len();
    let idx = |s: &str| names.iter().position(|x| x == s).unwrap();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for t in g.triples() {
        let (h, tl) = (idx(t.head.as_str()), idx(t.tail.as_str()));
        if h != tl {
            d[h][tl] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    (names, d)
}

pub const MOVIE_TRIPLES: &[(&str, &str, &str)] = &[
    ("Inception", "directed_by", "Christopher Nolan"),
    ("Heat", "directed_by", "Michael Mann"),
    ("Alien", "directed_by", "Ridley Scott"),
    ("Jaws", "directed_by", "Steven Spielberg"),
    ("Christopher Nolan", "nationality", "United Kingdom"),
    ("Michael Mann", "nationality", "United States"),
    ("Ridley Scott", "nationality", "United Kingdom"),
    ("Steven Spielberg", "nationality", "United States"),
    ("Inception", "has_genre", "Thriller"),
    ("Heat", "has_genre", "Thriller"),
    ("Alien", "has_genre", "Horror"),
    ("Jaws", "has_genre", "Horror"),
];

pub fn movie_graph() -> Graph {
    Graph::from_triples(MOVIE_TRIPLES.iter().map(|(h, r, t)| Triple::new(*h, *r, *t)))
}

/// MetaQA-formatted questions over the movie graph, hop count in the third
/// field.
pub const MOVIE_QUESTIONS: &str = "\
who directed [Inception]\tChristopher Nolan\t1
who directed [Heat]\tMichael Mann\t1
who directed [Alien]\tRidley Scott\t1
who directed [Jaws]\tSteven Spielberg\t1
what is the nationality of [Christopher Nolan]\tUnited Kingdom\t1
what is the nationality of [Michael Mann]\tUnited States\t1
what is the nationality of [Ridley Scott]\tUnited Kingdom\t1
what is the nationality of [Steven Spielberg]\tUnited States\t1
which genre does [Heat] have\tThriller\t1
which genre does [Alien] have\tHorror\t1
what is the nationality of the director of [Inception]\tUnited Kingdom\t2
what is the nationality of the director of [Heat]\tUnited States\t2
what is the nationality of the director of [Jaws]\tUnited States\t2
what is the nationality of the director of [Alien]\tUnited Kingdom\t2
which films share a genre with [Heat]\tInception\t2
";
