//! Benchmark loading, scoring and aggregate reports.
//!
//! Each response is scored accurate (1), missing (0, the model abstained) or
//! hallucinated (-1). Rates are kept as exact fractions so that accuracy,
//! hallucination and missing always sum to one; truthfulness is accuracy
//! minus hallucination.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qa::is_abstention;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub question: String,
    /// Never empty.
    pub gold: Vec<String>,
    pub hop: Option<u8>,
}

/// Parses MetaQA-style question files: `question<TAB>answer1|answer2|...`
/// per line, topic entity in square brackets. Brackets are removed from the
/// question. An optional third field tags the hop count.
pub fn load_metaqa(text: &str) -> Result<Vec<QaExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let question = fields.next().unwrap_or_default();
        let answers = fields.next().ok_or_else(|| Error::parse(line_no, "expected `question<TAB>answers`"))?;
        let hop = match fields.next() {
            None => None,
            Some(h) => Some(
                h.trim()
                    .trim_end_matches("-hop")
                    .parse::<u8>()
                    .map_err(|_| Error::parse(line_no, format!("invalid hop tag `{h}`")))?,
            ),
        };
        if fields.next().is_some() {
            return Err(Error::parse(line_no, "too many fields"));
        }
        let gold: Vec<String> =
            answers.split('|').map(str::trim).filter(|a| !a.is_empty()).map(str::to_owned).collect();
        if gold.is_empty() {
            return Err(Error::parse(line_no, "empty answer list"));
        }
        let question: String = question.chars().filter(|&c| c != '[' && c != ']').collect();
        out.push(QaExample { question: question.trim().to_owned(), gold, hop });
    }
    Ok(out)
}

/// Up to `limit` examples chosen uniformly with `seed`, in file order.
pub fn sample(examples: &[QaExample], limit: usize, seed: u64) -> Vec<QaExample> {
    if limit >= examples.len() {
        return examples.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, examples.len(), limit).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| examples[i].clone()).collect()
}

/// Case-insensitive occurrence of `needle` in `haystack` not flanked by
/// alphanumeric characters.
fn contains_on_boundary(haystack: &str, needle: &str) -> bool {
    let h = haystack.to_lowercase();
    let n = needle.trim().to_lowercase();
    if n.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(pos) = h[from..].find(&n) {
        let start = from + pos;
        let end = start + n.len();
        let before = h[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        let after = h[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        if before && after {
            return true;
        }
        from = start + h[start..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// 1 if any gold entity occurs in the response on token boundaries; 0 for
/// abstentions.
pub fn hits_at_1<S: AsRef<str>>(response: &str, gold: &[S]) -> u8 {
    if is_abstention(response) {
        return 0;
    }
    u8::from(gold.iter().any(|g| contains_on_boundary(response, g.as_ref())))
}

/// 0 if abstained, 1 on an exact hit, -1 otherwise.
pub fn score_exact<S: AsRef<str>>(response: &str, gold: &[S], abstained: bool) -> i8 {
    if abstained {
        0
    } else if hits_at_1(response, gold) == 1 {
        1
    } else {
        -1
    }
}

/// Scores a response as 1 (accurate), 0 (missing) or -1 (hallucinated).
pub trait Judge: Send + Sync {
    fn judge(&self, question: &str, gold: &[String], response: &str, abstained: bool) -> i8;
}

/// The built-in judge: [`score_exact`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactMatchJudge;

impl Judge for ExactMatchJudge {
    fn judge(&self, _question: &str, gold: &[String], response: &str, abstained: bool) -> i8 {
        score_exact(response, gold, abstained)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub question: String,
    pub gold: Vec<String>,
    pub hop: Option<u8>,
    pub response: String,
    pub abstained: bool,
    pub score: i8,
    pub hit_at_1: u8,
}

impl EvalRecord {
    pub fn new(example: &QaExample, response: &str, abstained: bool, judge: &dyn Judge) -> Self {
        let score = if abstained { 0 } else { judge.judge(&example.question, &example.gold, response, abstained) };
        Self {
            question: example.question.clone(),
            gold: example.gold.clone(),
            hop: example.hop,
            response: response.to_owned(),
            abstained,
            score,
            hit_at_1: if abstained { 0 } else { hits_at_1(response, &example.gold) },
        }
    }
}

pub type Rate = Ratio<i64>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub total: i64,
    pub accurate: i64,
    pub hallucinated: i64,
    pub missing: i64,
    pub hits: i64,
}

impl Counts {
    fn add(&mut self, r: &EvalRecord) {
        self.total += 1;
        match r.score {
            1 => self.accurate += 1,
            -1 => self.hallucinated += 1,
            _ => self.missing += 1,
        }
        self.hits += i64::from(r.hit_at_1);
    }

    fn rate(&self, n: i64) -> Rate {
        Ratio::new(n, self.total.max(1))
    }

    pub fn accuracy(&self) -> Rate {
        self.rate(self.accurate)
    }

    pub fn hallucination(&self) -> Rate {
        self.rate(self.hallucinated)
    }

    pub fn missing_rate(&self) -> Rate {
        self.rate(self.missing)
    }

    pub fn truthfulness(&self) -> Rate {
        self.accuracy() - self.hallucination()
    }

    pub fn hits_at_1(&self) -> Rate {
        self.rate(self.hits)
    }
}

fn percent(r: Rate) -> f64 {
    *r.numer() as f64 * 100.0 / *r.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatencySummary {
    pub mean_secs: f64,
    pub median_secs: f64,
}

impl LatencySummary {
    pub fn from_durations(d: &[Duration]) -> Option<Self> {
        if d.is_empty() {
            return None;
        }
        let mut secs: Vec<f64> = d.iter().map(Duration::as_secs_f64).collect();
        secs.sort_by(f64::total_cmp);
        let n = secs.len();
        let median = if n % 2 == 1 { secs[n / 2] } else { (secs[n / 2 - 1] + secs[n / 2]) / 2.0 };
        Some(Self { mean_secs: secs.iter().sum::<f64>() / n as f64, median_secs: median })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub overall: Counts,
    /// Keyed by hop tag; untagged examples under `None`.
    pub per_hop: BTreeMap<Option<u8>, Counts>,
    pub latency: Option<LatencySummary>,
}

/// One machine-readable line of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportLine {
    pub scope: String,
    #[serde(flatten)]
    pub counts: Counts,
    pub accuracy_pct: f64,
    pub hallucination_pct: f64,
    pub missing_pct: f64,
    pub truthfulness_pct: f64,
    pub hits_at_1_pct: f64,
}

impl ReportLine {
    fn new(scope: String, c: &Counts) -> Self {
        Self {
            scope,
            counts: *c,
            accuracy_pct: percent(c.accuracy()),
            hallucination_pct: percent(c.hallucination()),
            missing_pct: percent(c.missing_rate()),
            truthfulness_pct: percent(c.truthfulness()),
            hits_at_1_pct: percent(c.hits_at_1()),
        }
    }
}

fn hop_scope(hop: Option<u8>) -> String {
    hop.map_or_else(|| "untagged".to_owned(), |h| format!("{h}-hop"))
}

pub fn aggregate(records: &[EvalRecord]) -> Result<Report> {
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut overall = Counts::default();
    let mut per_hop: BTreeMap<Option<u8>, Counts> = BTreeMap::new();
    for r in records {
        overall.add(r);
        per_hop.entry(r.hop).or_default().add(r);
    }
    Ok(Report { overall, per_hop, latency: None })
}

impl Report {
    /// Overall line followed by one line per hop group. Latency is left out
    /// so the output is reproducible.
    pub fn lines(&self) -> Vec<ReportLine> {
        std::iter::once(ReportLine::new("all".into(), &self.overall))
            .chain(self.per_hop.iter().map(|(h, c)| ReportLine::new(hop_scope(*h), c)))
            .collect()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for line in self.lines() {
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            "scope", "n", "acc%", "halluc%", "miss%", "truth%", "hits@1%"
        );
        for l in self.lines() {
            let _ = writeln!(
                out,
                "{:<10} {:>6} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
                l.scope, l.counts.total, l.accuracy_pct, l.hallucination_pct, l.missing_pct, l.truthfulness_pct, l.hits_at_1_pct
            );
        }
        if let Some(lat) = self.latency {
            let _ = writeln!(out, "latency: mean {:.3}s, median {:.3}s", lat.mean_secs, lat.median_secs);
        }
        out
    }
}
