//! Fixtures and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code paths it checks.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termspan::corpus::{Sentence, SentencePair, TermPair};
use termspan::matcher::{MatchedCorpus, MatchedSentence, TermAnnotation};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

pub fn term_of_len(n: usize) -> TermPair {
    let t: Vec<String> = (0..n).map(|i| format!("t{n}_{i}")).collect();
    TermPair::new(Sentence::new(t.clone()).unwrap(), Sentence::new(t).unwrap(), None)
}

pub fn matched(id: u64, target: &str, ngram: usize) -> MatchedSentence {
    MatchedSentence::new(
        SentencePair {
            id,
            source: Sentence::parse(&format!("quelle {id}")).unwrap(),
            target: Sentence::parse(target).unwrap(),
        },
        vec![TermAnnotation::new(term_of_len(ngram), 1)],
    )
    .unwrap()
}

/// Corpus with the given `(max_ngram, count)` buckets and unique targets.
pub fn bucketed_corpus(buckets: &[(usize, usize)]) -> MatchedCorpus {
    let mut sentences = Vec::new();
    let mut id = 0u64;
    for &(k, count) in buckets {
        for _ in 0..count {
            sentences.push(matched(id, &format!("satz nummer {id}"), k));
            id += 1;
        }
    }
    MatchedCorpus { sentences, dictionary: None }
}

/// Overwrites the targets of `planted` randomly chosen sentences with the
/// target of another random sentence, so duplicates may span buckets.
pub fn plant_duplicates(mc: &mut MatchedCorpus, planted: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mc.sentences.len();
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let (copies, originals) = order.split_at(planted);
    let mut changed = Vec::new();
    for &c in copies {
        let o = originals[rng.random_range(0..originals.len())];
        mc.sentences[c].pair.target = mc.sentences[o].pair.target.clone();
        changed.push(mc.sentences[c].pair.id);
    }
    changed
}

/// Leftmost window of live tokens equal to `needle`, found by enumerating
/// every (start, end) pair.
pub fn brute_find(slots: &[Option<String>], needle: &[String]) -> Option<usize> {
    let n = slots.len();
    let mut best = None;
    for start in 0..n {
        for end in start + 1..=n {
            let window = &slots[start..end];
            let equal = window.len() == needle.len()
                && window
                    .iter()
                    .zip(needle)
                    .all(|(s, t)| s.as_deref() == Some(t.as_str()));
            if equal && best.is_none_or(|b| start < b) {
                best = Some(start);
            }
        }
    }
    best
}

pub fn slots(tokens: &[String]) -> Vec<Option<String>> {
    tokens.iter().cloned().map(Some).collect()
}

/// Reference single-pass matcher over an already ordered entry list.
/// Returns `(entry index, consumed target positions, consumed source positions)`.
pub fn oracle_match(
    source: &[String],
    target: &[String],
    entries: &[(Vec<String>, Vec<String>)],
) -> Vec<(usize, Vec<usize>, Vec<usize>)> {
    let mut src = slots(source);
    let mut tgt = slots(target);
    let mut out = Vec::new();
    for (e, (es, et)) in entries.iter().enumerate() {
        let (Some(t), Some(s)) = (brute_find(&tgt, et), brute_find(&src, es)) else {
            continue;
        };
        let tp: Vec<usize> = (t..t + et.len()).collect();
        let sp: Vec<usize> = (s..s + es.len()).collect();
        for &i in &tp {
            tgt[i] = None;
        }
        for &i in &sp {
            src[i] = None;
        }
        out.push((e, tp, sp));
    }
    out
}

/// Longest sub-n-gram of `term` (length >= 2) present contiguously in `hyp`,
/// by enumerating every sub-n-gram and every hypothesis window.
pub fn oracle_lsm2(hyp: &[String], term: &[String]) -> f64 {
    let l = term.len();
    let mut best = 0;
    for i in 0..l {
        for j in i + 2..=l {
            let sub = &term[i..j];
            let present = (0..hyp.len())
                .any(|s| s + sub.len() <= hyp.len() && &hyp[s..s + sub.len()] == sub);
            if present {
                best = best.max(sub.len());
            }
        }
    }
    if best >= 2 {
        best as f64 / l as f64
    } else {
        0.0
    }
}

/// Reference term usage for one sentence: terms checked longest first
/// (characters, then target, then source text), each hit consuming its
/// tokens. Returns `(l, hit)` per term instance.
pub fn oracle_term_hits(hyp: &[String], terms: &[(Vec<String>, Vec<String>)]) -> Vec<(usize, bool)> {
    let mut order: Vec<&(Vec<String>, Vec<String>)> = terms.iter().collect();
    let chars = |t: &[String]| t.iter().map(|x| x.chars().count()).sum::<usize>();
    order.sort_by(|a, b| {
        chars(&b.1)
            .cmp(&chars(&a.1))
            .then_with(|| a.1.join(" ").cmp(&b.1.join(" ")))
            .then_with(|| a.0.join(" ").cmp(&b.0.join(" ")))
    });
    let mut work = slots(hyp);
    order
        .into_iter()
        .map(|(_, t)| {
            let hit = match brute_find(&work, t) {
                Some(s) => {
                    work[s..s + t.len()].fill(None);
                    true
                }
                None => false,
            };
            (t.len(), hit)
        })
        .collect()
}

/// Largest-remainder apportionment of `n` seats in proportion to `weights`,
/// computed with exact integer arithmetic.
pub fn hamilton(n: u64, weights: &[u64]) -> Vec<u64> {
    let total: u64 = weights.iter().sum();
    let mut seats: Vec<u64> = weights.iter().map(|w| n * w / total).collect();
    let mut rems: Vec<(u64, usize)> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (n * w % total, i))
        .collect();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = n - seats.iter().sum::<u64>();
    for &(_, i) in rems.iter().take(left as usize) {
        seats[i] += 1;
    }
    seats
}

/// Random hypothesis/reference pair over a small vocabulary so that exact and
/// partial term hits are frequent.
pub fn random_eval_instance(rng: &mut ChaCha8Rng, id: u64) -> termspan::metrics::EvalInstance {
    const VOCAB: [&str; 6] = ["a", "bb", "c", "dd", "e", "ff"];
    let word = |rng: &mut ChaCha8Rng| VOCAB[rng.random_range(0..VOCAB.len())].to_string();
    let hyp_len = rng.random_range(0..=15);
    let hyp: Vec<String> = (0..hyp_len).map(|_| word(rng)).collect();
    let n_terms = rng.random_range(1..5);
    let mut annotations: Vec<TermAnnotation> = Vec::new();
    for _ in 0..n_terms {
        let l = rng.random_range(1..=6);
        let t: Vec<String> = (0..l).map(|_| word(rng)).collect();
        let term = TermPair::new(Sentence::parse("quelle").unwrap(), Sentence::new(t).unwrap(), None);
        if annotations.iter().any(|a| a.term == term) {
            continue;
        }
        annotations.push(TermAnnotation::new(term, rng.random_range(1..3)));
    }
    let target: Vec<String> = annotations
        .iter()
        .flat_map(|a| a.term.target_term.tokens().to_vec())
        .collect();
    let reference = MatchedSentence::new(
        SentencePair {
            id,
            source: Sentence::parse("quelle").unwrap(),
            target: Sentence::new(target).unwrap(),
        },
        annotations,
    )
    .unwrap();
    termspan::metrics::EvalInstance {
        hypothesis: hyp,
        reference,
    }
}

pub struct OracleMetrics {
    /// `(matched, total)` for overall, l = 1, l = 2 and l > 2.
    pub overall: (usize, usize),
    pub b1: (usize, usize),
    pub b2: (usize, usize),
    pub gt2: (usize, usize),
    pub lsm_scores: Vec<f64>,
}

pub fn oracle_metrics(instances: &[termspan::metrics::EvalInstance]) -> OracleMetrics {
    let mut m = OracleMetrics {
        overall: (0, 0),
        b1: (0, 0),
        b2: (0, 0),
        gt2: (0, 0),
        lsm_scores: Vec::new(),
    };
    for inst in instances {
        let mut terms = Vec::new();
        for a in &inst.reference.annotations {
            for _ in 0..a.count_in_sentence {
                terms.push((
                    a.term.source_term.tokens().to_vec(),
                    a.term.target_term.tokens().to_vec(),
                ));
            }
        }
        for (l, hit) in oracle_term_hits(&inst.hypothesis, &terms) {
            let slot = match l {
                1 => &mut m.b1,
                2 => &mut m.b2,
                _ => &mut m.gt2,
            };
            for c in [slot, &mut m.overall] {
                c.0 += hit as usize;
                c.1 += 1;
            }
        }
        for (_, t) in &terms {
            if t.len() > 2 {
                m.lsm_scores.push(oracle_lsm2(&inst.hypothesis, t));
            }
        }
    }
    m
}

pub fn binary() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_termspan"))
}

/// Runs every subcommand on the bundled fixture inside `dir`, using paths
/// relative to it so manifests do not depend on where `dir` lives.
pub fn run_pipeline(dir: &std::path::Path, threads: usize) {
    for f in ["fixture.de", "fixture.en", "dict.tsv", "logprobs.jsonl"] {
        std::fs::copy(fixture(f), dir.join(f)).unwrap();
    }
    let steps: &[&[&str]] = &[
        &["match", "--src", "fixture.de", "--tgt", "fixture.en", "--dict", "dict.tsv", "--out", "match/m.jsonl"],
        &["split", "--matched", "match/m.jsonl", "--out-dir", "split", "--heldout-size", "10"],
        &["corrupt", "--matched", "match/m.jsonl", "--out", "corrupt/c.jsonl"],
        &["stats", "--matched", "match/m.jsonl", "--out-dir", "stats"],
        &["eval", "--matched", "split/test.jsonl", "--hyp", "split/test.tgt", "--out-dir", "eval", "--per-sentence"],
        &["loss", "--records", "logprobs.jsonl", "--out", "loss/loss.json", "--per-token"],
        &["unique-test", "--train", "split/train.jsonl", "--valid", "split/valid.jsonl", "--test", "split/test.jsonl", "--out", "unique/test.jsonl"],
    ];
    for args in steps {
        let out = binary()
            .current_dir(dir)
            .args(*args)
            .args(["--seed", "42", "--threads", &threads.to_string()])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

/// Every file under `dir` with its contents, keyed by relative path.
pub fn tree(dir: &std::path::Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}
