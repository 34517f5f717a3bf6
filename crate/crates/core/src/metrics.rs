//! Term-level evaluation of translation hypotheses.
//!
//! * Term usage rate: share of reference term instances found verbatim in the
//!   hypothesis. Terms of one sentence are checked longest first and each hit
//!   consumes its tokens, so a nested shorter term cannot reuse them.
//!   Reported for unigrams, bigrams and terms longer than two tokens, the
//!   latter both pooled (micro) and as the unweighted mean of per-length
//!   rates (macro).
//! * LSM-2: for terms longer than two tokens, the longest run of term tokens
//!   found contiguously in the hypothesis divided by the term length, or zero
//!   when that run is shorter than two tokens. Always read from the raw
//!   hypothesis.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consume::WorkingTokens;
use crate::corpus::TermPair;
use crate::error::{Error, Result};
use crate::matcher::{MatchedSentence, TermAnnotation};
use crate::objective::stable_sum;

/// A hypothesis paired with its term-annotated reference. Hypotheses may be
/// empty: a system can produce an empty line.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalInstance {
    pub hypothesis: Vec<String>,
    pub reference: MatchedSentence,
}

impl EvalInstance {
    pub fn new(hypothesis_line: &str, reference: MatchedSentence) -> Self {
        EvalInstance {
            hypothesis: hypothesis_line.split_whitespace().map(str::to_owned).collect(),
            reference,
        }
    }

    /// Annotations in checking order: longest target first.
    fn annotations_longest_first(&self) -> Vec<&TermAnnotation> {
        let mut a: Vec<&TermAnnotation> = self.reference.annotations.iter().collect();
        a.sort_by(|x, y| x.term.dictionary_cmp(&y.term));
        a
    }
}

/// Checks `term` against the working hypothesis and consumes its leftmost
/// occurrence on success.
pub fn term_matched(hyp: &mut WorkingTokens<'_>, term: &TermPair) -> bool {
    hyp.consume(term.target_term.tokens()).is_some()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RateCount {
    pub matched: usize,
    pub total: usize,
    /// Percentage; absent when `total` is 0.
    pub rate: Option<f64>,
}

impl RateCount {
    fn add(&mut self, hit: bool) {
        self.total += 1;
        self.matched += hit as usize;
    }

    fn finish(mut self) -> Self {
        self.rate = (self.total > 0).then(|| 100.0 * self.matched as f64 / self.total as f64);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermUsageReport {
    pub overall: RateCount,
    /// Keys `"1"`, `"2"` and `"gt2"`; `gt2` pools every longer term.
    pub per_bucket: BTreeMap<String, RateCount>,
    /// Unweighted mean of per-length rates over lengths > 2 with terms.
    pub gt2_macro: Option<f64>,
    /// Lengths > 2 only.
    pub per_n: BTreeMap<usize, RateCount>,
}

impl TermUsageReport {
    pub fn bucket(&self, key: &str) -> RateCount {
        self.per_bucket.get(key).copied().unwrap_or_default()
    }
}

fn bucket_key(n: usize) -> &'static str {
    match n {
        1 => "1",
        2 => "2",
        _ => "gt2",
    }
}

/// Per term instance outcome, for error analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermOutcome {
    pub id: u64,
    pub term: String,
    pub l: usize,
    pub matched: bool,
    pub lsm2: Option<f64>,
}

/// Exact-match outcomes for every term instance, in checking order.
pub fn term_outcomes(inst: &EvalInstance) -> Vec<TermOutcome> {
    let mut hyp = WorkingTokens::new(&inst.hypothesis);
    let mut out = Vec::new();
    for a in inst.annotations_longest_first() {
        for _ in 0..a.count_in_sentence {
            out.push(TermOutcome {
                id: inst.reference.id(),
                term: a.term.target_term.joined(),
                l: a.target_ngram,
                matched: term_matched(&mut hyp, &a.term),
                lsm2: (a.target_ngram > 2)
                    .then(|| longest_run_score(&inst.hypothesis, a.term.target_term.tokens())),
            });
        }
    }
    out
}

pub fn term_usage(instances: &[EvalInstance]) -> TermUsageReport {
    let mut overall = RateCount::default();
    let mut per_bucket: BTreeMap<String, RateCount> = ["1", "2", "gt2"]
        .iter()
        .map(|k| (k.to_string(), RateCount::default()))
        .collect();
    let mut per_n: BTreeMap<usize, RateCount> = BTreeMap::new();

    for inst in instances {
        let mut hyp = WorkingTokens::new(&inst.hypothesis);
        for a in inst.annotations_longest_first() {
            for _ in 0..a.count_in_sentence {
                let hit = term_matched(&mut hyp, &a.term);
                overall.add(hit);
                per_bucket
                    .get_mut(bucket_key(a.target_ngram))
                    .expect("bucket keys preset")
                    .add(hit);
                if a.target_ngram > 2 {
                    per_n.entry(a.target_ngram).or_default().add(hit);
                }
            }
        }
    }

    let per_n: BTreeMap<usize, RateCount> =
        per_n.into_iter().map(|(n, c)| (n, c.finish())).collect();
    let rates: Vec<f64> = per_n.values().filter_map(|c| c.rate).collect();
    let gt2_macro = (!rates.is_empty()).then(|| stable_sum(rates.iter().copied()) / rates.len() as f64);
    TermUsageReport {
        overall: overall.finish(),
        per_bucket: per_bucket.into_iter().map(|(k, c)| (k, c.finish())).collect(),
        gt2_macro,
        per_n,
    }
}

/// Length of the longest token run shared contiguously by `a` and `b`.
pub fn longest_common_run<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                0
            };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

fn longest_run_score<S: AsRef<str>>(hyp: &[S], term: &[String]) -> f64 {
    let run = longest_common_run(term, hyp);
    if run >= 2 {
        run as f64 / term.len() as f64
    } else {
        0.0
    }
}

pub fn lsm2<S: AsRef<str>>(hyp: &[S], term: &TermPair) -> Result<f64> {
    if term.target_ngram <= 2 {
        return Err(Error::LsmDomain {
            term: term.target_term.joined(),
            ngram: term.target_ngram,
        });
    }
    Ok(longest_run_score(hyp, term.target_term.tokens()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsmInstance {
    pub id: u64,
    pub term: String,
    pub l: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LsmReport {
    /// True when there was no term longer than two tokens to score.
    pub empty: bool,
    pub gt2_micro: Option<f64>,
    pub gt2_macro: Option<f64>,
    pub per_n: BTreeMap<usize, f64>,
    pub per_instance: Vec<LsmInstance>,
}

pub fn aggregate_lsm2(instances: &[EvalInstance]) -> LsmReport {
    let mut per_instance = Vec::new();
    for inst in instances {
        for a in inst.annotations_longest_first() {
            if a.target_ngram <= 2 {
                continue;
            }
            let score = lsm2(&inst.hypothesis, &a.term).expect("length checked");
            for _ in 0..a.count_in_sentence {
                per_instance.push(LsmInstance {
                    id: inst.reference.id(),
                    term: a.term.target_term.joined(),
                    l: a.target_ngram,
                    score,
                });
            }
        }
    }
    if per_instance.is_empty() {
        return LsmReport {
            empty: true,
            ..Default::default()
        };
    }

    let mean = |xs: &[f64]| stable_sum(xs.iter().copied()) / xs.len() as f64;
    let all: Vec<f64> = per_instance.iter().map(|i| i.score).collect();
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for i in &per_instance {
        by_n.entry(i.l).or_default().push(i.score);
    }
    let per_n: BTreeMap<usize, f64> = by_n.iter().map(|(&n, xs)| (n, mean(xs))).collect();
    let per_n_means: Vec<f64> = per_n.values().copied().collect();
    LsmReport {
        empty: false,
        gt2_micro: Some(mean(&all)),
        gt2_macro: Some(mean(&per_n_means)),
        per_n,
        per_instance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, SentencePair};

    fn term(tgt: &str) -> TermPair {
        TermPair::parse("quelle", tgt).unwrap()
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn instance(id: u64, hyp: &str, terms: &[&str]) -> EvalInstance {
        let reference = MatchedSentence::new(
            SentencePair {
                id,
                source: Sentence::parse("quelle").unwrap(),
                target: Sentence::parse(&terms.join(" ")).unwrap(),
            },
            terms.iter().map(|t| TermAnnotation::new(term(t), 1)).collect(),
        )
        .unwrap();
        EvalInstance::new(hyp, reference)
    }

    #[test]
    fn exact_match_and_consumption() {
        let hyp = toks("the public officer arrived");
        let mut w = WorkingTokens::new(&hyp);
        assert!(term_matched(&mut w, &term("public officer")));
        assert!(!term_matched(&mut w, &term("officer")));
        let mut w = WorkingTokens::new(&hyp);
        assert!(!term_matched(&mut w, &term("court")));
    }

    #[test]
    fn nested_term_needs_its_own_occurrence() {
        let inst = instance(0, "water for injection", &["water for injection", "injection"]);
        let r = term_usage(&[inst]);
        assert_eq!(r.overall.matched, 1);
        assert_eq!(r.overall.total, 2);
    }

    #[test]
    fn all_terms_present() {
        let r = term_usage(&[instance(0, "a court and the Council of Europe", &["court", "Council of Europe"])]);
        assert_eq!(r.overall.rate, Some(100.0));
        assert_eq!(r.bucket("1").rate, Some(100.0));
        assert_eq!(r.bucket("gt2").rate, Some(100.0));
        assert_eq!(r.bucket("2").rate, None);
    }

    #[test]
    fn two_of_three_terms() {
        let r = term_usage(&[instance(0, "court market", &["court", "market", "tribunal"])]);
        let rate = r.overall.rate.unwrap();
        assert!((rate - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(format!("{rate:.2}"), "66.67");
    }

    #[test]
    fn micro_versus_macro_for_long_terms() {
        let insts = [
            instance(0, "a b c", &["a b c"]),
            instance(1, "d e f", &["d e f"]),
            instance(2, "nothing", &["v w x y z"]),
        ];
        let r = term_usage(&insts);
        let gt2 = r.bucket("gt2");
        assert_eq!((gt2.matched, gt2.total), (2, 3));
        assert!((gt2.rate.unwrap() - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.gt2_macro, Some(50.0));
    }

    #[test]
    fn lsm2_examples() {
        let t = term("water for injection");
        let s = lsm2(&toks("use water for the injection"), &t).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(lsm2(&toks("water for injection"), &t).unwrap(), 1.0);
        assert_eq!(lsm2(&toks("injection of water"), &t).unwrap(), 0.0);
        assert!(matches!(lsm2(&toks("x"), &term("public officer")), Err(Error::LsmDomain { .. })));
    }

    #[test]
    fn lsm2_aggregation() {
        let insts = [
            instance(0, "a b c", &["a b c"]),
            instance(1, "d e", &["d e f"]),
            instance(2, "p q", &["p q r s"]),
        ];
        let r = aggregate_lsm2(&insts);
        assert!(!r.empty);
        assert!((r.gt2_micro.unwrap() - (1.0 + 2.0 / 3.0 + 0.5) / 3.0).abs() < 1e-12);
        assert!((r.gt2_macro.unwrap() - ((1.0 + 2.0 / 3.0) / 2.0 + 0.5) / 2.0).abs() < 1e-12);

        let single = aggregate_lsm2(&[instance(0, "a b c", &["a b c"])]);
        assert_eq!((single.gt2_micro, single.gt2_macro), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn no_long_terms_is_empty_not_zero() {
        let r = aggregate_lsm2(&[instance(0, "a", &["court"])]);
        assert!(r.empty);
        assert_eq!(r.gt2_micro, None);
    }

    #[test]
    fn empty_hypothesis_scores_zero() {
        let inst = instance(0, "", &["a b c", "court"]);
        assert_eq!(term_usage(std::slice::from_ref(&inst)).overall.matched, 0);
        assert_eq!(aggregate_lsm2(&[inst]).gt2_micro, Some(0.0));
    }

    #[test]
    fn longest_common_run_cases() {
        assert_eq!(longest_common_run(&toks("a b c d"), &toks("x b c d y")), 3);
        assert_eq!(longest_common_run(&toks("a b"), &toks("b a")), 1);
        assert_eq!(longest_common_run::<String, String>(&[], &toks("a")), 0);
    }
}
