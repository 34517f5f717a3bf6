//! Corpus statistics, most frequent terms and term n-gram histograms.
//! Term counts are annotation instances (an annotation with count 2 counts
//! twice).

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::MatchedCorpus;

/// Histogram bins always present, even when empty.
pub const HISTOGRAM_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_sentences: usize,
    pub avg_words_src: f64,
    pub avg_words_tgt: f64,
    pub n_terms: usize,
    pub avg_terms_per_sent: f64,
    pub unique_terms_src: usize,
    pub unique_terms_tgt: usize,
}

pub fn corpus_stats(mc: &MatchedCorpus) -> Result<CorpusStats> {
    if mc.is_empty() {
        return Err(Error::Validation("no sentences to describe".into()));
    }
    let n = mc.len();
    let src_words: usize = mc.sentences.iter().map(|s| s.pair.source.len()).sum();
    let tgt_words: usize = mc.sentences.iter().map(|s| s.pair.target.len()).sum();
    let mut n_terms = 0;
    let mut src_terms = HashSet::new();
    let mut tgt_terms = HashSet::new();
    for a in mc.sentences.iter().flat_map(|s| &s.annotations) {
        n_terms += a.count_in_sentence;
        src_terms.insert(a.term.source_term.tokens());
        tgt_terms.insert(a.term.target_term.tokens());
    }
    Ok(CorpusStats {
        n_sentences: n,
        avg_words_src: src_words as f64 / n as f64,
        avg_words_tgt: tgt_words as f64 / n as f64,
        n_terms,
        avg_terms_per_sent: n_terms as f64 / n as f64,
        unique_terms_src: src_terms.len(),
        unique_terms_tgt: tgt_terms.len(),
    })
}

/// The `k` most frequent target terms; ties sorted by term.
pub fn top_terms(mc: &MatchedCorpus, k: usize) -> Result<Vec<(String, usize)>> {
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for a in mc.sentences.iter().flat_map(|s| &s.annotations) {
        *counts.entry(a.term.target_term.joined()).or_default() += a.count_in_sentence;
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(k);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramHistogram {
    pub counts: BTreeMap<usize, usize>,
}

impl NgramHistogram {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count\n");
        for (n, c) in &self.counts {
            out.push_str(&format!("{n},{c}\n"));
        }
        out
    }
}

pub fn ngram_histogram(mc: &MatchedCorpus) -> NgramHistogram {
    let mut counts: BTreeMap<usize, usize> = (1..=HISTOGRAM_MAX_N).map(|n| (n, 0)).collect();
    for a in mc.sentences.iter().flat_map(|s| &s.annotations) {
        *counts.entry(a.target_ngram).or_default() += a.count_in_sentence;
    }
    NgramHistogram { counts }
}

pub fn top_terms_tsv(terms: &[(String, usize)]) -> String {
    terms.iter().map(|(t, c)| format!("{t}\t{c}\n")).collect()
}
