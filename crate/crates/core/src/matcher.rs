//! Dictionary term matching with replace-once consumption.
//!
//! Entries are tried in dictionary order (longest target first). An entry
//! matches a sentence pair when its target tokens occur contiguously in the
//! working target and its source tokens occur contiguously in the working
//! source; the leftmost occurrence on each side is then consumed, so a
//! shorter term nested inside an already matched longer one cannot match
//! again.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consume::WorkingTokens;
use crate::corpus::{Sentence, SentencePair, TermDictionary, TermPair};
use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchOptions {
    /// Compare tokens after lowercasing both sides.
    pub casefold: bool,
    /// Rescan the dictionary until no entry matches, counting repeats.
    pub multi_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermAnnotation {
    pub term: TermPair,
    pub target_ngram: usize,
    pub count_in_sentence: usize,
}

impl TermAnnotation {
    pub fn new(term: TermPair, count_in_sentence: usize) -> Self {
        TermAnnotation {
            target_ngram: term.target_ngram,
            term,
            count_in_sentence,
        }
    }
}

/// A sentence pair with at least one matched term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedSentence {
    pub pair: SentencePair,
    pub annotations: Vec<TermAnnotation>,
    pub max_ngram: usize,
}

impl MatchedSentence {
    pub fn new(pair: SentencePair, annotations: Vec<TermAnnotation>) -> Result<Self> {
        let max_ngram = annotations
            .iter()
            .map(|a| a.target_ngram)
            .max()
            .ok_or_else(|| {
                Error::Validation(format!("sentence {} has no term annotations", pair.id))
            })?;
        Ok(MatchedSentence {
            pair,
            annotations,
            max_ngram,
        })
    }

    pub fn id(&self) -> u64 {
        self.pair.id
    }

    pub fn target(&self) -> &Sentence {
        &self.pair.target
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchedCorpus {
    pub sentences: Vec<MatchedSentence>,
    /// The dictionary the corpus was matched with, when known. Corpora read
    /// back from JSONL carry only the per-sentence terms.
    pub dictionary: Option<TermDictionary>,
}

impl MatchedCorpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&MatchedSentence> {
        self.sentences.iter().find(|s| s.id() == id)
    }
}

/// One consumed occurrence, in positions of the original sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMatch {
    pub entry: usize,
    pub source_span: Range<usize>,
    pub target_span: Range<usize>,
}

/// Dictionary prepared for repeated matching: normalized token lists and an
/// index from first target token to entries, so each sentence only visits
/// entries that can possibly occur in it.
pub struct TermIndex<'d> {
    dict: &'d TermDictionary,
    options: MatchOptions,
    sources: Vec<Vec<String>>,
    targets: Vec<Vec<String>>,
    by_first_token: HashMap<String, Vec<usize>>,
}

fn normalize<'a>(tokens: &'a [String], casefold: bool) -> Cow<'a, [String]> {
    if casefold {
        Cow::Owned(tokens.iter().map(|t| t.to_lowercase()).collect())
    } else {
        Cow::Borrowed(tokens)
    }
}

impl<'d> TermIndex<'d> {
    pub fn new(dict: &'d TermDictionary, options: MatchOptions) -> Self {
        let norm = |s: &Sentence| normalize(s.tokens(), options.casefold).into_owned();
        let sources: Vec<_> = dict.iter().map(|t| norm(&t.source_term)).collect();
        let targets: Vec<_> = dict.iter().map(|t| norm(&t.target_term)).collect();
        let mut by_first_token: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in targets.iter().enumerate() {
            by_first_token.entry(t[0].clone()).or_default().push(i);
        }
        TermIndex {
            dict,
            options,
            sources,
            targets,
            by_first_token,
        }
    }

    pub fn dictionary(&self) -> &'d TermDictionary {
        self.dict
    }

    fn candidates(&self, target: &[String]) -> Vec<usize> {
        let mut seen = HashSet::new();
        let mut out: Vec<usize> = target
            .iter()
            .filter(|t| seen.insert(t.as_str()))
            .filter_map(|t| self.by_first_token.get(t))
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out
    }

    /// Every consumed occurrence, in the order the matches were made.
    pub fn scan(&self, pair: &SentencePair) -> Vec<TermMatch> {
        let src = normalize(pair.source.tokens(), self.options.casefold);
        let tgt = normalize(pair.target.tokens(), self.options.casefold);
        let candidates = self.candidates(&tgt);
        let mut src_work = WorkingTokens::new(&src);
        let mut tgt_work = WorkingTokens::new(&tgt);
        let mut matches = Vec::new();

        loop {
            let before = matches.len();
            for &entry in &candidates {
                let (Some(t), Some(s)) = (
                    tgt_work.find(&self.targets[entry]),
                    src_work.find(&self.sources[entry]),
                ) else {
                    continue;
                };
                let target_span = t..t + self.targets[entry].len();
                let source_span = s..s + self.sources[entry].len();
                tgt_work.consume_range(target_span.clone());
                src_work.consume_range(source_span.clone());
                matches.push(TermMatch {
                    entry,
                    source_span,
                    target_span,
                });
            }
            if !self.options.multi_pass || matches.len() == before {
                break;
            }
        }
        matches
    }

    pub fn match_pair(&self, pair: &SentencePair) -> Option<MatchedSentence> {
        let matches = self.scan(pair);
        if matches.is_empty() {
            return None;
        }
        // One annotation per entry, in order of first match.
        let mut order: Vec<usize> = Vec::new();
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for m in &matches {
            let c = counts.entry(m.entry).or_insert(0);
            if *c == 0 {
                order.push(m.entry);
            }
            *c += 1;
        }
        let annotations = order
            .into_iter()
            .map(|e| TermAnnotation::new(self.dict.entries()[e].clone(), counts[&e]))
            .collect();
        Some(MatchedSentence::new(pair.clone(), annotations).expect("non-empty annotations"))
    }
}

/// Matches a single pair against `dict`. For whole corpora prefer
/// [`build_matched_corpus`], which indexes the dictionary once.
pub fn match_terms(
    pair: &SentencePair,
    dict: &TermDictionary,
    options: MatchOptions,
) -> Option<MatchedSentence> {
    TermIndex::new(dict, options).match_pair(pair)
}

/// Matches every pair and drops those without any term. Output order follows
/// the input regardless of how many worker threads are used.
pub fn build_matched_corpus(
    corpus: &[SentencePair],
    dict: &TermDictionary,
    options: MatchOptions,
) -> MatchedCorpus {
    let index = TermIndex::new(dict, options);
    let matched: Vec<Option<MatchedSentence>> =
        corpus.par_iter().map(|p| index.match_pair(p)).collect();
    MatchedCorpus {
        sentences: matched.into_iter().flatten().collect(),
        dictionary: Some(dict.clone()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct TermRecord {
    src: Sentence,
    tgt: Sentence,
    l: usize,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatchedRecord {
    id: u64,
    src: Sentence,
    tgt: Sentence,
    terms: Vec<TermRecord>,
    max_ngram: usize,
}

impl From<&MatchedSentence> for MatchedRecord {
    fn from(m: &MatchedSentence) -> Self {
        MatchedRecord {
            id: m.pair.id,
            src: m.pair.source.clone(),
            tgt: m.pair.target.clone(),
            terms: m
                .annotations
                .iter()
                .map(|a| TermRecord {
                    src: a.term.source_term.clone(),
                    tgt: a.term.target_term.clone(),
                    l: a.target_ngram,
                    count: a.count_in_sentence,
                })
                .collect(),
            max_ngram: m.max_ngram,
        }
    }
}

impl TryFrom<MatchedRecord> for MatchedSentence {
    type Error = String;

    fn try_from(r: MatchedRecord) -> std::result::Result<Self, String> {
        let mut annotations = Vec::with_capacity(r.terms.len());
        for t in r.terms {
            if t.l != t.tgt.len() {
                return Err(format!(
                    "term `{}` has l={} but {} tokens",
                    t.tgt,
                    t.l,
                    t.tgt.len()
                ));
            }
            if t.count == 0 {
                return Err(format!("term `{}` has count 0", t.tgt));
            }
            annotations.push(TermAnnotation::new(TermPair::new(t.src, t.tgt, None), t.count));
        }
        let pair = SentencePair {
            id: r.id,
            source: r.src,
            target: r.tgt,
        };
        let m = MatchedSentence::new(pair, annotations).map_err(|e| e.to_string())?;
        if m.max_ngram != r.max_ngram {
            return Err(format!(
                "max_ngram is {} but the longest term has {} tokens",
                r.max_ngram, m.max_ngram
            ));
        }
        Ok(m)
    }
}

pub fn save_matched(path: &Path, sentences: &[MatchedSentence]) -> Result<()> {
    let records: Vec<MatchedRecord> = sentences.iter().map(MatchedRecord::from).collect();
    jsonl::write(path, &records)
}

pub fn to_jsonl_line(sentence: &MatchedSentence) -> String {
    serde_json::to_string(&MatchedRecord::from(sentence)).expect("serializable record")
}

pub fn load_matched(path: &Path) -> Result<MatchedCorpus> {
    let records: Vec<MatchedRecord> = jsonl::read(path)?;
    let mut seen = HashSet::new();
    let mut sentences = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        let invalid = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if !seen.insert(r.id) {
            return Err(invalid(format!("duplicate id {}", r.id)));
        }
        sentences.push(MatchedSentence::try_from(r).map_err(invalid)?);
    }
    Ok(MatchedCorpus {
        sentences,
        dictionary: None,
    })
}
