//! Parallel corpora and bilingual term dictionaries: loading, validation,
//! filtering and serialization.
//!
//! All text is expected to be pre-tokenized. A line is split on runs of
//! whitespace and empty tokens are dropped, so `"a  b"` yields `["a", "b"]`.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty sequence of whitespace-free tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Sentence(Vec<String>);

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidSentence("sentence has no tokens".into()));
        }
        if let Some(bad) = tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(Error::InvalidSentence(format!(
                "token {bad:?} is empty or contains whitespace"
            )));
        }
        Ok(Sentence(tokens))
    }

    /// Tokenizes a line on whitespace runs. Fails if the line has no tokens.
    pub fn parse(line: &str) -> Result<Self> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        if tokens.is_empty() {
            return Err(Error::InvalidSentence("sentence has no tokens".into()));
        }
        Ok(Sentence(tokens))
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of characters, not counting token separators.
    pub fn char_count(&self) -> usize {
        self.0.iter().map(|t| t.chars().count()).sum()
    }

    pub fn joined(&self) -> String {
        self.0.join(" ")
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }
}

impl TryFrom<Vec<String>> for Sentence {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        Sentence::new(tokens)
    }
}

impl From<Sentence> for Vec<String> {
    fn from(s: Sentence) -> Self {
        s.0
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(tok)?;
        }
        Ok(())
    }
}

/// One aligned line of a parallel corpus. `id` is the zero-based line index
/// assigned at load time and is never renumbered afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: u64,
    pub source: Sentence,
    pub target: Sentence,
}

/// A bilingual dictionary entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermPair {
    pub source_term: Sentence,
    pub target_term: Sentence,
    pub source_chars: usize,
    pub target_chars: usize,
    pub target_ngram: usize,
    pub dict_id: Option<String>,
}

impl TermPair {
    pub fn new(source_term: Sentence, target_term: Sentence, dict_id: Option<String>) -> Self {
        TermPair {
            source_chars: source_term.char_count(),
            target_chars: target_term.char_count(),
            target_ngram: target_term.len(),
            source_term,
            target_term,
            dict_id,
        }
    }

    pub fn parse(source: &str, target: &str) -> Result<Self> {
        Ok(TermPair::new(
            Sentence::parse(source)?,
            Sentence::parse(target)?,
            None,
        ))
    }

    /// Dictionary order: longer target terms (in characters) first, then the
    /// target string, then the source string.
    pub fn dictionary_cmp(&self, other: &Self) -> Ordering {
        other
            .target_chars
            .cmp(&self.target_chars)
            .then_with(|| cmp_joined(self.target_term.tokens(), other.target_term.tokens()))
            .then_with(|| cmp_joined(self.source_term.tokens(), other.source_term.tokens()))
    }
}

// Compares token lists as if joined by single spaces, without allocating.
fn cmp_joined(a: &[String], b: &[String]) -> Ordering {
    joined_bytes(a).cmp(joined_bytes(b))
}

fn joined_bytes(tokens: &[String]) -> impl Iterator<Item = u8> + '_ {
    tokens.iter().enumerate().flat_map(|(i, t)| {
        let sep: &[u8] = if i == 0 { b"" } else { b" " };
        sep.iter().chain(t.as_bytes()).copied()
    })
}

/// A deduplicated, deterministically ordered list of term pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermDictionary {
    entries: Vec<TermPair>,
}

impl TermDictionary {
    /// Sorts `entries` into dictionary order and drops repeated
    /// (source, target) pairs, keeping the first occurrence.
    pub fn new(mut entries: Vec<TermPair>) -> Self {
        entries.sort_by(TermPair::dictionary_cmp);
        entries.dedup_by(|b, a| a.source_term == b.source_term && a.target_term == b.target_term);
        TermDictionary { entries }
    }

    pub fn entries(&self) -> &[TermPair] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TermPair> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<'a> IntoIterator for &'a TermDictionary {
    type Item = &'a TermPair;
    type IntoIter = std::slice::Iter<'a, TermPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads two line-aligned files into sentence pairs with ids `0..n`.
pub fn load_corpus(source_path: &Path, target_path: &Path) -> Result<Vec<SentencePair>> {
    let src = read_file(source_path)?;
    let tgt = read_file(target_path)?;
    parse_corpus(&src, &tgt, source_path, target_path)
}

/// In-memory counterpart of [`load_corpus`]; the paths are only used in
/// error messages.
pub fn parse_corpus(
    source_text: &str,
    target_text: &str,
    source_path: &Path,
    target_path: &Path,
) -> Result<Vec<SentencePair>> {
    let src: Vec<&str> = source_text.lines().collect();
    let tgt: Vec<&str> = target_text.lines().collect();
    if src.len() != tgt.len() {
        let missing = if src.len() < tgt.len() {
            source_path
        } else {
            target_path
        };
        return Err(Error::Alignment {
            line: src.len().min(tgt.len()) + 1,
            missing: missing.to_path_buf(),
        });
    }

    let parse = |line: &str, path: &Path, lineno: usize| {
        Sentence::parse(line).map_err(|_| Error::EmptyLine {
            path: path.to_path_buf(),
            line: lineno,
        })
    };

    src.iter()
        .zip(&tgt)
        .enumerate()
        .map(|(i, (s, t))| {
            Ok(SentencePair {
                id: i as u64,
                source: parse(s, source_path, i + 1)?,
                target: parse(t, target_path, i + 1)?,
            })
        })
        .collect()
}

/// Writes both sides, one sentence per line, tokens joined by single spaces.
pub fn save_corpus(pairs: &[SentencePair], source_path: &Path, target_path: &Path) -> Result<()> {
    write_lines(source_path, pairs.iter().map(|p| &p.source))?;
    write_lines(target_path, pairs.iter().map(|p| &p.target))
}

pub(crate) fn write_lines<'a>(
    path: &Path,
    sentences: impl IntoIterator<Item = &'a Sentence>,
) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for s in sentences {
        writeln!(out, "{s}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Loads a TSV dictionary: `source<TAB>target[<TAB>dict_id]`. Blank lines and
/// lines starting with `#` are skipped.
pub fn load_dictionary(path: &Path) -> Result<TermDictionary> {
    parse_dictionary(&read_file(path)?)
}

pub fn parse_dictionary(text: &str) -> Result<TermDictionary> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(Error::DictionaryFormat {
                row,
                message: format!("expected at least 2 tab-separated columns, found {}", cols.len()),
            });
        }
        let term = |col: &str, side: &str| {
            Sentence::parse(col).map_err(|_| Error::DictionaryFormat {
                row,
                message: format!("empty {side} term"),
            })
        };
        let dict_id = cols
            .get(2)
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::to_owned);
        entries.push(TermPair::new(
            term(cols[0], "source")?,
            term(cols[1], "target")?,
            dict_id,
        ));
    }
    Ok(TermDictionary::new(entries))
}

/// Pairs every source term with each of its translations.
pub fn expand_dictionary(raw: Vec<(Sentence, Vec<Sentence>)>) -> Result<TermDictionary> {
    let mut entries = Vec::new();
    for (source, targets) in raw {
        if targets.is_empty() {
            return Err(Error::Validation(format!(
                "source term `{source}` has no translations"
            )));
        }
        entries.extend(
            targets
                .into_iter()
                .map(|t| TermPair::new(source.clone(), t, None)),
        );
    }
    Ok(TermDictionary::new(entries))
}

/// Which side(s) the minimum character rule applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FilterSide {
    #[default]
    Target,
    Source,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionaryFilter {
    pub min_chars: usize,
    pub max_ngram: usize,
    pub side: FilterSide,
}

impl Default for DictionaryFilter {
    fn default() -> Self {
        DictionaryFilter {
            min_chars: 4,
            max_ngram: 20,
            side: FilterSide::Target,
        }
    }
}

impl DictionaryFilter {
    pub fn keeps(&self, term: &TermPair) -> bool {
        let chars_ok = match self.side {
            FilterSide::Target => term.target_chars >= self.min_chars,
            FilterSide::Source => term.source_chars >= self.min_chars,
            FilterSide::Both => {
                term.target_chars >= self.min_chars && term.source_chars >= self.min_chars
            }
        };
        chars_ok && term.target_ngram <= self.max_ngram
    }
}

pub fn filter_dictionary(dict: &TermDictionary, filter: &DictionaryFilter) -> TermDictionary {
    // Filtering a sorted, deduplicated list keeps it sorted and deduplicated.
    TermDictionary {
        entries: dict.iter().filter(|t| filter.keeps(t)).cloned().collect(),
    }
}

/// Keeps pairs whose source and target both have at most `max_tokens` tokens.
pub fn filter_corpus_by_length(corpus: &[SentencePair], max_tokens: usize) -> Vec<SentencePair> {
    corpus
        .iter()
        .filter(|p| p.source.len() <= max_tokens && p.target.len() <= max_tokens)
        .cloned()
        .collect()
}
