//! Target-side span corruption.
//!
//! Span lengths follow a geometric distribution clamped to
//! `[min_span, max_span]` and renormalized. Lengths are drawn until they
//! cover exactly `round(ratio * len)` positions, the last one trimmed to fit.
//! Each span is then placed at a uniform start position, treating the
//! sentence as a ring so that the first and last tokens are as likely to be
//! masked as any other; a span crossing the end is stored as two pieces. A
//! placement that overlaps an existing span is rejected and redrawn. Each
//! span gets one replacement kind: all `[MASK]`, random vocabulary tokens, or
//! left unchanged. Every covered position carries mask bit 1, whatever its
//! kind.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Rejected placements allowed per span before it falls back to the leftmost
/// free positions.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Mask,
    Random,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplaceProbs {
    pub mask: f64,
    pub random: f64,
    pub keep: f64,
}

impl Default for ReplaceProbs {
    fn default() -> Self {
        ReplaceProbs {
            mask: 0.8,
            random: 0.1,
            keep: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptionConfig {
    pub geometric_p: f64,
    pub max_span: usize,
    pub min_span: usize,
    pub ratio: f64,
    pub mask_token: String,
    pub replace_probs: ReplaceProbs,
    /// Candidates for random replacement. `mask_token` and `reserved` are
    /// never drawn.
    pub vocabulary: Vec<String>,
    pub reserved: Vec<String>,
    pub seed: u64,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            geometric_p: 0.2,
            max_span: 10,
            min_span: 1,
            ratio: 0.5,
            mask_token: "[MASK]".into(),
            replace_probs: ReplaceProbs::default(),
            vocabulary: Vec::new(),
            reserved: Vec::new(),
            seed: 42,
        }
    }
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let p = self.geometric_p;
        if !(p > 0.0 && p < 1.0) {
            return bad(format!("geometric_p must lie in (0, 1), got {p}"));
        }
        if self.min_span == 0 || self.min_span > self.max_span {
            return bad(format!(
                "span bounds must satisfy 1 <= min_span <= max_span, got [{}, {}]",
                self.min_span, self.max_span
            ));
        }
        if !(0.0..=1.0).contains(&self.ratio) {
            return bad(format!("ratio must lie in [0, 1], got {}", self.ratio));
        }
        let rp = self.replace_probs;
        if [rp.mask, rp.random, rp.keep].iter().any(|x| !(0.0..=1.0).contains(x))
            || (rp.mask + rp.random + rp.keep - 1.0).abs() > 1e-9
        {
            return bad(format!(
                "replacement probabilities must be in [0, 1] and sum to 1, got ({}, {}, {})",
                rp.mask, rp.random, rp.keep
            ));
        }
        if self.mask_token.is_empty() || self.mask_token.chars().any(char::is_whitespace) {
            return bad(format!("invalid mask token {:?}", self.mask_token));
        }
        Ok(())
    }

    /// Masked-position budget for a sentence of `len` tokens, rounding halves up.
    pub fn budget(&self, len: usize) -> usize {
        ((self.ratio * len as f64 + 0.5).floor() as usize).min(len)
    }
}

/// Clamped geometric span-length distribution: `P(L = l)` proportional to
/// `(1 - p)^(l - 1) * p` for `l` in `[min, max]`.
#[derive(Debug, Clone)]
pub struct SpanLengthSampler {
    min: usize,
    cdf: Vec<f64>,
}

impl SpanLengthSampler {
    pub fn new(p: f64, min: usize, max: usize) -> Self {
        // Weights relative to `min` so nothing underflows; the normalization
        // cancels the common factor.
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = (min..=max)
            .map(|l| {
                acc += (1.0 - p).powi((l - min) as i32);
                acc
            })
            .collect();
        for c in &mut cdf {
            *c /= acc;
        }
        SpanLengthSampler { min, cdf }
    }

    pub fn from_config(cfg: &CorruptionConfig) -> Self {
        SpanLengthSampler::new(cfg.geometric_p, cfg.min_span, cfg.max_span)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.min + i
    }

    /// `P(L = l)` for every `l` in `[min, max]`.
    pub fn probabilities(&self) -> Vec<(usize, f64)> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = c - prev;
                prev = c;
                (self.min + i, p)
            })
            .collect()
    }
}

pub fn sample_span_length<R: Rng + ?Sized>(rng: &mut R, cfg: &CorruptionConfig) -> usize {
    SpanLengthSampler::from_config(cfg).sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub len: usize,
    pub kind: SpanKind,
}

impl Span {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// One bit per target position; 1 marks a prediction target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MaskVector(pub Vec<u8>);

impl MaskVector {
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mask with a trailing 0 for the end-of-sequence position.
    pub fn with_eos(&self) -> MaskVector {
        let mut bits = self.0.clone();
        bits.push(0);
        MaskVector(bits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptedSequence {
    pub original: Sentence,
    pub corrupted: Sentence,
    pub mask: MaskVector,
    /// Sorted by start position.
    pub spans: Vec<Span>,
}

impl CorruptedSequence {
    /// Original tokens at the masked positions, in order.
    pub fn targets(&self) -> Vec<String> {
        self.original
            .tokens()
            .iter()
            .zip(&self.mask.0)
            .filter(|(_, &b)| b == 1)
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// Writes `targets` back into the masked positions of the corrupted
    /// sequence.
    pub fn restore(&self, targets: &[String]) -> Result<Sentence> {
        if targets.len() != self.mask.count() {
            return Err(Error::Validation(format!(
                "expected {} masked tokens, got {}",
                self.mask.count(),
                targets.len()
            )));
        }
        let mut fill = targets.iter();
        let tokens = self
            .corrupted
            .tokens()
            .iter()
            .zip(&self.mask.0)
            .map(|(t, &b)| {
                if b == 1 {
                    fill.next().expect("length checked").clone()
                } else {
                    t.clone()
                }
            })
            .collect();
        Sentence::new(tokens)
    }
}

/// Pieces of a span of `len` starting at `start` on a ring of `n` positions.
fn ring_pieces(start: usize, len: usize, n: usize) -> Vec<(usize, usize)> {
    if start + len <= n {
        vec![(start, len)]
    } else {
        vec![(start, n - start), (0, start + len - n)]
    }
}

/// The first `len` free positions, grouped into contiguous runs.
fn leftmost_free(taken: &[bool], len: usize) -> Vec<(usize, usize)> {
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for pos in (0..taken.len()).filter(|&i| !taken[i]).take(len) {
        match runs.last_mut() {
            Some((s, l)) if *s + *l == pos => *l += 1,
            _ => runs.push((pos, 1)),
        }
    }
    runs
}

/// Places every length without overlap; returns the pieces of each span.
fn place_spans<R: Rng + ?Sized>(n: usize, lengths: &[usize], rng: &mut R) -> Vec<Vec<(usize, usize)>> {
    let mut taken = vec![false; n];
    let mut out = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let free_at = |start: usize| (0..len).all(|i| !taken[(start + i) % n]);
        let pieces = (0..MAX_PLACEMENT_ATTEMPTS)
            .map(|_| rng.random_range(0..n))
            .find(|&start| free_at(start))
            .map(|start| ring_pieces(start, len, n))
            .unwrap_or_else(|| leftmost_free(&taken, len));
        for &(s, l) in &pieces {
            taken[s..s + l].fill(true);
        }
        out.push(pieces);
    }
    out
}

/// Corruption with the random-replacement pool prepared once.
#[derive(Debug, Clone)]
pub struct Corrupter {
    cfg: CorruptionConfig,
    lengths: SpanLengthSampler,
    pool: Vec<String>,
}

impl Corrupter {
    pub fn new(cfg: CorruptionConfig) -> Result<Self> {
        cfg.validate()?;
        let mut pool: Vec<String> = cfg
            .vocabulary
            .iter()
            .filter(|t| **t != cfg.mask_token && !cfg.reserved.contains(t))
            .filter(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
            .cloned()
            .collect();
        pool.sort();
        pool.dedup();
        if pool.is_empty() && cfg.replace_probs.random > 0.0 {
            return Err(Error::Config(
                "random replacement needs a non-empty vocabulary".into(),
            ));
        }
        Ok(Corrupter {
            lengths: SpanLengthSampler::from_config(&cfg),
            cfg,
            pool,
        })
    }

    pub fn config(&self) -> &CorruptionConfig {
        &self.cfg
    }

    fn kind<R: Rng + ?Sized>(&self, rng: &mut R) -> SpanKind {
        let u: f64 = rng.random();
        let rp = self.cfg.replace_probs;
        if u < rp.mask {
            SpanKind::Mask
        } else if u < rp.mask + rp.random {
            SpanKind::Random
        } else {
            SpanKind::Keep
        }
    }

    /// Span lengths drawn for `budget` masked positions, in draw order, until
    /// they reach the budget. Only the last may overshoot; [`Corrupter::corrupt`]
    /// trims it.
    pub fn draw_span_lengths<R: Rng + ?Sized>(&self, budget: usize, rng: &mut R) -> Vec<usize> {
        let mut out = Vec::new();
        let mut covered = 0;
        while covered < budget {
            let len = self.lengths.sample(rng);
            out.push(len);
            covered += len;
        }
        out
    }

    pub fn corrupt<R: Rng + ?Sized>(&self, y: &Sentence, rng: &mut R) -> Result<CorruptedSequence> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Validation("cannot corrupt an empty sentence".into()));
        }
        let budget = self.cfg.budget(n);
        let mut lengths = self.draw_span_lengths(budget, rng);
        let overshoot = lengths.iter().sum::<usize>() - budget;
        if let Some(last) = lengths.last_mut() {
            *last -= overshoot;
        }
        let mut tokens = y.tokens().to_vec();
        let mut mask = vec![0u8; n];
        let mut spans = Vec::new();
        for pieces in place_spans(n, &lengths, rng) {
            let kind = self.kind(rng);
            for (start, len) in pieces {
                for t in start..start + len {
                    mask[t] = 1;
                    match kind {
                        SpanKind::Mask => tokens[t] = self.cfg.mask_token.clone(),
                        SpanKind::Random => {
                            tokens[t] = self.pool[rng.random_range(0..self.pool.len())].clone()
                        }
                        SpanKind::Keep => {}
                    }
                }
                spans.push(Span { start, len, kind });
            }
        }
        spans.sort_unstable_by_key(|s| s.start);
        Ok(CorruptedSequence {
            original: y.clone(),
            corrupted: Sentence::new(tokens)?,
            mask: MaskVector(mask),
            spans,
        })
    }
}

/// One-off corruption; builds a [`Corrupter`] for `cfg`.
pub fn corrupt<R: Rng + ?Sized>(
    y: &Sentence,
    cfg: &CorruptionConfig,
    rng: &mut R,
) -> Result<CorruptedSequence> {
    Corrupter::new(cfg.clone())?.corrupt(y, rng)
}

/// JSONL layout: `{"id", "y", "y_tilde", "mask", "spans": [[start, len, kind]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionRecord {
    pub id: u64,
    pub y: Sentence,
    pub y_tilde: Sentence,
    pub mask: MaskVector,
    pub spans: Vec<(usize, usize, SpanKind)>,
}

impl CorruptionRecord {
    pub fn new(id: u64, c: &CorruptedSequence) -> Self {
        CorruptionRecord {
            id,
            y: c.original.clone(),
            y_tilde: c.corrupted.clone(),
            mask: c.mask.clone(),
            spans: c.spans.iter().map(|s| (s.start, s.len, s.kind)).collect(),
        }
    }
}
