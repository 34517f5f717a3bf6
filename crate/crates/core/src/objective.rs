//! Translation NLL, masked span prediction NLL and the gamma-weighted joint
//! loss, computed from per-position log-probabilities produced elsewhere.
//!
//! Each record covers `T + 1` positions: the `T` target tokens plus the
//! end-of-sequence prediction. Losses are per-sentence sums averaged over
//! sentences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated sum of values taken in ascending order, so the
/// result does not depend on the order of the input.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogProbRecord {
    pub id: u64,
    #[serde(rename = "lp")]
    pub translation_logprobs: Vec<f64>,
    #[serde(rename = "ssp_lp", default, skip_serializing_if = "Option::is_none")]
    pub ssp_logprobs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<u8>>,
}

impl LogProbRecord {
    fn invalid(&self, message: impl Into<String>) -> Error {
        Error::Record {
            id: self.id,
            message: message.into(),
        }
    }

    fn check_logprobs(&self, name: &str, lps: &[f64]) -> Result<()> {
        if let Some((t, x)) = lps
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x > 0.0)
        {
            return Err(self.invalid(format!(
                "{name}[{t}] = {x} is not a finite log-probability <= 0"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.translation_logprobs.is_empty() {
            return Err(self.invalid("no log-probabilities"));
        }
        self.check_logprobs("lp", &self.translation_logprobs)?;
        match (&self.ssp_logprobs, &self.mask) {
            (None, None) => Ok(()),
            (Some(_), None) => Err(self.invalid("ssp_lp given without mask")),
            (None, Some(_)) => Err(self.invalid("mask given without ssp_lp")),
            (Some(ssp), Some(mask)) => {
                self.check_logprobs("ssp_lp", ssp)?;
                if ssp.len() != self.translation_logprobs.len() || mask.len() != ssp.len() {
                    return Err(self.invalid(format!(
                        "length mismatch: lp {}, ssp_lp {}, mask {}",
                        self.translation_logprobs.len(),
                        ssp.len(),
                        mask.len()
                    )));
                }
                if mask.iter().any(|&b| b > 1) {
                    return Err(self.invalid("mask bits must be 0 or 1"));
                }
                Ok(())
            }
        }
    }

    pub fn n_masked(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(0, |m| m.iter().filter(|&&b| b == 1).count())
    }
}

/// `-sum_t log p(y_t | y_<t, x)`.
pub fn translation_nll(r: &LogProbRecord) -> Result<f64> {
    r.check_logprobs("lp", &r.translation_logprobs)?;
    Ok(-stable_sum(r.translation_logprobs.iter().copied()))
}

/// `-sum_t m_t log p(y_t | y~_<t, x)`; unmasked positions contribute nothing.
pub fn ssp_nll(r: &LogProbRecord) -> Result<f64> {
    r.validate()?;
    let (Some(ssp), Some(mask)) = (&r.ssp_logprobs, &r.mask) else {
        return Err(r.invalid("span prediction loss needs ssp_lp and mask"));
    };
    Ok(-stable_sum(
        ssp.iter().zip(mask).filter(|(_, &m)| m == 1).map(|(&lp, _)| lp),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossConfig {
    pub gamma: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { gamma: 0.5 }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Config(format!(
                "gamma must be a non-negative number, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Token-normalized view: translation NLL per predicted position and span
/// NLL per masked position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerTokenLoss {
    pub translation_nll: f64,
    pub ssp_nll: f64,
    pub total: f64,
    pub n_positions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    /// Mean per-sentence translation NLL.
    pub translation_nll: f64,
    /// Mean per-sentence span prediction NLL.
    pub ssp_nll: f64,
    pub total: f64,
    pub gamma: f64,
    pub n_sentences: usize,
    pub n_masked: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_token: Option<PerTokenLoss>,
}

/// Joint loss over `records`: `mean(translation) + gamma * mean(ssp)`.
///
/// With `gamma > 0` every record must carry span prediction log-probabilities.
/// With `gamma == 0` records without them count as zero span loss.
pub fn total_loss(records: &[LogProbRecord], cfg: &LossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    if records.is_empty() {
        return Err(Error::Validation("no log-probability records".into()));
    }
    let mut trans = Vec::with_capacity(records.len());
    let mut ssp = Vec::with_capacity(records.len());
    for r in records {
        r.validate()?;
        trans.push(translation_nll(r)?);
        ssp.push(match (&r.ssp_logprobs, cfg.gamma > 0.0) {
            (Some(_), _) => ssp_nll(r)?,
            (None, false) => 0.0,
            (None, true) => {
                return Err(r.invalid("gamma > 0 but the record has no ssp_lp/mask"))
            }
        });
    }
    let n = records.len() as f64;
    let sum_trans = stable_sum(trans.iter().copied());
    let sum_ssp = stable_sum(ssp.iter().copied());
    let translation_nll = sum_trans / n;
    let ssp_nll = sum_ssp / n;
    let n_masked: usize = records.iter().map(LogProbRecord::n_masked).sum();
    let n_positions: usize = records.iter().map(|r| r.translation_logprobs.len()).sum();

    let tok_trans = sum_trans / n_positions as f64;
    let tok_ssp = if n_masked > 0 {
        sum_ssp / n_masked as f64
    } else {
        0.0
    };
    Ok(LossBreakdown {
        translation_nll,
        ssp_nll,
        total: translation_nll + cfg.gamma * ssp_nll,
        gamma: cfg.gamma,
        n_sentences: records.len(),
        n_masked,
        per_token: Some(PerTokenLoss {
            translation_nll: tok_trans,
            ssp_nll: tok_ssp,
            total: tok_trans + cfg.gamma * tok_ssp,
            n_positions,
        }),
    })
}
