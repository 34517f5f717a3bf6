//! Terminology-aware train/valid/test split.
//!
//! Sentences are bucketed by the longest matched target term. Buckets are
//! processed from the longest n-gram down; each bucket receives per-split
//! quotas that keep the running allocation as close as possible to the
//! global ratio `(N - 2R, R, R)`. Duplicates (identical target token
//! sequences) are placed first, then the remaining sentences are shuffled
//! with a seeded stream and dealt round-robin.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcher::{MatchedCorpus, MatchedSentence};
use crate::seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DupMode {
    /// Copies of a duplicated sentence are spread across splits in proportion
    /// to the split sizes.
    Paper,
    /// All copies of a duplicated sentence go to the same split.
    #[default]
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub heldout_size: usize,
    pub seed: u64,
    pub dup_mode: DupMode,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            heldout_size: 3000,
            seed: 42,
            dup_mode: DupMode::Grouped,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self, corpus_size: usize) -> Result<()> {
        if 2 * self.heldout_size >= corpus_size {
            return Err(Error::Config(format!(
                "held-out size {} needs a corpus larger than {} sentences, got {}",
                self.heldout_size,
                2 * self.heldout_size,
                corpus_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Train = 0,
    Valid = 1,
    Test = 2,
}

impl Part {
    pub const ALL: [Part; 3] = [Part::Train, Part::Valid, Part::Test];

    pub fn name(self) -> &'static str {
        match self {
            Part::Train => "train",
            Part::Valid => "valid",
            Part::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl PartCounts {
    fn from_array(a: [usize; 3]) -> Self {
        PartCounts {
            train: a[0],
            valid: a[1],
            test: a[2],
        }
    }

    pub fn get(&self, part: Part) -> usize {
        match part {
            Part::Train => self.train,
            Part::Valid => self.valid,
            Part::Test => self.test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DuplicateReport {
    /// Ids sharing an identical target sentence, each group of size >= 2.
    pub groups: Vec<Vec<u64>>,
    pub unique_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub train: Vec<MatchedSentence>,
    pub valid: Vec<MatchedSentence>,
    pub test: Vec<MatchedSentence>,
    pub bucket_report: BTreeMap<usize, PartCounts>,
    pub seed_used: u64,
    pub dup_mode: DupMode,
    pub duplicate_groups: usize,
    pub duplicate_sentences: usize,
}

impl SplitResult {
    pub fn part(&self, part: Part) -> &[MatchedSentence] {
        match part {
            Part::Train => &self.train,
            Part::Valid => &self.valid,
            Part::Test => &self.test,
        }
    }

    pub fn sizes(&self) -> PartCounts {
        PartCounts::from_array([self.train.len(), self.valid.len(), self.test.len()])
    }

    pub fn report(&self, cfg: &SplitConfig) -> SplitReport {
        SplitReport {
            seed: self.seed_used,
            dup_mode: self.dup_mode,
            heldout_size: cfg.heldout_size,
            corpus_size: self.train.len() + self.valid.len() + self.test.len(),
            sizes: self.sizes(),
            buckets: self
                .bucket_report
                .iter()
                .map(|(&k, c)| BucketRow {
                    max_ngram: k,
                    train: c.train,
                    valid: c.valid,
                    test: c.test,
                })
                .collect(),
            duplicate_groups: self.duplicate_groups,
            duplicate_sentences: self.duplicate_sentences,
        }
    }
}

/// Serialized form written next to the split files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub seed: u64,
    pub dup_mode: DupMode,
    pub heldout_size: usize,
    pub corpus_size: usize,
    pub sizes: PartCounts,
    pub buckets: Vec<BucketRow>,
    pub duplicate_groups: usize,
    pub duplicate_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub max_ngram: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

/// Groups sentence ids by the length of their longest matched term.
pub fn bucketize(mc: &MatchedCorpus) -> Result<BTreeMap<usize, Vec<u64>>> {
    if mc.is_empty() {
        return Err(Error::Validation("cannot bucketize an empty corpus".into()));
    }
    let mut buckets: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for s in &mc.sentences {
        buckets.entry(s.max_ngram).or_default().push(s.id());
    }
    Ok(buckets)
}

pub fn duplicate_check(ids: &[u64], mc: &MatchedCorpus) -> DuplicateReport {
    let by_id: HashMap<u64, &MatchedSentence> = mc.sentences.iter().map(|s| (s.id(), s)).collect();
    group_by_target(ids, |id| by_id[&id].target().tokens())
}

fn group_by_target<'a>(ids: &[u64], target: impl Fn(u64) -> &'a [String]) -> DuplicateReport {
    let mut slot: HashMap<&[String], usize> = HashMap::new();
    let mut all: Vec<Vec<u64>> = Vec::new();
    for &id in ids {
        let key = target(id);
        let i = *slot.entry(key).or_insert_with(|| {
            all.push(Vec::new());
            all.len() - 1
        });
        all[i].push(id);
    }
    let (groups, singles): (Vec<_>, Vec<_>) = all.into_iter().partition(|g| g.len() > 1);
    DuplicateReport {
        groups,
        unique_ids: singles.into_iter().flatten().collect(),
    }
}

/// Splits `count` seats across three parts so that the running totals stay
/// close to `cumulative * targets / total`, never exceeding `caps`.
///
/// `used` is what each part already holds, `cumulative` the number of
/// sentences allocated once this bucket is placed. Rounding is
/// largest-remainder on exact integer arithmetic, so running totals stay
/// within one seat of ideal and a single bucket within two.
fn bucket_quotas(
    count: usize,
    cumulative: usize,
    total: usize,
    targets: [usize; 3],
    used: [usize; 3],
) -> [usize; 3] {
    let total_i = total as i128;
    let mut want = [0i128; 3];
    let mut base = [0i128; 3];
    let mut limit = [0i128; 3];
    for j in 0..3 {
        // want_j * total, the exact ideal share scaled by `total`
        want[j] = cumulative as i128 * targets[j] as i128 - used[j] as i128 * total_i;
        let cap = (targets[j] as i128 - used[j] as i128).max(0);
        limit[j] = cap.min(count as i128);
        base[j] = want[j].div_euclid(total_i).clamp(0, limit[j]);
    }
    let remainder = |j: usize, b: &[i128; 3]| want[j] - b[j] * total_i;

    let mut sum: i128 = base.iter().sum();
    while sum < count as i128 {
        let j = (0..3)
            .filter(|&j| base[j] < limit[j])
            .max_by(|&a, &b| remainder(a, &base).cmp(&remainder(b, &base)).then(b.cmp(&a)))
            .expect("capacity left for every remaining sentence");
        base[j] += 1;
        sum += 1;
    }
    while sum > count as i128 {
        let j = (0..3)
            .filter(|&j| base[j] > 0)
            .min_by(|&a, &b| remainder(a, &base).cmp(&remainder(b, &base)).then(b.cmp(&a)))
            .expect("a part with seats");
        base[j] -= 1;
        sum -= 1;
    }
    base.map(|b| b as usize)
}

/// Largest-remainder apportionment of `count` in proportion to `weights`,
/// bounded by `caps`.
fn apportion(count: usize, weights: [usize; 3], caps: [usize; 3]) -> [usize; 3] {
    let wsum: usize = weights.iter().sum();
    if wsum == 0 {
        return [0; 3];
    }
    let count = count.min(caps.iter().sum());
    let scaled = |j: usize| count as u128 * weights[j] as u128;
    let mut seats = [0usize; 3];
    for j in 0..3 {
        seats[j] = ((scaled(j) / wsum as u128) as usize).min(caps[j]);
    }
    let mut given: usize = seats.iter().sum();
    while given < count {
        let j = (0..3)
            .filter(|&j| seats[j] < caps[j])
            .max_by(|&a, &b| {
                let ra = scaled(a) as i128 - (seats[a] * wsum) as i128;
                let rb = scaled(b) as i128 - (seats[b] * wsum) as i128;
                ra.cmp(&rb).then(b.cmp(&a))
            })
            .expect("count bounded by total capacity");
        seats[j] += 1;
        given += 1;
    }
    seats
}

/// Deals `ids` round-robin over the parts that still have room in `remaining`.
fn deal_round_robin(ids: &[u64], remaining: &mut [i64; 3], out: &mut [Vec<u64>; 3]) {
    let mut j = 0usize;
    for &id in ids {
        let mut tries = 0;
        while remaining[j] <= 0 {
            j = (j + 1) % 3;
            tries += 1;
            assert!(tries <= 3, "quota exhausted before all sentences were dealt");
        }
        out[j].push(id);
        remaining[j] -= 1;
        j = (j + 1) % 3;
    }
}

pub fn split(mc: &MatchedCorpus, cfg: &SplitConfig) -> Result<SplitResult> {
    if mc.is_empty() {
        return Err(Error::Validation("cannot split an empty corpus".into()));
    }
    cfg.validate(mc.len())?;

    let total = mc.len();
    let r = cfg.heldout_size;
    let targets = [total - 2 * r, r, r];

    let by_id: HashMap<u64, &MatchedSentence> = mc.sentences.iter().map(|s| (s.id(), s)).collect();
    if by_id.len() != total {
        return Err(Error::Validation("sentence ids are not unique".into()));
    }
    let target_of = |id: u64| by_id[&id].target().tokens();

    let all_ids: Vec<u64> = mc.sentences.iter().map(|s| s.id()).collect();
    let global = group_by_target(&all_ids, target_of);
    let globally_duplicated: HashSet<&[String]> =
        global.groups.iter().map(|g| target_of(g[0])).collect();

    let buckets = bucketize(mc)?;
    let mut parts: [Vec<u64>; 3] = Default::default();
    let mut assigned: HashMap<&[String], usize> = HashMap::new();
    let mut bucket_report = BTreeMap::new();
    let mut cumulative = 0usize;

    for (&k, ids) in buckets.iter().rev() {
        cumulative += ids.len();
        let used = [parts[0].len(), parts[1].len(), parts[2].len()];
        let quotas = bucket_quotas(ids.len(), cumulative, total, targets, used);
        let mut remaining = quotas.map(|q| q as i64);
        let mut placed: [Vec<u64>; 3] = Default::default();

        let dups = group_by_target(ids, target_of);
        let uniques: Vec<u64> = match cfg.dup_mode {
            DupMode::Paper => {
                let dup_ids: Vec<u64> = dups.groups.iter().flatten().copied().collect();
                let dup_quota = apportion(dup_ids.len(), targets, quotas);
                let mut dup_remaining = dup_quota.map(|q| q as i64);
                deal_round_robin(&dup_ids, &mut dup_remaining, &mut placed);
                for j in 0..3 {
                    remaining[j] -= dup_quota[j] as i64;
                }
                dups.unique_ids
            }
            DupMode::Grouped => {
                let mut units: Vec<Vec<u64>> = dups.groups;
                let mut uniques = Vec::new();
                for id in dups.unique_ids {
                    if globally_duplicated.contains(target_of(id)) {
                        units.push(vec![id]);
                    } else {
                        uniques.push(id);
                    }
                }
                // Units whose target already has a home go there; the rest
                // are placed largest first.
                units.sort_by_key(|u| {
                    let forced = assigned.contains_key(target_of(u[0]));
                    (!forced, std::cmp::Reverse(u.len()), u[0])
                });
                for unit in units {
                    let key = target_of(unit[0]);
                    let j = match assigned.get(key) {
                        Some(&j) => j,
                        None => {
                            let j = (0..3)
                                .max_by(|&a, &b| remaining[a].cmp(&remaining[b]).then(b.cmp(&a)))
                                .expect("three parts");
                            assigned.insert(key, j);
                            j
                        }
                    };
                    remaining[j] -= unit.len() as i64;
                    placed[j].extend(unit);
                }
                uniques
            }
        };

        let mut uniques = uniques;
        uniques.sort_unstable();
        uniques.shuffle(&mut seed::stream(cfg.seed, "splitter", k as u64));
        deal_round_robin(&uniques, &mut remaining, &mut placed);

        bucket_report.insert(
            k,
            PartCounts::from_array([placed[0].len(), placed[1].len(), placed[2].len()]),
        );
        for j in 0..3 {
            parts[j].append(&mut placed[j]);
        }
    }

    let collect = |ids: &mut Vec<u64>| -> Vec<MatchedSentence> {
        ids.sort_unstable();
        ids.iter().map(|id| by_id[id].clone()).collect()
    };
    let [mut train, mut valid, mut test] = parts;
    Ok(SplitResult {
        train: collect(&mut train),
        valid: collect(&mut valid),
        test: collect(&mut test),
        bucket_report,
        seed_used: cfg.seed,
        dup_mode: cfg.dup_mode,
        duplicate_groups: global.groups.len(),
        duplicate_sentences: global.groups.iter().map(Vec::len).sum(),
    })
}

/// Test sentences whose target appears neither in train, valid, nor earlier
/// in test.
pub fn unique_subset(
    test: &[MatchedSentence],
    train: &[MatchedSentence],
    valid: &[MatchedSentence],
) -> Vec<MatchedSentence> {
    let mut seen: HashSet<&[String]> = train
        .iter()
        .chain(valid)
        .map(|s| s.target().tokens())
        .collect();
    test.iter()
        .filter(|s| seen.insert(s.target().tokens()))
        .cloned()
        .collect()
}
