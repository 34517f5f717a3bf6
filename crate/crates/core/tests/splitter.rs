mod common;

use std::collections::{HashMap, HashSet};

use common::{bucketed_corpus, hamilton, plant_duplicates};
use proptest::prelude::*;
use termspan::matcher::{MatchedCorpus, MatchedSentence};
use termspan::splitter::{split, unique_subset, DupMode, Part, SplitConfig, SplitResult};

fn cfg(r: usize, mode: DupMode) -> SplitConfig {
    SplitConfig { heldout_size: r, seed: 42, dup_mode: mode }
}

fn ids(s: &[MatchedSentence]) -> Vec<u64> {
    s.iter().map(|x| x.id()).collect()
}

fn assert_partition(mc: &MatchedCorpus, res: &SplitResult) {
    let mut all: Vec<u64> = Part::ALL.iter().flat_map(|&p| ids(res.part(p))).collect();
    all.sort_unstable();
    let mut want = ids(&mc.sentences);
    want.sort_unstable();
    assert_eq!(all, want);
}

fn cross_split_duplicates(res: &SplitResult) -> usize {
    let mut home: HashMap<&[String], Part> = HashMap::new();
    let mut bad = HashSet::new();
    for p in Part::ALL {
        for s in res.part(p) {
            let t = s.target().tokens();
            if *home.entry(t).or_insert(p) != p {
                bad.insert(t);
            }
        }
    }
    bad.len()
}

#[test]
fn paper_mode_matches_exact_apportionment() {
    let buckets = [(1, 6000), (3, 3000), (6, 1000)];
    let mc = bucketed_corpus(&buckets);
    let res = split(&mc, &cfg(1000, DupMode::Paper)).unwrap();
    assert_partition(&mc, &res);
    let sizes = res.sizes();
    assert_eq!((sizes.train, sizes.valid, sizes.test), (8000, 1000, 1000));
    for (k, n) in buckets {
        let want = hamilton(n as u64, &[8000, 1000, 1000]);
        let got = res.bucket_report[&k];
        assert_eq!([got.train as u64, got.valid as u64, got.test as u64], want[..], "bucket {k}");
    }
}

#[test]
fn grouped_mode_keeps_duplicates_together() {
    let mut mc = bucketed_corpus(&[(1, 6000), (3, 3000), (6, 1000)]);
    plant_duplicates(&mut mc, 500, 9);
    let res = split(&mc, &cfg(1000, DupMode::Grouped)).unwrap();
    assert_partition(&mc, &res);
    assert_eq!(cross_split_duplicates(&res), 0);
    assert!(res.duplicate_groups > 0);

    let paper = split(&mc, &cfg(1000, DupMode::Paper)).unwrap();
    assert_eq!(paper.sizes().test, 1000);
    assert_eq!(paper.sizes().valid, 1000);
}

#[test]
fn same_seed_same_split_under_any_thread_count() {
    let mut mc = bucketed_corpus(&[(1, 600), (2, 300), (4, 100)]);
    plant_duplicates(&mut mc, 50, 3);
    for mode in [DupMode::Paper, DupMode::Grouped] {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| split(&mc, &cfg(100, mode)).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_eq!(a, run(4));
    }
    let other = SplitConfig { seed: 7, ..cfg(100, DupMode::Paper) };
    let a = split(&mc, &cfg(100, DupMode::Paper)).unwrap();
    assert_ne!(ids(&a.test), ids(&split(&mc, &other).unwrap().test));
}

#[test]
fn unique_test_subset_drops_planted_copies() {
    let mut mc = bucketed_corpus(&[(1, 40)]);
    let res = split(&mc, &cfg(10, DupMode::Paper)).unwrap();
    // Copy five training targets into test sentences.
    let test_ids = ids(&res.test);
    let train_targets: Vec<_> = res.train.iter().take(5).map(|s| s.pair.target.clone()).collect();
    for (id, t) in test_ids.iter().zip(train_targets) {
        let s = mc.sentences.iter_mut().find(|s| s.id() == *id).unwrap();
        s.pair.target = t;
    }
    let test: Vec<_> = test_ids.iter().map(|id| mc.get(*id).unwrap().clone()).collect();
    let kept = unique_subset(&test, &res.train, &res.valid);
    assert_eq!(kept.len(), 5);
    assert_eq!(ids(&kept), test_ids[5..].to_vec());
}

#[test]
fn heldout_too_large_is_rejected() {
    let mc = bucketed_corpus(&[(1, 10)]);
    assert!(split(&mc, &cfg(5, DupMode::Paper)).is_err());
    assert!(split(&mc, &cfg(4, DupMode::Paper)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn paper_mode_stays_within_rounding_slack(
        counts in prop::collection::vec(1usize..60, 1..5),
        frac in 0.05f64..0.45,
    ) {
        let buckets: Vec<(usize, usize)> = counts.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
        let mc = bucketed_corpus(&buckets);
        let n = mc.len();
        let r = ((n as f64 * frac) as usize).max(1);
        prop_assume!(2 * r < n);
        let res = split(&mc, &cfg(r, DupMode::Paper)).unwrap();
        assert_partition(&mc, &res);
        let sizes = res.sizes();
        prop_assert_eq!((sizes.train, sizes.valid, sizes.test), (n - 2 * r, r, r));
        // Running totals in bucket order (longest terms first) stay within one.
        let mut running = [0usize; 3];
        let mut seen = 0;
        for (&k, got) in res.bucket_report.iter().rev() {
            seen += buckets[k - 1].1;
            for (j, (part, share)) in [(got.train, n - 2 * r), (got.valid, r), (got.test, r)].into_iter().enumerate() {
                running[j] += part;
                let lhs = (running[j] * n) as i64 - (seen * share) as i64;
                prop_assert!(lhs.unsigned_abs() < n as u64);
            }
        }
        for (k, c) in buckets {
            let got = res.bucket_report[&k];
            for (part, share) in [(got.train, n - 2 * r), (got.valid, r), (got.test, r)] {
                // Each bucket count is a difference of two running totals
                // that are both rounded: |part - c * share / n| < 2.
                let lhs = (part * n) as i64 - (c * share) as i64;
                prop_assert!(lhs.unsigned_abs() < 2 * n as u64, "bucket {} part {} share {}", k, part, share);
            }
        }
    }

    #[test]
    fn grouped_mode_never_splits_a_target(
        counts in prop::collection::vec(5usize..60, 1..4),
        planted_frac in 0.0f64..0.3,
        seed in 0u64..1000,
    ) {
        let buckets: Vec<(usize, usize)> = counts.iter().enumerate().map(|(i, &c)| (2 * i + 1, c)).collect();
        let mut mc = bucketed_corpus(&buckets);
        let n = mc.len();
        plant_duplicates(&mut mc, (n as f64 * planted_frac) as usize, seed);
        let r = n / 5;
        prop_assume!(r >= 1);
        let res = split(&mc, &cfg(r, DupMode::Grouped)).unwrap();
        assert_partition(&mc, &res);
        prop_assert_eq!(cross_split_duplicates(&res), 0);
        let slack = buckets.len() as i64;
        prop_assert!((res.sizes().valid as i64 - r as i64).abs() <= slack, "{:?}", res.sizes());
        prop_assert!((res.sizes().test as i64 - r as i64).abs() <= slack, "{:?}", res.sizes());
    }
}
