//! Stratified train/validation/test splitting.
//!
//! Procedure, fully determined by the corpus and the [`SplitSpec`]:
//!
//! 1. Draw one seeded permutation of all row positions.
//! 2. Bucket the permuted positions into strata keyed by language (and
//!    score bin when requested), keeping permutation order inside each
//!    stratum.
//! 3. Visit strata in key order. Each stratum of size `m` gets
//!    `largest_remainder(m, ratios)` items per output: the first go to
//!    train, the next to validation, the rest to test.
//! 4. Each output keeps the source order of its tweets.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{Corpus, Language, SplitName, Tweet, MAX_SCORE, MIN_SCORE};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratifyBy {
    Language,
    LanguageAndScoreBin,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    /// Train, validation and test fractions.
    pub ratios: [f64; 3],
    pub seed: u64,
    pub stratify_by: StratifyBy,
    pub score_bins: Vec<f64>,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            ratios: [0.7, 0.1, 0.2],
            seed: 0,
            stratify_by: StratifyBy::LanguageAndScoreBin,
            score_bins: default_score_bins(),
        }
    }
}

/// Eight half-unit bins over [1, 5].
pub fn default_score_bins() -> Vec<f64> {
    (0..=8).map(|i| 1.0 + 0.5 * f64::from(i)).collect()
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "split ratios must be non-negative, got {:?}",
                self.ratios
            )));
        }
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "split ratios must sum to 1, got {sum}"
            )));
        }
        let bins = &self.score_bins;
        if bins.len() < 2
            || bins
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidParameter(
                "score bins must be at least two strictly increasing edges".into(),
            ));
        }
        if bins[0] > MIN_SCORE || bins[bins.len() - 1] < MAX_SCORE {
            return Err(Error::InvalidParameter(format!(
                "score bins must cover [{MIN_SCORE}, {MAX_SCORE}]"
            )));
        }
        Ok(())
    }

    /// Bin index for a score; the last bin is closed on the right.
    pub fn score_bin(&self, score: f64) -> Option<usize> {
        let edges = &self.score_bins;
        let last = edges.len() - 1;
        if !(score >= edges[0] && score <= edges[last]) {
            return None;
        }
        let i = edges.partition_point(|&e| e <= score);
        Some(i.saturating_sub(1).min(last - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StratumKey {
    pub language: Language,
    pub score_bin: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
    /// Strata with fewer than three items, for which per-stratum
    /// proportions are not meaningful.
    pub small_strata: Vec<StratumKey>,
}

/// Hamilton apportionment of `total` items over `ratios`. Ties among equal
/// remainders go to the earlier slot.
pub fn largest_remainder(total: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut left = total.saturating_sub(assigned);
    if ratios.iter().all(|&r| r <= 0.0) {
        return counts;
    }

    let mut order: Vec<usize> = (0..ratios.len()).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra)
    });
    for &slot in order.iter().cycle() {
        if left == 0 {
            break;
        }
        if ratios[slot] > 0.0 {
            counts[slot] += 1;
            left -= 1;
        }
    }
    counts
}

pub fn stratified_split(corpus: &Corpus, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot split an empty corpus".into(),
        ));
    }
    let tweets = corpus.tweets();

    let mut keys = Vec::with_capacity(tweets.len());
    for t in tweets {
        let score_bin = match spec.stratify_by {
            StratifyBy::Language => None,
            StratifyBy::LanguageAndScoreBin => {
                let s = t.require_score()?;
                Some(spec.score_bin(s).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "tweet {}: score {s} outside the score bins",
                        t.id
                    ))
                })?)
            }
        };
        keys.push(StratumKey {
            language: t.language,
            score_bin,
        });
    }

    let mut order: Vec<usize> = (0..tweets.len()).collect();
    order.shuffle(&mut seed::rng(spec.seed));

    let mut strata: BTreeMap<StratumKey, Vec<usize>> = BTreeMap::new();
    for pos in order {
        strata.entry(keys[pos]).or_default().push(pos);
    }

    // destination per row position: 0 train, 1 validation, 2 test
    let mut dest = vec![0u8; tweets.len()];
    let mut small_strata = Vec::new();
    for (key, members) in &strata {
        if members.len() < 3 {
            log::warn!(
                "stratum {:?}/{:?} has {} item(s); proportions not guaranteed",
                key.language,
                key.score_bin,
                members.len()
            );
            small_strata.push(*key);
        }
        let counts = largest_remainder(members.len(), &spec.ratios);
        let mut it = members.iter();
        for (part, &count) in counts.iter().enumerate() {
            for &pos in it.by_ref().take(count) {
                dest[pos] = part as u8;
            }
        }
    }

    let mut parts: [Vec<Tweet>; 3] = Default::default();
    for (t, &d) in tweets.iter().zip(&dest) {
        parts[usize::from(d)].push(t.clone());
    }
    let [train, validation, test] = parts;
    let make = |tweets: Vec<Tweet>, name: SplitName| {
        Corpus::new(
            tweets,
            format!("{} [{} seed={}]", corpus.source, name.as_str(), spec.seed),
            name,
        )
    };
    Ok(Split {
        train: make(train, SplitName::Train)?,
        validation: make(validation, SplitName::Validation)?,
        test: make(test, SplitName::Test)?,
        small_strata,
    })
}
