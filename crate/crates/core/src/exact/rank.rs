//! Rank scores and enumerated null distributions of rank statistics.

use std::collections::BTreeMap;

use super::enumerate::{binomial, check_cap, for_each_combination};
use super::{RankStatistic, TwoSampleData, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::support::{Rational, Support};

/// Tail table of an integer-valued statistic: distinct values in
/// increasing order and, for each, the number of assignments at or above it.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerNull {
    values: Vec<i64>,
    tail_counts: Vec<u64>,
    total: u64,
}

impl IntegerNull {
    pub(crate) fn from_tally(tally: BTreeMap<i64, u64>) -> Self {
        let values: Vec<i64> = tally.keys().copied().collect();
        let mut tail_counts = vec![0u64; values.len()];
        let mut acc = 0u64;
        for (i, c) in tally.values().enumerate().rev() {
            acc += c;
            tail_counts[i] = acc;
        }
        IntegerNull {
            values,
            tail_counts,
            total: acc,
        }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn tail_counts(&self) -> &[u64] {
        &self.tail_counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of assignments whose statistic is at least `observed`.
    pub fn tail_count(&self, observed: i64) -> u64 {
        let i = self.values.partition_point(|&v| v < observed);
        self.tail_counts.get(i).copied().unwrap_or(0)
    }

    pub fn tail_prob(&self, observed: i64) -> Rational {
        Rational::new(self.tail_count(observed) as i64, self.total as i64)
    }

    /// Index into [`IntegerNull::support`] of the P-value for an attainable
    /// statistic value.
    pub fn level_of(&self, value: i64) -> Option<usize> {
        self.values
            .binary_search(&value)
            .ok()
            .map(|i| self.values.len() - 1 - i)
    }

    /// Distinct tail probabilities in increasing order.
    pub fn support(&self) -> Support {
        let points = self
            .tail_counts
            .iter()
            .rev()
            .map(|&c| Rational::new(c as i64, self.total as i64))
            .collect();
        Support::new(points).expect("tail probabilities form a valid support")
    }
}

/// Scores at pooled positions `0..n` (ascending order of the data).
pub(crate) fn scores(statistic: RankStatistic, n: usize) -> Vec<i64> {
    match statistic {
        RankStatistic::Wilcoxon | RankStatistic::Ks => (1..=n as i64).collect(),
        RankStatistic::AnsariBradley => (0..n).map(|p| (p as i64 + 1).min((n - p) as i64)).collect(),
        RankStatistic::SiegelTukey => {
            // 1 to the smallest, 2-3 to the two largest, 4-5 to the next two smallest, ...
            let mut out = vec![0i64; n];
            let (mut lo, mut hi) = (0usize, n);
            let mut next = 1i64;
            let mut from_low = true;
            let mut take = 1;
            while lo < hi {
                for _ in 0..take {
                    if lo >= hi {
                        break;
                    }
                    if from_low {
                        out[lo] = next;
                        lo += 1;
                    } else {
                        hi -= 1;
                        out[hi] = next;
                    }
                    next += 1;
                }
                from_low = !from_low;
                take = 2;
            }
            out
        }
    }
}

/// Computes the folded statistic of a rank test from the sorted pooled
/// positions of the first group.
#[derive(Debug, Clone)]
pub(crate) struct RankScorer {
    statistic: RankStatistic,
    n1: usize,
    n2: usize,
    scores: Vec<i64>,
    score_total: i64,
}

impl RankScorer {
    pub(crate) fn new(statistic: RankStatistic, n1: usize, n2: usize) -> Self {
        let scores = scores(statistic, n1 + n2);
        let score_total = scores.iter().sum();
        RankScorer {
            statistic,
            n1,
            n2,
            scores,
            score_total,
        }
    }

    /// `|N S - n1 sum(scores)|` for score statistics (N times the distance
    /// from the null mean), `n1 n2 D` for Kolmogorov-Smirnov.
    pub(crate) fn folded(&self, positions: &[usize], mask: &mut [bool]) -> i64 {
        let n = (self.n1 + self.n2) as i64;
        match self.statistic {
            RankStatistic::Ks => {
                mask.iter_mut().for_each(|b| *b = false);
                for &p in positions {
                    mask[p] = true;
                }
                let (n1, n2) = (self.n1 as i64, self.n2 as i64);
                let (mut c1, mut c2, mut best) = (0i64, 0i64, 0i64);
                for &in1 in mask.iter() {
                    if in1 {
                        c1 += 1;
                    } else {
                        c2 += 1;
                    }
                    best = best.max((n2 * c1 - n1 * c2).abs());
                }
                best
            }
            _ => {
                let s: i64 = positions.iter().map(|&p| self.scores[p]).sum();
                (n * s - self.n1 as i64 * self.score_total).abs()
            }
        }
    }
}

/// Pooled positions (0-based, ascending) of the first sample; errors on ties.
pub(crate) fn group1_positions(data: &TwoSampleData, name: &'static str) -> Result<Vec<usize>> {
    let n1 = data.n1();
    let pooled: Vec<f64> = data.x().iter().chain(data.y()).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&a, &b| pooled[a].total_cmp(&pooled[b]));
    if order.windows(2).any(|w| pooled[w[0]] == pooled[w[1]]) {
        return Err(Error::Ties(name));
    }
    Ok(order
        .iter()
        .enumerate()
        .filter(|(_, &idx)| idx < n1)
        .map(|(pos, _)| pos)
        .collect())
}

/// Enumerated null of a rank statistic for fixed sample sizes.
#[derive(Debug, Clone)]
pub struct RankNull {
    scorer: RankScorer,
    null: IntegerNull,
    support: Support,
}

impl RankNull {
    pub fn new(statistic: RankStatistic, n1: usize, n2: usize) -> Result<Self> {
        Self::with_cap(statistic, n1, n2, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(statistic: RankStatistic, n1: usize, n2: usize, cap: u64) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(Error::SampleSize(format!(
                "rank tests need n1 >= 2 and n2 >= 2, got {n1} and {n2}"
            )));
        }
        check_cap(binomial(n1 + n2, n1), cap)?;
        let scorer = RankScorer::new(statistic, n1, n2);
        let mut mask = vec![false; n1 + n2];
        let mut tally = BTreeMap::new();
        for_each_combination(n1 + n2, n1, |c| {
            *tally.entry(scorer.folded(c, &mut mask)).or_insert(0u64) += 1;
        });
        let null = IntegerNull::from_tally(tally);
        let support = null.support();
        Ok(RankNull {
            scorer,
            null,
            support,
        })
    }

    pub fn statistic(&self) -> RankStatistic {
        self.scorer.statistic
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.scorer.n1, self.scorer.n2)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn table(&self) -> &IntegerNull {
        &self.null
    }

    /// Folded statistic of the given data.
    pub fn observed(&self, data: &TwoSampleData) -> Result<i64> {
        if (data.n1(), data.n2()) != self.sizes() {
            return Err(Error::SampleSize(format!(
                "null built for sizes {:?}, data has ({}, {})",
                self.sizes(),
                data.n1(),
                data.n2()
            )));
        }
        let pos = group1_positions(data, self.statistic().name())?;
        let mut mask = vec![false; data.n1() + data.n2()];
        Ok(self.scorer.folded(&pos, &mut mask))
    }

    /// Index of the data's P-value in [`RankNull::support`].
    pub fn level(&self, data: &TwoSampleData) -> Result<usize> {
        let obs = self.observed(data)?;
        Ok(self
            .null
            .level_of(obs)
            .expect("observed statistic is one of the enumerated values"))
    }

    pub fn pvalue(&self, data: &TwoSampleData) -> Result<Rational> {
        Ok(self.null.tail_prob(self.observed(data)?))
    }
}
