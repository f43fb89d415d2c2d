//! Exact one-sample Wilcoxon signed-rank test.

use std::collections::BTreeMap;

use super::enumerate::check_cap;
use super::rank::IntegerNull;
use super::DEFAULT_ENUMERATION_CAP;
use crate::error::{Error, Result};
use crate::support::{Rational, Support};

/// Ranks `1..=n` of `|v|`; each bit of the returned mask marks a positive value.
fn signed_ranks(sample: &[f64]) -> Result<(Vec<i64>, Vec<bool>)> {
    if sample.len() < 2 {
        return Err(Error::SampleSize(format!(
            "signed-rank test needs n >= 2, got {}",
            sample.len()
        )));
    }
    if let Some(&v) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain {
            value: v,
            domain: "finite reals",
        });
    }
    if sample.contains(&0.0) {
        return Err(Error::ZeroObservation);
    }
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| sample[a].abs().total_cmp(&sample[b].abs()));
    if order.windows(2).any(|w| sample[w[0]].abs() == sample[w[1]].abs()) {
        return Err(Error::Ties("signed_rank"));
    }
    let ranks = (1..=sample.len() as i64).collect();
    let positive = order.iter().map(|&i| sample[i] > 0.0).collect();
    Ok((ranks, positive))
}

/// `|2 W+ - n(n+1)/2|` from the ranks carrying a positive sign.
fn folded(n: usize, positive_rank_sum: i64) -> i64 {
    let n = n as i64;
    (2 * positive_rank_sum - n * (n + 1) / 2).abs()
}

/// Null distribution of the folded signed-rank statistic over all `2^n`
/// sign assignments.
#[derive(Debug, Clone)]
pub struct SignedRankNull {
    n: usize,
    null: IntegerNull,
    support: Support,
}

impl SignedRankNull {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(n: usize, cap: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::SampleSize(format!("signed-rank test needs n >= 2, got {n}")));
        }
        let patterns = if n >= 127 { u128::MAX } else { 1u128 << n };
        check_cap(patterns, cap)?;
        let mut tally = BTreeMap::new();
        for mask in 0u64..(patterns as u64) {
            let w: i64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b as i64 + 1).sum();
            *tally.entry(folded(n, w)).or_insert(0u64) += 1;
        }
        let null = IntegerNull::from_tally(tally);
        let support = null.support();
        Ok(SignedRankNull { n, null, support })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn table(&self) -> &IntegerNull {
        &self.null
    }

    fn observed(&self, sample: &[f64]) -> Result<i64> {
        if sample.len() != self.n {
            return Err(Error::SampleSize(format!(
                "null built for n = {}, sample has {}",
                self.n,
                sample.len()
            )));
        }
        let (ranks, positive) = signed_ranks(sample)?;
        let w = ranks.iter().zip(&positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
        Ok(folded(self.n, w))
    }

    /// Index of the sample's P-value in [`SignedRankNull::support`].
    pub fn level(&self, sample: &[f64]) -> Result<usize> {
        let obs = self.observed(sample)?;
        Ok(self.null.level_of(obs).expect("observed statistic was enumerated"))
    }

    pub fn pvalue(&self, sample: &[f64]) -> Result<Rational> {
        Ok(self.null.tail_prob(self.observed(sample)?))
    }
}

/// Two-sided exact P-value by enumerating every sign pattern, observed one
/// included.
pub fn signed_rank_pvalue(sample: &[f64]) -> Result<Rational> {
    let (ranks, positive) = signed_ranks(sample)?;
    let n = sample.len();
    let patterns = check_cap(1u128 << n.min(127), DEFAULT_ENUMERATION_CAP)?;
    let w_obs: i64 = ranks.iter().zip(&positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let obs = folded(n, w_obs);
    let mut count = 0u64;
    for mask in 0..patterns {
        let w: i64 = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| ranks[b]).sum();
        if folded(n, w) >= obs {
            count += 1;
        }
    }
    Ok(Rational::new(count as i64, patterns as i64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        assert_eq!(signed_rank_pvalue(&[-1.0, 1.5]).unwrap(), Rational::new(1, 1));
        let all_pos = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(signed_rank_pvalue(&all_pos).unwrap(), Rational::new(1, 32));
        let null = SignedRankNull::new(6).unwrap();
        assert_eq!(null.pvalue(&all_pos).unwrap(), Rational::new(1, 32));
        assert_eq!(null.support().min_point(), Rational::new(1, 32));
    }

    #[test]
    fn symmetric_sample_has_pvalue_one() {
        // W+ = 1 + 4 = 5 vs mean 5
        assert_eq!(signed_rank_pvalue(&[-2.0, 0.5, -3.0, 4.0]).unwrap(), Rational::new(1, 1));
    }

    #[test]
    fn zeros_and_ties_are_errors() {
        assert_eq!(signed_rank_pvalue(&[0.0, 1.0, 2.0]), Err(Error::ZeroObservation));
        assert_eq!(signed_rank_pvalue(&[-1.0, 1.0, 2.0]), Err(Error::Ties("signed_rank")));
    }

    #[test]
    fn null_table_agrees_with_direct_enumeration() {
        let null = SignedRankNull::new(5).unwrap();
        let samples = [
            [0.3, -1.2, 2.5, 0.9, -0.1],
            [1.0, 2.0, -3.0, 4.0, -5.0],
            [-0.7, -0.2, -0.4, -1.1, 0.05],
        ];
        for s in samples {
            assert_eq!(null.pvalue(&s).unwrap(), signed_rank_pvalue(&s).unwrap());
            let lvl = null.level(&s).unwrap();
            assert_eq!(null.support().point(lvl), signed_rank_pvalue(&s).unwrap());
        }
    }
}
