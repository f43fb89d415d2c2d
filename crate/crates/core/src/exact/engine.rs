//! Per-variable P-value computation for any [`TestKind`], with null tables
//! built once per sample size.

use super::{
    f_test, levene_test, one_sample_t_test, perm_pvalue, t_test, JiConfig, RankNull, SignedRankNull, Statistic,
    TVariant, TestKind, TwoSampleData,
};
use crate::error::{Error, Result};
use crate::support::{rational_to_f64, PValueSample, Rational, Support};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub value: f64,
    /// Index into the test's support for discrete tests.
    pub level: Option<usize>,
}

#[derive(Debug, Clone)]
enum Kind {
    Rank(RankNull),
    SignedRank(SignedRankNull),
    Perm { statistic: Statistic, support: Support },
    Continuous,
}

#[derive(Debug, Clone)]
pub struct TestEngine {
    test: TestKind,
    n1: usize,
    n2: usize,
    kind: Kind,
}

impl TestEngine {
    /// One-sample tests read only `x` and require `n1` observations.
    pub fn new(test: TestKind, n1: usize, n2: usize, ji: JiConfig) -> Result<Self> {
        let kind = if let Some(rs) = test.rank() {
            Kind::Rank(RankNull::new(rs, n1, n2)?)
        } else {
            match test {
                TestKind::SignedRank => Kind::SignedRank(SignedRankNull::new(n1)?),
                TestKind::AbsMean | TestKind::Ji => {
                    let statistic = if test == TestKind::Ji {
                        Statistic::Ji(ji)
                    } else {
                        Statistic::AbsMean
                    };
                    let support = test.support(n1, n2)?.expect("permutation tests are discrete");
                    Kind::Perm { statistic, support }
                }
                _ => Kind::Continuous,
            }
        };
        let n2 = if test.is_one_sample() { 0 } else { n2 };
        Ok(TestEngine { test, n1, n2, kind })
    }

    pub fn test(&self) -> TestKind {
        self.test
    }

    pub fn support(&self) -> Option<&Support> {
        match &self.kind {
            Kind::Rank(n) => Some(n.support()),
            Kind::SignedRank(n) => Some(n.support()),
            Kind::Perm { support, .. } => Some(support),
            Kind::Continuous => None,
        }
    }

    fn discrete(support: &Support, level: usize) -> PValue {
        PValue {
            value: support.point_f64(level),
            level: Some(level),
        }
    }

    pub fn pvalue(&self, x: &[f64], y: &[f64]) -> Result<PValue> {
        if x.len() != self.n1 || (!self.test.is_one_sample() && y.len() != self.n2) {
            return Err(Error::SampleSize(format!(
                "{} engine built for sizes ({}, {}), got ({}, {})",
                self.test,
                self.n1,
                self.n2,
                x.len(),
                y.len()
            )));
        }
        if self.test.is_one_sample() {
            return match &self.kind {
                Kind::SignedRank(null) => Ok(Self::discrete(null.support(), null.level(x)?)),
                _ => Ok(PValue {
                    value: one_sample_t_test(x)?,
                    level: None,
                }),
            };
        }
        let data = TwoSampleData::new(x.to_vec(), y.to_vec())?;
        match &self.kind {
            Kind::Rank(null) => Ok(Self::discrete(null.support(), null.level(&data)?)),
            Kind::Perm { statistic, support } => {
                let p = perm_pvalue(&data, *statistic)?;
                let level = support.index_of(&p).ok_or(Error::SnapFailure {
                    index: 0,
                    value: rational_to_f64(&p),
                    tolerance: 0.0,
                })?;
                Ok(Self::discrete(support, level))
            }
            Kind::SignedRank(_) => unreachable!("signed rank is one-sample"),
            Kind::Continuous => {
                let value = match self.test {
                    TestKind::TPooled => t_test(&data, TVariant::Pooled)?,
                    TestKind::TWelch => t_test(&data, TVariant::Welch)?,
                    TestKind::F => f_test(&data)?,
                    TestKind::Levene => levene_test(&data)?,
                    other => unreachable!("{other} is discrete"),
                };
                Ok(PValue { value, level: None })
            }
        }
    }

    /// Exact rational P-value of a discrete result.
    pub fn exact(&self, p: &PValue) -> Option<Rational> {
        Some(self.support()?.point(p.level?))
    }

    /// Collects per-variable P-values into a sample, attaching the support
    /// for discrete tests.
    pub fn sample(&self, pvalues: &[PValue]) -> Result<PValueSample> {
        match self.support() {
            Some(s) => PValueSample::from_levels(
                s.clone(),
                pvalues
                    .iter()
                    .map(|p| p.level.expect("discrete tests always report a level"))
                    .collect(),
            ),
            None => PValueSample::new(pvalues.iter().map(|p| p.value).collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_levels_match_direct_enumeration() {
        let x = [0.3, -1.2, 2.5, 0.9];
        let y = [1.7, 3.1, 0.05, 2.2];
        let data = TwoSampleData::new(x.to_vec(), y.to_vec()).unwrap();
        for (test, stat) in [
            (TestKind::Wilcoxon, Statistic::Wilcoxon),
            (TestKind::Ks, Statistic::Ks),
            (TestKind::SiegelTukey, Statistic::SiegelTukey),
            (TestKind::AnsariBradley, Statistic::AnsariBradley),
            (TestKind::AbsMean, Statistic::AbsMean),
            (TestKind::Ji, Statistic::Ji(JiConfig::default())),
        ] {
            let e = TestEngine::new(test, 4, 4, JiConfig::default()).unwrap();
            let p = e.pvalue(&x, &y).unwrap();
            assert_eq!(e.exact(&p).unwrap(), perm_pvalue(&data, stat).unwrap(), "{test}");
        }
    }

    #[test]
    fn continuous_and_one_sample() {
        let e = TestEngine::new(TestKind::TPooled, 3, 3, JiConfig::default()).unwrap();
        let p = e.pvalue(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!(p.level.is_none() && (p.value - 0.2879).abs() < 1e-4);
        let e = TestEngine::new(TestKind::SignedRank, 6, 0, JiConfig::default()).unwrap();
        let p = e.pvalue(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[]).unwrap();
        assert_eq!(e.exact(&p).unwrap(), Rational::new(1, 32));
        assert!(e.pvalue(&[1.0, 2.0], &[]).is_err());
    }

    #[test]
    fn samples_carry_support() {
        let e = TestEngine::new(TestKind::Wilcoxon, 4, 4, JiConfig::default()).unwrap();
        let p = e.pvalue(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]).unwrap();
        let s = e.sample(&[p, p]).unwrap();
        assert_eq!(s.support().unwrap().len(), 9);
        assert_eq!(s.levels().unwrap(), &[0, 0]);
    }
}
