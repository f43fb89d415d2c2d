//! Two-sample and one-sample tests with exact permutation nulls.

mod engine;
mod enumerate;
pub mod parametric;
mod rank;
mod signed_rank;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use engine::{PValue, TestEngine};
pub use enumerate::{binomial, for_each_combination};
pub use parametric::{f_test, levene_test, one_sample_t_test, t_test, TVariant};
pub use rank::{IntegerNull, RankNull};
pub use signed_rank::{signed_rank_pvalue, SignedRankNull};

use crate::error::{Error, Result};
use crate::support::{Rational, Support};
use enumerate::check_cap;

/// Largest number of assignments enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleData {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl TwoSampleData {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() < 2 {
            return Err(Error::SampleSize(format!(
                "two-sample tests need n1 >= 2 and n2 >= 2, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        if let Some(&v) = x.iter().chain(&y).find(|v| !v.is_finite()) {
            return Err(Error::Domain {
                value: v,
                domain: "finite reals",
            });
        }
        Ok(TwoSampleData { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n1(&self) -> usize {
        self.x.len()
    }

    pub fn n2(&self) -> usize {
        self.y.len()
    }

    fn pooled(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }
}

/// Gaussian-kernel bandwidth of the J statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JiConfig {
    pub bandwidth: f64,
}

impl JiConfig {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if bandwidth > 0.0 && bandwidth.is_finite() {
            Ok(JiConfig { bandwidth })
        } else {
            Err(Error::Domain {
                value: bandwidth,
                domain: "bandwidth b > 0",
            })
        }
    }
}

impl Default for JiConfig {
    fn default() -> Self {
        JiConfig { bandwidth: 1.0 }
    }
}

/// Statistics that depend on the data only through ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankStatistic {
    Wilcoxon,
    Ks,
    SiegelTukey,
    AnsariBradley,
}

impl RankStatistic {
    pub fn name(self) -> &'static str {
        match self {
            RankStatistic::Wilcoxon => "wilcoxon",
            RankStatistic::Ks => "ks",
            RankStatistic::SiegelTukey => "siegel_tukey",
            RankStatistic::AnsariBradley => "ansari_bradley",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Wilcoxon,
    Ks,
    AbsMean,
    Ji(JiConfig),
    SiegelTukey,
    AnsariBradley,
}

impl Statistic {
    pub fn rank(self) -> Option<RankStatistic> {
        match self {
            Statistic::Wilcoxon => Some(RankStatistic::Wilcoxon),
            Statistic::Ks => Some(RankStatistic::Ks),
            Statistic::SiegelTukey => Some(RankStatistic::SiegelTukey),
            Statistic::AnsariBradley => Some(RankStatistic::AnsariBradley),
            Statistic::AbsMean | Statistic::Ji(_) => None,
        }
    }
}

/// Enumerated permutation distribution: distinct statistic values in
/// increasing order with their exact upper-tail probabilities.
///
/// For rank statistics the values are the folded integer statistics used
/// internally (a fixed positive multiple of `|T - E T|`, or `n1 n2 D` for KS).
#[derive(Debug, Clone, PartialEq)]
pub struct ExactNull {
    pub statistic_values: Vec<f64>,
    pub tail_prob: Vec<Rational>,
    pub n_assignments: u64,
}

impl ExactNull {
    pub fn from_table(table: &IntegerNull) -> Self {
        ExactNull {
            statistic_values: table.values().iter().map(|&v| v as f64).collect(),
            tail_prob: table
                .tail_counts()
                .iter()
                .map(|&c| Rational::new(c as i64, table.total() as i64))
                .collect(),
            n_assignments: table.total(),
        }
    }
}

/// Exact permutation P-value `P(T_perm >= T_obs)` over all
/// `C(n1 + n2, n1)` assignments, the observed one included.
pub fn perm_pvalue(data: &TwoSampleData, statistic: Statistic) -> Result<Rational> {
    perm_pvalue_with_cap(data, statistic, DEFAULT_ENUMERATION_CAP)
}

pub fn perm_pvalue_with_cap(data: &TwoSampleData, statistic: Statistic, cap: u64) -> Result<Rational> {
    let (n1, n2) = (data.n1(), data.n2());
    let total = check_cap(binomial(n1 + n2, n1), cap)?;
    let count = match statistic.rank() {
        Some(rs) => {
            let scorer = rank::RankScorer::new(rs, n1, n2);
            let mut mask = vec![false; n1 + n2];
            let obs_pos = rank::group1_positions(data, rs.name())?;
            let obs = scorer.folded(&obs_pos, &mut mask);
            let mut count = 0u64;
            for_each_combination(n1 + n2, n1, |c| {
                if scorer.folded(c, &mut mask) >= obs {
                    count += 1;
                }
            });
            count
        }
        None => match statistic {
            Statistic::AbsMean => abs_mean_tail(data),
            Statistic::Ji(cfg) => ji_tail(data, cfg),
            _ => unreachable!("rank statistics handled above"),
        },
    };
    Ok(Rational::new(count as i64, total as i64))
}

/// Absolute difference between the two sample means.
pub fn abs_mean_statistic(data: &TwoSampleData) -> f64 {
    let mx = data.x.iter().sum::<f64>() / data.n1() as f64;
    let my = data.y.iter().sum::<f64>() / data.n2() as f64;
    (mx - my).abs()
}

fn abs_mean_tail(data: &TwoSampleData) -> u64 {
    let pooled = data.pooled();
    let (n1, n2) = (data.n1() as f64, data.n2() as f64);
    let total: f64 = pooled.iter().sum();
    let stat = |s1: f64| (s1 / n1 - (total - s1) / n2).abs();
    let obs = stat(data.x.iter().sum());
    let scale = pooled.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * obs + 1e-13 * scale * pooled.len() as f64;
    let mut count = 0u64;
    for_each_combination(pooled.len(), data.n1(), |c| {
        let s1: f64 = c.iter().map(|&i| pooled[i]).sum();
        if stat(s1) >= obs - tol {
            count += 1;
        }
    });
    count
}

fn kernel_matrix(pooled: &[f64], cfg: JiConfig) -> Vec<f64> {
    let n = pooled.len();
    let c = 1.0 / (4.0 * cfg.bandwidth * cfg.bandwidth);
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = pooled[i] - pooled[j];
            k[i * n + j] = (-c * d * d).exp();
        }
    }
    k
}

fn ji_from_groups(k: &[f64], n: usize, g1: &[usize], g2: &[usize]) -> f64 {
    let within = |g: &[usize]| {
        let mut s = 0.0;
        for (a, &i) in g.iter().enumerate() {
            for &j in &g[a + 1..] {
                s += k[i * n + j];
            }
        }
        2.0 * s / (g.len() * (g.len() - 1)) as f64
    };
    let mut cross = 0.0;
    for &i in g1 {
        for &j in g2 {
            cross += k[i * n + j];
        }
    }
    within(g1) + within(g2) - 2.0 * cross / (g1.len() * g2.len()) as f64
}

/// Gaussian-kernel L2 distance statistic between the two samples:
/// within-x average + within-y average - 2 x cross average of
/// `exp(-(u - v)^2 / (4 b^2))`, the within averages taken over distinct pairs.
pub fn ji_statistic(data: &TwoSampleData, config: JiConfig) -> f64 {
    let pooled = data.pooled();
    let k = kernel_matrix(&pooled, config);
    let g1: Vec<usize> = (0..data.n1()).collect();
    let g2: Vec<usize> = (data.n1()..pooled.len()).collect();
    ji_from_groups(&k, pooled.len(), &g1, &g2)
}

fn ji_tail(data: &TwoSampleData, cfg: JiConfig) -> u64 {
    let pooled = data.pooled();
    let n = pooled.len();
    let k = kernel_matrix(&pooled, cfg);
    let g1: Vec<usize> = (0..data.n1()).collect();
    let g2: Vec<usize> = (data.n1()..n).collect();
    let obs = ji_from_groups(&k, n, &g1, &g2);
    let tol = 1e-9 * obs.abs() + 1e-14;
    let mut comp = Vec::with_capacity(data.n2());
    let mut count = 0u64;
    for_each_combination(n, data.n1(), |c| {
        comp.clear();
        let mut next = 0;
        for i in 0..n {
            if next < c.len() && c[next] == i {
                next += 1;
            } else {
                comp.push(i);
            }
        }
        if ji_from_groups(&k, n, c, &comp) >= obs - tol {
            count += 1;
        }
    });
    count
}

/// Attainable P-values of a rank test for the given sample sizes.
pub fn exact_support(statistic: RankStatistic, n1: usize, n2: usize) -> Result<Support> {
    Ok(RankNull::new(statistic, n1, n2)?.support().clone())
}

/// Every test the library can run, one- and two-sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestKind {
    Wilcoxon,
    Ks,
    AbsMean,
    Ji,
    SiegelTukey,
    AnsariBradley,
    TPooled,
    TWelch,
    F,
    Levene,
    OneSampleT,
    SignedRank,
}

impl TestKind {
    pub const ALL: [TestKind; 12] = [
        TestKind::Wilcoxon,
        TestKind::Ks,
        TestKind::AbsMean,
        TestKind::Ji,
        TestKind::SiegelTukey,
        TestKind::AnsariBradley,
        TestKind::TPooled,
        TestKind::TWelch,
        TestKind::F,
        TestKind::Levene,
        TestKind::OneSampleT,
        TestKind::SignedRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Wilcoxon => "wilcoxon",
            TestKind::Ks => "ks",
            TestKind::AbsMean => "abs",
            TestKind::Ji => "ji",
            TestKind::SiegelTukey => "siegel_tukey",
            TestKind::AnsariBradley => "ansari_bradley",
            TestKind::TPooled => "t_pooled",
            TestKind::TWelch => "t_welch",
            TestKind::F => "f",
            TestKind::Levene => "levene",
            TestKind::OneSampleT => "one_sample_t",
            TestKind::SignedRank => "signed_rank",
        }
    }

    pub fn rank(self) -> Option<RankStatistic> {
        match self {
            TestKind::Wilcoxon => Some(RankStatistic::Wilcoxon),
            TestKind::Ks => Some(RankStatistic::Ks),
            TestKind::SiegelTukey => Some(RankStatistic::SiegelTukey),
            TestKind::AnsariBradley => Some(RankStatistic::AnsariBradley),
            _ => None,
        }
    }

    pub fn is_one_sample(self) -> bool {
        matches!(self, TestKind::OneSampleT | TestKind::SignedRank)
    }

    /// Whether P-values are discrete with a support fixed by the sample sizes.
    pub fn is_discrete(self) -> bool {
        !matches!(
            self,
            TestKind::TPooled | TestKind::TWelch | TestKind::F | TestKind::Levene | TestKind::OneSampleT
        )
    }

    /// Null support of the P-values for continuous data. One-sample tests
    /// use `n1` as the sample size and ignore `n2`.
    pub fn support(self, n1: usize, n2: usize) -> Result<Option<Support>> {
        if let Some(rs) = self.rank() {
            return exact_support(rs, n1, n2).map(Some);
        }
        match self {
            TestKind::AbsMean | TestKind::Ji => {
                let c = check_cap(binomial(n1 + n2, n1), DEFAULT_ENUMERATION_CAP)?;
                // swapping the groups leaves the statistic unchanged when n1 = n2
                let levels = if n1 == n2 { c / 2 } else { c };
                Support::classical(levels).map(Some)
            }
            TestKind::SignedRank => Ok(Some(SignedRankNull::new(n1)?.support().clone())),
            _ => Ok(None),
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "wilcoxon" => TestKind::Wilcoxon,
            "ks" | "kolmogorov_smirnov" => TestKind::Ks,
            "abs" | "abs_mean" => TestKind::AbsMean,
            "ji" | "j" => TestKind::Ji,
            "siegel_tukey" | "st" => TestKind::SiegelTukey,
            "ansari_bradley" | "ab" => TestKind::AnsariBradley,
            "t_pooled" => TestKind::TPooled,
            "t" | "t_welch" | "welch" => TestKind::TWelch,
            "f" => TestKind::F,
            "levene" => TestKind::Levene,
            "one_sample_t" | "t1" => TestKind::OneSampleT,
            "signed_rank" => TestKind::SignedRank,
            _ => {
                let names: Vec<&str> = TestKind::ALL.iter().map(|t| t.name()).collect();
                return Err(Error::Config(format!(
                    "unknown test '{s}' (expected one of {})",
                    names.join(", ")
                )));
            }
        };
        Ok(kind)
    }
}

impl TryFrom<String> for TestKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestKind> for String {
    fn from(t: TestKind) -> String {
        t.name().to_string()
    }
}
