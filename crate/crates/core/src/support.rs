//! Discrete uniform P-value laws and validated P-value samples.
//!
//! A [`Support`] is the finite set `A = {t_1 < ... < t_{s+1} = 1}` of
//! attainable P-values. The law `H_A` puts mass `t_j - t_{j-1}` on `t_j`
//! (with `t_0 = 0`), so `P(PV <= t_j) = t_j` at every support point.
//! Points are exact rationals so that fractions such as `8/35` compare
//! exactly; floating-point inputs are snapped onto the support.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational with 64-bit numerator and denominator, always in lowest terms.
pub type Rational = Ratio<i64>;

/// Absolute tolerance used when snapping floating-point P-values to support points.
pub const SNAP_TOLERANCE: f64 = 1e-9;

/// Nearest `f64` to a rational. Both parts of every rational we build fit
/// in 53 bits, so this is the correctly rounded quotient.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(*r.numer() as f64 / *r.denom() as f64)
}

/// Support set of a discrete uniform P-value distribution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Support {
    points: Vec<Rational>,
}

impl Support {
    pub fn new(points: Vec<Rational>) -> Result<Self> {
        let Some(last) = points.last() else {
            return Err(Error::InvalidSupport("no support points".into()));
        };
        if *last != Rational::from_integer(1) {
            return Err(Error::InvalidSupport(format!(
                "last support point must be 1, got {last}"
            )));
        }
        if points[0] <= Rational::zero() {
            return Err(Error::InvalidSupport(format!(
                "support points must be positive, got {}",
                points[0]
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport(format!(
                "support points must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// Builds a support from (numerator, denominator) pairs.
    pub fn from_fractions(pairs: &[(i64, i64)]) -> Result<Self> {
        let points = pairs
            .iter()
            .map(|&(n, d)| {
                if d <= 0 {
                    Err(Error::InvalidSupport(format!("non-positive denominator in {n}/{d}")))
                } else {
                    Ok(Rational::new(n, d))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    /// The classical equally spaced support `{1/N, 2/N, ..., N/N}`.
    pub fn classical(n_points: u64) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidSupport("classical support needs N >= 1".into()));
        }
        let n = i64::try_from(n_points)
            .map_err(|_| Error::InvalidSupport(format!("N = {n_points} is too large")))?;
        Ok(Self {
            points: (1..=n).map(|k| Rational::new(k, n)).collect(),
        })
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    /// Number of support points, `s + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Rational {
        self.points[index]
    }

    pub fn point_f64(&self, index: usize) -> f64 {
        rational_to_f64(&self.points[index])
    }

    pub fn points_f64(&self) -> Vec<f64> {
        self.points.iter().map(rational_to_f64).collect()
    }

    /// Smallest support point `t_1 = inf A`.
    pub fn min_point(&self) -> Rational {
        self.points[0]
    }

    /// Jump `t_j - t_{j-1}` of the cdf at support index `j` (0-based).
    pub fn jump(&self, index: usize) -> Rational {
        if index == 0 {
            self.points[0]
        } else {
            self.points[index] - self.points[index - 1]
        }
    }

    /// Discrete uniform cdf `H_A(x)` for a real argument.
    ///
    /// Support points are compared at their nearest `f64`, which is exactly
    /// the value a caller gets by writing e.g. `8.0 / 35.0`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain {
                value: x,
                domain: "[0, 1]",
            });
        }
        let below = self.points.partition_point(|t| rational_to_f64(t) <= x);
        Ok(match below {
            0 => 0.0,
            k => rational_to_f64(&self.points[k - 1]),
        })
    }

    /// Discrete uniform cdf evaluated exactly at a rational argument in `[0, 1]`.
    pub fn cdf_exact(&self, x: &Rational) -> Rational {
        let below = self.points.partition_point(|t| t <= x);
        match below {
            0 => Rational::zero(),
            k => self.points[k - 1],
        }
    }

    pub fn index_of(&self, r: &Rational) -> Option<usize> {
        self.points.binary_search(r).ok()
    }

    /// Index of the support point nearest to `x`, if it lies within `tolerance`.
    pub fn snap(&self, x: f64, tolerance: f64) -> Option<usize> {
        let pos = self.points.partition_point(|t| rational_to_f64(t) < x);
        let mut best: Option<(usize, f64)> = None;
        for idx in [pos.wrapping_sub(1), pos] {
            if idx < self.points.len() {
                let d = (rational_to_f64(&self.points[idx]) - x).abs();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((idx, d));
                }
            }
        }
        best.filter(|&(_, d)| d <= tolerance).map(|(i, _)| i)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Sample frequencies `b_i = #{pv_j = t_i}` of every support point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFrequencies {
    support: Support,
    counts: Vec<u64>,
}

impl SupportFrequencies {
    pub fn new(support: Support, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != support.len() {
            return Err(Error::InvalidSupport(format!(
                "{} counts for {} support points",
                counts.len(),
                support.len()
            )));
        }
        Ok(Self { support, counts })
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of P-values strictly greater than the support point at `index`.
    pub fn count_above_index(&self, index: usize) -> u64 {
        self.counts[index + 1..].iter().sum()
    }

    /// Number of P-values strictly greater than an arbitrary rational level.
    pub fn count_above(&self, lambda: &Rational) -> u64 {
        let first = self.support.points.partition_point(|t| t <= lambda);
        self.counts[first..].iter().sum()
    }
}

/// Snaps every value onto `support` and tallies the frequencies.
pub fn attach_and_tally(values: &[f64], support: &Support) -> Result<SupportFrequencies> {
    if values.is_empty() {
        return Err(Error::Empty("P-value list"));
    }
    let levels = snap_all(values, support)?;
    Ok(tally(support.clone(), &levels))
}

fn snap_all(values: &[f64], support: &Support) -> Result<Vec<usize>> {
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            check_pvalue(index, value)?;
            support
                .snap(value, SNAP_TOLERANCE)
                .ok_or(Error::SnapFailure {
                    index,
                    value,
                    tolerance: SNAP_TOLERANCE,
                })
        })
        .collect()
}

fn tally(support: Support, levels: &[usize]) -> SupportFrequencies {
    let mut counts = vec![0u64; support.len()];
    for &l in levels {
        counts[l] += 1;
    }
    SupportFrequencies { support, counts }
}

fn check_pvalue(index: usize, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidPValue { index, value })
    }
}

/// The observed P-values `{pv_1, ..., pv_m}`, optionally tied to a common support.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSample {
    values: Vec<f64>,
    discrete: Option<Discrete>,
}

#[derive(Debug, Clone, PartialEq)]
struct Discrete {
    support: Support,
    levels: Vec<usize>,
}

impl PValueSample {
    /// A sample with no known support (continuous P-values).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("P-value list"));
        }
        for (i, &v) in values.iter().enumerate() {
            check_pvalue(i, v)?;
        }
        Ok(Self {
            values,
            discrete: None,
        })
    }

    /// A sample whose values are snapped onto `support`. Stored values are
    /// replaced by the nearest `f64` of their support point.
    pub fn with_support(values: &[f64], support: Support) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("P-value list"));
        }
        let levels = snap_all(values, &support)?;
        Ok(Self::from_levels_unchecked(support, levels))
    }

    /// A sample given directly by support indices.
    pub fn from_levels(support: Support, levels: Vec<usize>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Empty("P-value list"));
        }
        if let Some(&bad) = levels.iter().find(|&&l| l >= support.len()) {
            return Err(Error::InvalidSupport(format!(
                "level {bad} out of range for a support of {} points",
                support.len()
            )));
        }
        Ok(Self::from_levels_unchecked(support, levels))
    }

    fn from_levels_unchecked(support: Support, levels: Vec<usize>) -> Self {
        let approx = support.points_f64();
        let values = levels.iter().map(|&l| approx[l]).collect();
        Self {
            values,
            discrete: Some(Discrete { support, levels }),
        }
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> Option<&Support> {
        self.discrete.as_ref().map(|d| &d.support)
    }

    /// Support index of every P-value, when a support is attached.
    pub fn levels(&self) -> Option<&[usize]> {
        self.discrete.as_ref().map(|d| d.levels.as_slice())
    }

    pub fn frequencies(&self) -> Option<SupportFrequencies> {
        self.discrete
            .as_ref()
            .map(|d| tally(d.support.clone(), &d.levels))
    }
}
