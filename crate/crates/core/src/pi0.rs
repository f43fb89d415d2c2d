//! Estimators of the proportion of true null hypotheses.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::SmoothingSpline;
use crate::support::{rational_to_f64, PValueSample, Rational, Support, SupportFrequencies};

/// π₀ methods. `Real` plugs in a known π₀ and exists for simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Ss,
    St,
    Liang,
    Chen,
    Rand,
    Real,
}

impl Method {
    pub const ESTIMATORS: [Method; 5] = [Method::Ss, Method::St, Method::Liang, Method::Chen, Method::Rand];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ss => "SS",
            Method::St => "ST",
            Method::Liang => "Liang",
            Method::Chen => "Chen",
            Method::Rand => "Rand",
            Method::Real => "Real",
        }
    }

    /// Whether the method needs the support of discrete P-values.
    pub fn needs_support(self) -> bool {
        matches!(self, Method::Liang | Method::Chen | Method::Rand)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ss" => Ok(Method::Ss),
            "st" => Ok(Method::St),
            "liang" => Ok(Method::Liang),
            "chen" => Ok(Method::Chen),
            "rand" => Ok(Method::Rand),
            "real" => Ok(Method::Real),
            _ => Err(Error::Config(format!(
                "unknown pi0 method '{s}' (expected SS, ST, Liang, Chen, Rand or Real)"
            ))),
        }
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pi0Estimate {
    /// `min(raw, 1)`
    pub value: f64,
    pub raw: f64,
    pub method: Method,
    pub lambda_chosen: Option<f64>,
    /// Set when the estimator fell back to a default choice.
    pub warning: Option<String>,
}

impl Pi0Estimate {
    fn from_raw(raw: f64, method: Method, lambda_chosen: Option<f64>) -> Result<Self> {
        if !(raw > 0.0) {
            return Err(Error::NonPositivePi0(raw));
        }
        Ok(Pi0Estimate {
            value: raw.min(1.0),
            raw,
            method,
            lambda_chosen,
            warning: None,
        })
    }

    /// A known proportion, e.g. the true `1 - delta` of a simulation.
    pub fn known(pi0: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 <= 1.0) {
            return Err(Error::Domain {
                value: pi0,
                domain: "pi0 in (0, 1]",
            });
        }
        Self::from_raw(pi0, Method::Real, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChenParams {
    pub guiding_count: usize,
}

impl Default for ChenParams {
    fn default() -> Self {
        ChenParams { guiding_count: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandParams {
    pub replications: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for RandParams {
    fn default() -> Self {
        RandParams {
            replications: 100,
            lambda: 0.5,
            seed: 0,
        }
    }
}

/// Finite-sample terms of the tail-count estimators: the `+ 1` of Storey's
/// numerator and Chen's `1 / ((1 - tau) m)`. `Omitted` gives the plain
/// `#{pv > lambda} / (m (1 - lambda))` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    PseudoCount,
    Omitted,
}

impl Correction {
    fn offset(self) -> f64 {
        match self {
            Correction::PseudoCount => 1.0,
            Correction::Omitted => 0.0,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: lambda,
            domain: "lambda in [0, 1)",
        })
    }
}

fn storey_raw(m: usize, above: usize, lambda: f64, c: Correction) -> f64 {
    (above as f64 + c.offset()) / (m as f64 * (1.0 - lambda))
}

fn count_above(values: &[f64], lambda: f64) -> usize {
    values.iter().filter(|&&p| p > lambda).count()
}

/// `(#{pv > lambda} + 1) / (m (1 - lambda))`.
pub fn storey_pi0(sample: &PValueSample, lambda: f64) -> Result<Pi0Estimate> {
    storey_with(sample, lambda, Correction::default())
}

fn storey_with(sample: &PValueSample, lambda: f64, c: Correction) -> Result<Pi0Estimate> {
    check_lambda(lambda)?;
    let raw = storey_raw(sample.m(), count_above(sample.values(), lambda), lambda, c);
    Pi0Estimate::from_raw(raw, Method::Ss, Some(lambda))
}

/// Grid `0, 0.01, ..., 0.95` used by [`st_pi0`].
pub fn st_grid() -> Vec<f64> {
    (0..=95).map(|i| i as f64 / 100.0).collect()
}

/// Smoothing-spline estimator: spline with 3 degrees of freedom through
/// `(lambda, pi0(lambda))` on [`st_grid`], evaluated at 1.
pub fn st_pi0(sample: &PValueSample) -> Result<Pi0Estimate> {
    st_with(sample, Correction::default())
}

fn st_with(sample: &PValueSample, c: Correction) -> Result<Pi0Estimate> {
    if sample.m() < 10 {
        return Err(Error::SampleSize(format!(
            "the spline estimator needs m >= 10, got {}",
            sample.m()
        )));
    }
    let grid = st_grid();
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let ys: Vec<f64> = grid
        .iter()
        .map(|&l| storey_raw(m, m - sorted.partition_point(|&p| p <= l), l, c))
        .collect();
    let spline = SmoothingSpline::fit(&grid, &ys, 3.0)?;
    Pi0Estimate::from_raw(spline.eval(1.0), Method::St, None)
}

/// Right-boundary procedure over the support points `<= 1/2` (excluding 1),
/// with baseline `lambda_0 = 0`.
pub fn liang_pi0(freqs: &SupportFrequencies) -> Result<Pi0Estimate> {
    liang_with(freqs, Correction::default())
}

fn liang_with(freqs: &SupportFrequencies, c: Correction) -> Result<Pi0Estimate> {
    let support = freqs.support();
    let m = freqs.m() as usize;
    if m == 0 {
        return Err(Error::Empty("P-values"));
    }
    let half = Rational::new(1, 2);
    let last = support.len() - 1;
    let candidates: Vec<usize> = (0..last).filter(|&i| support.point(i) <= half).collect();
    let pi0_at = |idx: Option<usize>| match idx {
        None => storey_raw(m, m, 0.0, c),
        Some(i) => storey_raw(m, freqs.count_above_index(i) as usize, support.point_f64(i), c),
    };
    if candidates.is_empty() {
        let mut est = Pi0Estimate::from_raw(pi0_at(None), Method::Liang, Some(0.0))?;
        est.warning = Some("no support point at or below 1/2; lambda set to 0".into());
        return Ok(est);
    }
    let nu = candidates.len();
    let mut chosen = candidates[nu - 1];
    let mut prev = pi0_at(None);
    for &c in &candidates[..nu - 1] {
        let cur = pi0_at(Some(c));
        if cur >= prev {
            chosen = c;
            break;
        }
        prev = cur;
    }
    Pi0Estimate::from_raw(pi0_at(Some(chosen)), Method::Liang, Some(support.point_f64(chosen)))
}

/// Average of truncated trial estimators over guiding values `tau_j`.
pub fn chen_pi0(freqs: &SupportFrequencies, params: ChenParams) -> Result<Pi0Estimate> {
    chen_with(freqs, params, Correction::default())
}

fn chen_with(freqs: &SupportFrequencies, params: ChenParams, c: Correction) -> Result<Pi0Estimate> {
    if params.guiding_count == 0 {
        return Err(Error::Config("Chen guiding count must be at least 1".into()));
    }
    let support = freqs.support();
    let m = freqs.m() as f64;
    if m == 0.0 {
        return Err(Error::Empty("P-values"));
    }
    let q = rational_to_f64(&support.min_point());
    let taus: Vec<f64> = if q < 0.5 && params.guiding_count > 1 {
        let b = params.guiding_count;
        let t1 = q + 0.5 * (0.5 - q);
        (0..b)
            .map(|j| {
                if j + 1 == b {
                    0.5
                } else {
                    t1 + (0.5 - t1) * j as f64 / (b - 1) as f64
                }
            })
            .collect()
    } else {
        vec![0.5]
    };
    let points = support.points_f64();
    let mut total = 0.0;
    for &tau in &taus {
        // largest support point at or below tau; 0 when there is none
        let k = points.partition_point(|&t| t <= tau);
        let (lambda, above) = if k == 0 {
            (0.0, freqs.m())
        } else {
            (points[k - 1], freqs.count_above_index(k - 1))
        };
        let beta = c.offset() / ((1.0 - tau) * m) + above as f64 / (m * (1.0 - lambda));
        total += beta.min(1.0);
    }
    Pi0Estimate::from_raw(total / taus.len() as f64, Method::Chen, None)
}

/// Storey's estimator on randomized P-values `t_k - u (t_k - t_{k-1})`,
/// averaged over `replications` runs. Run `r` draws from the ChaCha8 stream
/// `r` of `seed`.
pub fn randomized_pi0(sample: &PValueSample, params: RandParams) -> Result<Pi0Estimate> {
    randomized_with(sample, params, Correction::default())
}

fn randomized_with(sample: &PValueSample, params: RandParams, c: Correction) -> Result<Pi0Estimate> {
    check_lambda(params.lambda)?;
    if params.replications == 0 {
        return Err(Error::Config("Rand replications must be at least 1".into()));
    }
    let (support, levels) = match (sample.support(), sample.levels()) {
        (Some(s), Some(l)) => (s, l),
        _ => return Err(Error::MissingSupport("Rand")),
    };
    let points = support.points_f64();
    let lower: Vec<f64> = (0..points.len())
        .map(|k| if k == 0 { 0.0 } else { points[k - 1] })
        .collect();
    let m = levels.len();
    let mut total = 0.0;
    for run in 0..params.replications {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(run as u64);
        let above = levels
            .iter()
            .filter(|&&k| {
                let u: f64 = rng.random();
                points[k] - u * (points[k] - lower[k]) > params.lambda
            })
            .count();
        total += storey_raw(m, above, params.lambda, c);
    }
    Pi0Estimate::from_raw(total / params.replications as f64, Method::Rand, Some(params.lambda))
}

/// `t_k - u (t_k - t_{k-1})` with `t_0 = 0`.
pub fn randomized_value(support: &Support, level: usize, u: f64) -> f64 {
    let hi = support.point_f64(level);
    let lo = if level == 0 { 0.0 } else { support.point_f64(level - 1) };
    hi - u * (hi - lo)
}

/// Randomized P-values for one draw of uniforms from `rng`.
pub fn randomize<R: Rng>(sample: &PValueSample, rng: &mut R) -> Result<Vec<f64>> {
    let (support, levels) = match (sample.support(), sample.levels()) {
        (Some(s), Some(l)) => (s, l),
        _ => return Err(Error::MissingSupport("Rand")),
    };
    Ok(levels
        .iter()
        .map(|&k| randomized_value(support, k, rng.random()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pi0Options {
    pub chen: ChenParams,
    pub rand: RandParams,
    pub correction: Correction,
}

/// Runs one estimator. `Real` is rejected; use [`Pi0Estimate::known`].
pub fn estimate_pi0(method: Method, sample: &PValueSample, options: &Pi0Options) -> Result<Pi0Estimate> {
    let c = options.correction;
    let freqs = || sample.frequencies().ok_or(Error::MissingSupport(method.name()));
    match method {
        Method::Ss => storey_with(sample, 0.5, c),
        Method::St => st_with(sample, c),
        Method::Liang => liang_with(&freqs()?, c),
        Method::Chen => chen_with(&freqs()?, options.chen, c),
        Method::Rand => randomized_with(sample, options.rand, c),
        Method::Real => Err(Error::Config(
            "the Real method needs the true pi0 and cannot be estimated".into(),
        )),
    }
}
