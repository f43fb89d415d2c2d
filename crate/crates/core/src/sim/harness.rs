use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{Scenario, ScenarioGenerator};
use super::ScenarioConfig;
use crate::error::{Error, Result};
use crate::exact::{JiConfig, TestEngine};
use crate::pi0::{estimate_pi0, Method, Pi0Estimate, Pi0Options, RandParams};
use crate::qvalue::{qvalues, reject};
use crate::support::PValueSample;

/// Rejection counts of one method in one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateTruth {
    /// false rejections
    pub v: usize,
    pub r: usize,
    /// true rejections
    pub s: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    /// Number of false nulls.
    pub m1: usize,
    pub counts: Vec<ReplicateTruth>,
    /// Capped π₀ estimate per method.
    pub pi0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean of `V / max(R, 1)`.
    pub fdr: f64,
    /// Mean of `S / m1` over replicates with `m1 > 0`; `None` if there are none.
    pub power: Option<f64>,
    pub pi0_mean: f64,
    /// `pi0_mean - (1 - delta)`.
    pub pi0_bias: f64,
    /// Sample standard deviation; `None` with a single replicate.
    pub pi0_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: ScenarioConfig,
    pub methods: Vec<MethodSummary>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything a replicate needs that depends only on the configuration.
#[derive(Debug, Clone)]
pub struct Prepared {
    config: ScenarioConfig,
    generator: ScenarioGenerator,
    engine: TestEngine,
}

impl Prepared {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        Ok(Prepared {
            config: config.clone(),
            generator: ScenarioGenerator::new(config)?,
            engine: TestEngine::new(config.test, config.n1, config.n2, JiConfig::default())?,
        })
    }

    pub fn engine(&self) -> &TestEngine {
        &self.engine
    }

    /// RNG of replicate `index`: stream `index` of the configured seed.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index as u64);
        rng
    }

    pub fn scenario(&self, index: usize) -> Scenario {
        self.generator.generate(&mut self.rng(index))
    }

    pub fn pvalues(&self, scenario: &Scenario) -> Result<PValueSample> {
        let p = (0..scenario.m())
            .map(|i| self.engine.pvalue(&scenario.row_x(i), &scenario.row_y(i)))
            .collect::<Result<Vec<_>>>()?;
        self.engine.sample(&p)
    }

    pub fn replicate(&self, index: usize) -> Result<ReplicateRecord> {
        let c = &self.config;
        let scenario = self.scenario(index);
        let sample = self.pvalues(&scenario)?;
        let m1 = scenario.null_mask.iter().filter(|&&n| !n).count();
        let options = Pi0Options {
            rand: RandParams {
                seed: splitmix64(c.seed ^ splitmix64(index as u64)),
                ..RandParams::default()
            },
            correction: c.pi0_correction,
            ..Pi0Options::default()
        };
        let mut counts = Vec::with_capacity(c.methods.len());
        let mut pi0 = Vec::with_capacity(c.methods.len());
        for &method in &c.methods {
            let est = match method {
                Method::Real => Pi0Estimate::known(c.pi0()),
                _ => estimate_pi0(method, &sample, &options),
            }
            .map_err(|e| Error::Config(format!("replicate {index}, method {method}: {e}")))?;
            let rep = reject(&qvalues(&sample, &est), c.alpha)?;
            let v = rep.rejected.iter().filter(|&&i| scenario.null_mask[i]).count();
            counts.push(ReplicateTruth {
                v,
                r: rep.r,
                s: rep.r - v,
            });
            pi0.push(est.value);
        }
        Ok(ReplicateRecord { m1, counts, pi0 })
    }
}

/// Worker count from `DQ_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("DQ_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs the study with the worker count from `DQ_THREADS` (rayon's default
/// when unset).
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<McReport> {
    run_monte_carlo_with_threads(config, threads_from_env())
}

/// Replicates run in parallel; records are reduced in replicate order so the
/// report does not depend on `threads`.
pub fn run_monte_carlo_with_threads(config: &ScenarioConfig, threads: Option<usize>) -> Result<McReport> {
    let prepared = Prepared::new(config)?;
    let run = || {
        (0..config.replicates)
            .into_par_iter()
            .map(|i| prepared.replicate(i))
            .collect::<Result<Vec<_>>>()
    };
    let records = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(summarize(config, &records))
}

pub(crate) fn summarize(config: &ScenarioConfig, records: &[ReplicateRecord]) -> McReport {
    let n = records.len() as f64;
    let methods = config
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let mut fdr = 0.0;
            let (mut power, mut with_alt) = (0.0, 0usize);
            let mut pi0_sum = 0.0;
            for rec in records {
                let c = rec.counts[k];
                fdr += c.v as f64 / c.r.max(1) as f64;
                if rec.m1 > 0 {
                    power += c.s as f64 / rec.m1 as f64;
                    with_alt += 1;
                }
                pi0_sum += rec.pi0[k];
            }
            let pi0_mean = pi0_sum / n;
            let pi0_sd = (records.len() > 1).then(|| {
                let ss: f64 = records.iter().map(|r| (r.pi0[k] - pi0_mean).powi(2)).sum();
                (ss / (n - 1.0)).sqrt()
            });
            MethodSummary {
                method,
                fdr: fdr / n,
                power: (with_alt > 0).then(|| power / with_alt as f64),
                pi0_mean,
                pi0_bias: pi0_mean - config.pi0(),
                pi0_sd,
            }
        })
        .collect();
    McReport {
        config: config.clone(),
        methods,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::TestKind;
    use crate::qvalue::adaptive_bh_reject;
    use crate::sim::{DependenceKind, Family};

    fn config(test: TestKind, methods: Vec<Method>, delta: f64) -> ScenarioConfig {
        ScenarioConfig {
            family: Family::Location,
            mu: 2.0,
            m: 50,
            n1: 4,
            n2: 4,
            delta,
            dependence: DependenceKind::Dependent,
            test,
            replicates: 12,
            alpha: 0.05,
            seed: 42,
            methods,
            pi0_correction: Default::default(),
        }
    }

    #[test]
    fn summaries_by_hand() {
        let c = config(TestKind::Wilcoxon, vec![Method::Ss], 0.5);
        let t = |v, r| ReplicateTruth { v, r, s: r - v };
        let recs = vec![
            ReplicateRecord { m1: 10, counts: vec![t(1, 4)], pi0: vec![0.6] },
            ReplicateRecord { m1: 0, counts: vec![t(0, 0)], pi0: vec![0.8] },
        ];
        let s = &summarize(&c, &recs).methods[0];
        assert!((s.fdr - 0.125).abs() < 1e-15);
        assert!((s.power.unwrap() - 0.3).abs() < 1e-15);
        assert!((s.pi0_bias - 0.2).abs() < 1e-15);
        assert!((s.pi0_sd.unwrap() - (0.02f64).sqrt()).abs() < 1e-15);
        let one = summarize(&c, &recs[..1]);
        assert_eq!(one.methods[0].pi0_sd, None);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let c = config(TestKind::Wilcoxon, Method::ESTIMATORS.to_vec(), 0.3);
        let a = run_monte_carlo_with_threads(&c, Some(1)).unwrap();
        let b = run_monte_carlo_with_threads(&c, Some(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn real_method_matches_adaptive_bh() {
        let c = config(TestKind::AbsMean, vec![Method::Real], 0.4);
        let p = Prepared::new(&c).unwrap();
        for i in 0..5 {
            let sc = p.scenario(i);
            let sample = p.pvalues(&sc).unwrap();
            let bh = adaptive_bh_reject(&sample, &Pi0Estimate::known(0.6).unwrap(), 0.05).unwrap();
            assert_eq!(p.replicate(i).unwrap().counts[0].r, bh.r);
        }
    }

    #[test]
    fn global_null_has_no_power() {
        let c = config(TestKind::TWelch, vec![Method::Ss, Method::St], 0.0);
        let r = run_monte_carlo_with_threads(&c, Some(2)).unwrap();
        assert!(r.methods.iter().all(|m| m.power.is_none()));
        let c = config(TestKind::SignedRank, vec![Method::Liang], 0.5);
        run_monte_carlo_with_threads(&c, Some(2)).unwrap();
    }
}
