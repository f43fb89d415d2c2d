//! Plug-in FDR estimation, q-values and rejection sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pi0::{Method, Pi0Estimate};
use crate::support::PValueSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QValueResult {
    /// Aligned with the input order.
    pub qvalues: Vec<f64>,
    pub pi0_used: Pi0Estimate,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub alpha: f64,
    /// Indices into the input, increasing.
    pub rejected: Vec<usize>,
    pub r: usize,
}

impl RejectionReport {
    fn new(alpha: f64, mut rejected: Vec<usize>) -> Self {
        rejected.sort_unstable();
        RejectionReport {
            alpha,
            r: rejected.len(),
            rejected,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            value: alpha,
            domain: "alpha in (0, 1)",
        })
    }
}

/// `m pi0 t / #{pv <= t}`, uncapped.
pub fn estimate_fdr(sample: &PValueSample, pi0: &Pi0Estimate, t: f64) -> Result<f64> {
    let count = sample.values().iter().filter(|&&p| p <= t).count();
    if count == 0 {
        return Err(Error::EmptyRejection(t));
    }
    Ok(sample.m() as f64 * pi0.value * t / count as f64)
}

/// q-values: the estimated FDR at each observed P-value, followed by a
/// running minimum from the largest P-value down, capped at 1. Tied
/// P-values share a q-value.
pub fn qvalues(sample: &PValueSample, pi0: &Pi0Estimate) -> QValueResult {
    let p = sample.values();
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut q = vec![0.0; m];
    let mut running = f64::INFINITY;
    let mut end = m;
    while end > 0 {
        // tie block order[start..end]; #{pv <= t} = end
        let t = p[order[end - 1]];
        let mut start = end - 1;
        while start > 0 && p[order[start - 1]] == t {
            start -= 1;
        }
        let fdr = m as f64 * pi0.value * t / end as f64;
        running = running.min(fdr);
        for &i in &order[start..end] {
            q[i] = running.min(1.0);
        }
        end = start;
    }
    QValueResult {
        qvalues: q,
        pi0_used: pi0.clone(),
        method: pi0.method,
    }
}

/// `{i : q_i <= alpha}`.
pub fn reject(q: &QValueResult, alpha: f64) -> Result<RejectionReport> {
    check_alpha(alpha)?;
    let rejected = q
        .qvalues
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= alpha)
        .map(|(i, _)| i)
        .collect();
    Ok(RejectionReport::new(alpha, rejected))
}

/// Benjamini-Hochberg step-up at level `min(alpha / pi0, 1)`.
pub fn adaptive_bh_reject(sample: &PValueSample, pi0: &Pi0Estimate, alpha: f64) -> Result<RejectionReport> {
    check_alpha(alpha)?;
    let level = (alpha / pi0.value).min(1.0);
    let p = sample.values();
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let k = (1..=m)
        .rev()
        .find(|&k| p[order[k - 1]] <= k as f64 * level / m as f64)
        .unwrap_or(0);
    Ok(RejectionReport::new(alpha, order[..k].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(v: &[f64]) -> PValueSample {
        PValueSample::new(v.to_vec()).unwrap()
    }

    fn pi0(v: f64) -> Pi0Estimate {
        Pi0Estimate::known(v).unwrap()
    }

    #[test]
    fn fdr_examples() {
        let mut v = vec![0.01; 10];
        v.extend(vec![0.9; 90]);
        assert!((estimate_fdr(&sample(&v), &pi0(0.5), 0.05).unwrap() - 0.25).abs() < 1e-15);
        assert!((estimate_fdr(&sample(&v), &pi0(0.5), 1.0).unwrap() - 0.5).abs() < 1e-15);
        let s = sample(&[0.01, 0.02, 0.04]);
        assert!((estimate_fdr(&s, &pi0(1.0), 0.02).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(estimate_fdr(&s, &pi0(1.0), 0.005), Err(Error::EmptyRejection(0.005)));
    }

    #[test]
    fn qvalue_examples() {
        let q = qvalues(&sample(&[0.01, 0.02, 0.04]), &pi0(1.0)).qvalues;
        for (a, b) in q.iter().zip([0.03, 0.03, 0.04]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(qvalues(&sample(&[0.3]), &pi0(0.5)).qvalues, vec![0.15]);
        assert_eq!(qvalues(&sample(&[0.8; 5]), &pi0(1.0)).qvalues, vec![0.8; 5]);
        let q = qvalues(&sample(&[0.9, 0.95]), &Pi0Estimate { value: 1.0, raw: 3.0, ..pi0(1.0) });
        assert!(q.qvalues.iter().all(|&v| v <= 1.0));
    }

    #[test]
    fn rejection_examples() {
        let q = qvalues(&sample(&[0.04, 0.01, 0.02]), &pi0(1.0));
        assert_eq!(reject(&q, 0.05).unwrap().rejected, vec![0, 1, 2]);
        assert_eq!(reject(&q, 0.035).unwrap().rejected, vec![1, 2]);
        assert_eq!(reject(&q, 0.01).unwrap().r, 0);
        assert!(reject(&q, 1.0).is_err());
    }

    #[test]
    fn bh_examples() {
        let s = sample(&[0.001, 0.008, 0.039, 0.041, 0.042, 0.06, 0.074, 0.205]);
        // plain BH at 0.05: p_(5) = 0.042 <= 5 * 0.05 / 8 = 0.03125 fails; p_(2) = 0.008 <= 0.0125
        assert_eq!(adaptive_bh_reject(&s, &pi0(1.0), 0.05).unwrap().rejected, vec![0, 1]);
        let s = sample(&[0.5, 0.7, 0.9]);
        assert_eq!(adaptive_bh_reject(&s, &pi0(1.0), 0.05).unwrap().r, 0);
    }

    fn brute_force_q(v: &[f64], pi: f64) -> Vec<f64> {
        let s = sample(v);
        v.iter()
            .map(|&p| {
                v.iter()
                    .filter(|&&t| t >= p)
                    .map(|&t| estimate_fdr(&s, &pi0(pi), t).unwrap())
                    .fold(f64::INFINITY, f64::min)
                    .min(1.0)
            })
            .collect()
    }

    fn discrete_or_continuous(max: usize) -> impl Strategy<Value = Vec<f64>> {
        prop_oneof![
            proptest::collection::vec(1e-6f64..=1.0, 1..max),
            proptest::collection::vec(1u32..=35, 1..max)
                .prop_map(|v| v.into_iter().map(|k| k as f64 / 35.0).collect()),
        ]
    }

    proptest! {
        #[test]
        fn matches_brute_force(v in discrete_or_continuous(13), pi in 0.01f64..=1.0) {
            let q = qvalues(&sample(&v), &pi0(pi)).qvalues;
            prop_assert_eq!(q, brute_force_q(&v, pi));
        }

        #[test]
        fn equivalent_to_adaptive_bh(v in discrete_or_continuous(200), pi in 0.01f64..=1.0, alpha in 0.001f64..0.5) {
            let s = sample(&v);
            let est = pi0(pi);
            prop_assert_eq!(
                reject(&qvalues(&s, &est), alpha).unwrap().rejected,
                adaptive_bh_reject(&s, &est, alpha).unwrap().rejected
            );
        }

        #[test]
        fn monotone_in_pvalue(v in discrete_or_continuous(100), pi in 0.01f64..=1.0) {
            let q = qvalues(&sample(&v), &pi0(pi)).qvalues;
            let mut pairs: Vec<(f64, f64)> = v.iter().copied().zip(q).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            prop_assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
            prop_assert!(pairs.iter().all(|p| p.1 <= 1.0));
        }

        #[test]
        fn scaling_pi0_scales_uncapped_qvalues(v in discrete_or_continuous(60), c in 0.1f64..1.0) {
            let s = sample(&v);
            let a = qvalues(&s, &pi0(1.0)).qvalues;
            let b = qvalues(&s, &pi0(c)).qvalues;
            for (x, y) in a.iter().zip(&b) {
                if *x < 1.0 {
                    prop_assert!((y - c * x).abs() <= 1e-12 * x);
                }
            }
        }
    }
}
