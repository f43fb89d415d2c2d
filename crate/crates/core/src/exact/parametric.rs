//! Parametric tests with continuous P-values.

use serde::{Deserialize, Serialize};

use super::TwoSampleData;
use crate::error::{Error, Result};
use crate::special::{f_cdf, f_sf, student_t_two_sided};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TVariant {
    Pooled,
    Welch,
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Two-sided two-sample t-test.
pub fn t_test(data: &TwoSampleData, variant: TVariant) -> Result<f64> {
    let (n1, n2) = (data.n1() as f64, data.n2() as f64);
    let (m1, v1) = mean_var(data.x());
    let (m2, v2) = mean_var(data.y());
    let (se2, df) = match variant {
        TVariant::Pooled => {
            let sp2 = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / (n1 + n2 - 2.0);
            (sp2 * (1.0 / n1 + 1.0 / n2), n1 + n2 - 2.0)
        }
        TVariant::Welch => {
            let (a, b) = (v1 / n1, v2 / n2);
            let se2 = a + b;
            (se2, se2 * se2 / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0)))
        }
    };
    if se2 <= 0.0 {
        return Err(Error::DegenerateVariance("both samples are constant"));
    }
    student_t_two_sided((m1 - m2) / se2.sqrt(), df)
}

/// Two-sided F-test for equal variances: `2 min(P(F <= f), P(F >= f))`,
/// capped at 1.
pub fn f_test(data: &TwoSampleData) -> Result<f64> {
    let (_, v1) = mean_var(data.x());
    let (_, v2) = mean_var(data.y());
    if v1 <= 0.0 || v2 <= 0.0 {
        return Err(Error::DegenerateVariance("a sample variance is zero"));
    }
    let ratio = v1 / v2;
    let (d1, d2) = (data.n1() as f64 - 1.0, data.n2() as f64 - 1.0);
    let lower = f_cdf(ratio, d1, d2)?;
    let upper = f_sf(ratio, d1, d2)?;
    Ok((2.0 * lower.min(upper)).min(1.0))
}

/// Levene's test: one-way ANOVA on absolute deviations from the group means.
pub fn levene_test(data: &TwoSampleData) -> Result<f64> {
    let dev = |v: &[f64]| {
        let (m, _) = mean_var(v);
        v.iter().map(|x| (x - m).abs()).collect::<Vec<_>>()
    };
    let (z1, z2) = (dev(data.x()), dev(data.y()));
    let (n1, n2) = (z1.len() as f64, z2.len() as f64);
    let (m1, m2) = (z1.iter().sum::<f64>() / n1, z2.iter().sum::<f64>() / n2);
    let grand = (n1 * m1 + n2 * m2) / (n1 + n2);
    let between = n1 * (m1 - grand).powi(2) + n2 * (m2 - grand).powi(2);
    let within: f64 = z1.iter().map(|z| (z - m1).powi(2)).sum::<f64>()
        + z2.iter().map(|z| (z - m2).powi(2)).sum::<f64>();
    if within <= 0.0 {
        return Err(Error::DegenerateVariance(
            "absolute deviations are constant within each group",
        ));
    }
    let df2 = n1 + n2 - 2.0;
    f_sf(between * df2 / within, 1.0, df2)
}

/// Two-sided one-sample t-test of zero mean.
pub fn one_sample_t_test(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::SampleSize(format!(
            "one-sample t-test needs n >= 2, got {}",
            sample.len()
        )));
    }
    let (m, v) = mean_var(sample);
    if v <= 0.0 {
        return Err(Error::DegenerateVariance("the sample is constant"));
    }
    let n = sample.len() as f64;
    student_t_two_sided(m / (v / n).sqrt(), n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma;

    fn data(x: &[f64], y: &[f64]) -> TwoSampleData {
        TwoSampleData::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn t_density(t: f64, df: f64) -> f64 {
        let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
        (c - (df + 1.0) / 2.0 * (1.0 + t * t / df).ln()).exp()
    }

    fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
        let lb = ln_gamma(d1 / 2.0) + ln_gamma(d2 / 2.0) - ln_gamma((d1 + d2) / 2.0);
        ((d1 / 2.0) * (d1 / d2).ln() + (d1 / 2.0 - 1.0) * x.ln()
            - (d1 + d2) / 2.0 * (1.0 + d1 * x / d2).ln()
            - lb)
            .exp()
    }

    #[test]
    fn pooled_t_against_integrated_density() {
        let p = t_test(&data(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]), TVariant::Pooled).unwrap();
        let t = 1.5f64.sqrt();
        let oracle = 1.0 - simpson(|u| t_density(u, 4.0), -t, t, 20_000);
        assert!((p - oracle).abs() < 1e-8, "{p} vs {oracle}");
        assert!((p - 0.2879).abs() < 5e-5);
    }

    #[test]
    fn welch_equals_pooled_for_equal_sizes_and_variances() {
        let d = data(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]);
        let a = t_test(&d, TVariant::Pooled).unwrap();
        let b = t_test(&d, TVariant::Welch).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn welch_uses_satterthwaite_df() {
        // v1 = 1, v2 = 4, n = 3: se^2 = 5/3, df = (5/3)^2 / ((1/9 + 16/9)/2) = 50/17
        let d = data(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]);
        let t = -1.0 / (5.0f64 / 3.0).sqrt();
        let want = student_t_two_sided(t, 50.0 / 17.0).unwrap();
        assert!((t_test(&d, TVariant::Welch).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn zero_statistics_give_one() {
        let d = data(&[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 1.0]);
        assert!((t_test(&d, TVariant::Pooled).unwrap() - 1.0).abs() < 1e-14);
        assert!((t_test(&d, TVariant::Welch).unwrap() - 1.0).abs() < 1e-14);
        assert!((f_test(&d).unwrap() - 1.0).abs() < 1e-12);
        let d = data(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        assert!((levene_test(&d).unwrap() - 1.0).abs() < 1e-14);
        assert!((one_sample_t_test(&[-1.0, 1.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn f_test_against_integrated_density() {
        let p = f_test(&data(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 5.0, 7.0])).unwrap();
        // P(F(3,3) <= 0.25); the density has an x^{1/2} singularity at 0, so
        // integrate in u = sqrt(x)
        let lower = simpson(|u| 2.0 * u * f_density(u * u, 3.0, 3.0), 1e-12, 0.5, 20_000);
        assert!((p - 2.0 * lower).abs() < 1e-8, "{p} vs {}", 2.0 * lower);
        assert!((p - 0.28476).abs() < 5e-5);
    }

    #[test]
    fn levene_matches_hand_anova() {
        // deviations: x -> (1, 0, 1), y -> (2, 0, 2)
        let p = levene_test(&data(&[1.0, 2.0, 3.0], &[0.0, 2.0, 4.0])).unwrap();
        // group means 2/3, 4/3; between = 3 (1/3)^2 2 = 2/3; within = 2/3 + 8/3 = 10/3
        let f = (2.0 / 3.0) * 4.0 / (10.0 / 3.0);
        assert!((p - f_sf(f, 1.0, 4.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        let d = data(&[1.0, 1.0], &[1.0, 1.0]);
        assert!(matches!(t_test(&d, TVariant::Pooled), Err(Error::DegenerateVariance(_))));
        assert!(matches!(t_test(&d, TVariant::Welch), Err(Error::DegenerateVariance(_))));
        assert!(matches!(f_test(&d), Err(Error::DegenerateVariance(_))));
        assert!(matches!(levene_test(&d), Err(Error::DegenerateVariance(_))));
        assert!(matches!(one_sample_t_test(&[2.0, 2.0]), Err(Error::DegenerateVariance(_))));
        assert!(matches!(one_sample_t_test(&[2.0]), Err(Error::SampleSize(_))));
    }
}
