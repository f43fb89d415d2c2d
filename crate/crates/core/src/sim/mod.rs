//! Simulation design: dependent samples, mixture scenarios and the Monte
//! Carlo harness.

mod generate;
mod harness;
mod linalg;

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use generate::{generate_group, generate_scenario, GroupGenerator, Scenario, ScenarioGenerator};
pub use harness::{
    run_monte_carlo, run_monte_carlo_with_threads, threads_from_env, McReport, MethodSummary, Prepared,
    ReplicateRecord, ReplicateTruth,
};
pub use linalg::{lyapunov_residual, solve_lyapunov, sym_inv_sqrt};

use crate::error::{Error, Result};
use crate::exact::TestKind;
use crate::pi0::{Correction, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceKind {
    Independent,
    Dependent,
}

/// Lower-bidiagonal VAR(1) coefficient matrix pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceSpec {
    pub kind: DependenceKind,
    pub diag: f64,
    pub subdiag: f64,
}

impl DependenceSpec {
    pub fn independent() -> Self {
        DependenceSpec {
            kind: DependenceKind::Independent,
            diag: 0.0,
            subdiag: 0.0,
        }
    }

    pub fn dependent() -> Self {
        DependenceSpec {
            kind: DependenceKind::Dependent,
            diag: 0.5,
            subdiag: 0.4,
        }
    }

    /// `eta x eta` matrix with `diag` on the diagonal and `subdiag` below it.
    pub fn matrix(&self, eta: usize) -> DMatrix<f64> {
        DMatrix::from_fn(eta, eta, |i, j| {
            if i == j {
                self.diag
            } else if i == j + 1 {
                self.subdiag
            } else {
                0.0
            }
        })
    }
}

impl From<DependenceKind> for DependenceSpec {
    fn from(kind: DependenceKind) -> Self {
        match kind {
            DependenceKind::Independent => Self::independent(),
            DependenceKind::Dependent => Self::dependent(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Location,
    Scale,
    Shape,
}

/// One of the four component laws of a family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl Family {
    /// The laws `f1..f4`; `mu` only affects the location family.
    pub fn laws(self, mu: f64) -> [Law; 4] {
        let n = |mean: f64, var: f64| Law::Normal { mean, sd: var.sqrt() };
        match self {
            Family::Location => [n(0.0, 1.0), n(0.0, 0.25), n(mu, 1.0), n(mu, 0.25)],
            Family::Scale => [n(0.0, 0.25), n(3.0, 0.25), n(0.0, 4.0), n(3.0, 9.0)],
            Family::Shape => [
                n(2.5, 0.25),
                n(3.5, 0.25),
                Law::Exponential { rate: 0.5 },
                Law::Exponential { rate: 1.0 / 3.0 },
            ],
        }
    }
}

/// Inputs of a Monte Carlo study. One-sample tests use the location family
/// with laws N(0, 1) (null) and N(mu, 1), and ignore `n2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub family: Family,
    #[serde(default)]
    pub mu: f64,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
    pub delta: f64,
    pub dependence: DependenceKind,
    pub test: TestKind,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Finite-sample terms of the tail-count π₀ estimators.
    #[serde(default)]
    pub pi0_correction: Correction,
}

impl ScenarioConfig {
    pub fn pi0(&self) -> f64 {
        1.0 - self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.n1 < 2 || (!self.test.is_one_sample() && self.n2 < 2) {
            return bad(format!("group sizes must be at least 2, got n1 = {}, n2 = {}", self.n1, self.n2));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        if !self.mu.is_finite() {
            return bad("mu must be finite".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        let mut seen = HashSet::new();
        for &method in &self.methods {
            if !seen.insert(method) {
                return bad(format!("method {method} listed twice"));
            }
            if method.needs_support() && !self.test.is_discrete() {
                return bad(format!(
                    "method {method} needs discrete P-values but test {} is continuous",
                    self.test
                ));
            }
            if method == Method::St && self.m < 10 {
                return bad("method ST needs m >= 10".into());
            }
        }
        if self.test.is_one_sample() && self.family != Family::Location {
            return bad("one-sample tests use the location family".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ScenarioConfig {
        serde_json::from_str(
            r#"{"family": "location", "mu": 2, "m": 100, "n1": 5, "n2": 5, "delta": 0.5,
                "dependence": "independent", "test": "wilcoxon", "replicates": 10,
                "alpha": 0.05, "seed": 1, "methods": ["SS", "ST", "Liang", "Chen", "Rand", "Real"]}"#,
        )
        .unwrap()
    }

    #[test]
    fn config_parses_and_validates() {
        let c = config();
        c.validate().unwrap();
        assert_eq!(c.pi0(), 0.5);
        let round: ScenarioConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(round, c);
    }

    #[test]
    fn invalid_configs() {
        let mut c = config();
        c.test = TestKind::TWelch;
        assert!(c.validate().is_err());
        c.methods = vec![Method::Ss, Method::St];
        c.validate().unwrap();
        c.delta = 1.0;
        assert!(c.validate().is_err());
        let mut c = config();
        c.methods.push(Method::Ss);
        assert!(c.validate().is_err());
        let err = serde_json::from_str::<ScenarioConfig>(r#"{"family": "location", "bogus": 1}"#);
        assert!(err.unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn dependent_matrix_is_lower_bidiagonal() {
        let a = DependenceSpec::dependent().matrix(3);
        assert_eq!(a, DMatrix::from_row_slice(3, 3, &[0.5, 0.0, 0.0, 0.4, 0.5, 0.0, 0.0, 0.4, 0.5]));
    }
}
