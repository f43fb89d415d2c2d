use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{solve_lyapunov, sym_inv_sqrt};
use super::{DependenceSpec, Law, ScenarioConfig};
use crate::error::{Error, Result};
use crate::special::{exp_quantile_upper, normal_sf};

/// VAR(1) sampler `W_t = A W_{t-1} + e_t` whose rows are rescaled by
/// `S^{-1/2}`, `S` the stationary covariance, so each row is N(0, I).
#[derive(Debug, Clone)]
pub struct GroupGenerator {
    a: DMatrix<f64>,
    sigma: DMatrix<f64>,
    chol: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
    zero: bool,
}

impl GroupGenerator {
    pub fn new(spec: DependenceSpec, eta: usize) -> Result<Self> {
        if eta == 0 {
            return Err(Error::SampleSize("group size must be positive".into()));
        }
        let a = spec.matrix(eta);
        // Cov(W_t) = A Cov(W_{t-1}) A^T + I, i.e. the Lyapunov form in A^T
        let sigma = solve_lyapunov(&a.transpose())?;
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .l();
        let inv_sqrt = sym_inv_sqrt(&sigma)?;
        let zero = a.iter().all(|&v| v == 0.0);
        Ok(GroupGenerator {
            a,
            sigma,
            chol,
            inv_sqrt,
            zero,
        })
    }

    pub fn eta(&self) -> usize {
        self.a.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Stationary covariance of `W_t`.
    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.inv_sqrt
    }

    fn noise<R: Rng>(eta: usize, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(eta, |_, _| rng.sample(StandardNormal))
    }

    /// `m x eta` matrix of standardized rows `S^{-1/2} W_t`, t = 0..m, with
    /// `W_0` drawn from the stationary law.
    pub fn generate<R: Rng>(&self, m: usize, rng: &mut R) -> DMatrix<f64> {
        let eta = self.eta();
        let mut out = DMatrix::zeros(m, eta);
        if self.zero {
            for i in 0..m {
                for j in 0..eta {
                    out[(i, j)] = rng.sample(StandardNormal);
                }
            }
            return out;
        }
        let mut w = &self.chol * Self::noise(eta, rng);
        for t in 0..m {
            if t > 0 {
                w = &self.a * w + Self::noise(eta, rng);
            }
            let x = &self.inv_sqrt * &w;
            out.set_row(t, &x.transpose());
        }
        out
    }
}

pub fn generate_group<R: Rng>(spec: DependenceSpec, eta: usize, m: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    Ok(GroupGenerator::new(spec, eta)?.generate(m, rng))
}

impl Law {
    /// `F^{-1}(Phi(z))`.
    pub fn from_standard_normal(self, z: f64) -> f64 {
        match self {
            Law::Normal { mean, sd } => mean + sd * z,
            // 1 - Phi(z) taken as the upper tail to keep precision for large z
            Law::Exponential { rate } => exp_quantile_upper(normal_sf(z), rate),
        }
    }
}

/// One simulated data set: `x` is `m x n1`, `y` is `m x n2` (empty for
/// one-sample tests).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    /// Component indices `(I_i, L_i)` in `1..=4` (`1..=2` for one-sample).
    pub labels: Vec<(u8, u8)>,
    pub null_mask: Vec<bool>,
}

impl Scenario {
    pub fn m(&self) -> usize {
        self.null_mask.len()
    }

    pub fn row_x(&self, i: usize) -> Vec<f64> {
        self.x.row(i).iter().copied().collect()
    }

    pub fn row_y(&self, i: usize) -> Vec<f64> {
        self.y.row(i).iter().copied().collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioGenerator {
    config: ScenarioConfig,
    gx: GroupGenerator,
    gy: Option<GroupGenerator>,
}

impl ScenarioGenerator {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let spec = DependenceSpec::from(config.dependence);
        let gx = GroupGenerator::new(spec, config.n1)?;
        let gy = if config.test.is_one_sample() {
            None
        } else {
            Some(GroupGenerator::new(spec, config.n2)?)
        };
        Ok(ScenarioGenerator {
            config: config.clone(),
            gx,
            gy,
        })
    }

    pub fn generate<R: Rng>(&self, rng: &mut R) -> Scenario {
        let c = &self.config;
        let one_sample = self.gy.is_none();
        let labels: Vec<(u8, u8)> = (0..c.m)
            .map(|_| {
                if one_sample {
                    let alt = rng.random::<f64>() < c.delta;
                    if alt {
                        (2, 2)
                    } else {
                        (1, 1)
                    }
                } else {
                    let i = rng.random_range(1..=4u8);
                    let swap = rng.random::<f64>() < c.delta;
                    // pairs 1 <-> 3 and 2 <-> 4
                    let l = if swap { (i + 1) % 4 + 1 } else { i };
                    (i, l)
                }
            })
            .collect();
        let mut x = self.gx.generate(c.m, rng);
        let mut y = match &self.gy {
            Some(g) => g.generate(c.m, rng),
            None => DMatrix::zeros(c.m, 0),
        };
        if one_sample {
            let laws = [Law::Normal { mean: 0.0, sd: 1.0 }, Law::Normal { mean: c.mu, sd: 1.0 }];
            for (i, &(lab, _)) in labels.iter().enumerate() {
                let law = laws[lab as usize - 1];
                x.row_mut(i).apply(|v| *v = law.from_standard_normal(*v));
            }
        } else {
            let laws = c.family.laws(c.mu);
            for (i, &(li, ll)) in labels.iter().enumerate() {
                let (fx, fy) = (laws[li as usize - 1], laws[ll as usize - 1]);
                x.row_mut(i).apply(|v| *v = fx.from_standard_normal(*v));
                y.row_mut(i).apply(|v| *v = fy.from_standard_normal(*v));
            }
        }
        let null_mask = labels.iter().map(|(i, l)| i == l && (!one_sample || *i == 1)).collect();
        Scenario {
            x,
            y,
            labels,
            null_mask,
        }
    }
}

pub fn generate_scenario<R: Rng>(config: &ScenarioConfig, rng: &mut R) -> Result<Scenario> {
    Ok(ScenarioGenerator::new(config)?.generate(rng))
}
