//! Job-length laws, arrival-rate profiles and reproducible random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the sum of hyperexponential branch weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// One branch of a hyperexponential law: with probability `weight` the length
/// is exponential with the given `rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub weight: f64,
    pub rate: f64,
}

/// Law of the job length (work measured in service units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthDistribution {
    Deterministic {
        length: f64,
    },
    Exponential {
        mu: f64,
    },
    /// `P(L > x) = alpha * exp(-mu x)`: zero with probability `1 - alpha`,
    /// otherwise exponential with rate `mu`.
    ZeroInflatedExponential {
        alpha: f64,
        mu: f64,
    },
    Hyperexponential {
        branches: Vec<Branch>,
    },
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

impl LengthDistribution {
    pub fn deterministic(length: f64) -> Result<Self> {
        let d = Self::Deterministic { length };
        d.validate()?;
        Ok(d)
    }

    pub fn exponential(mu: f64) -> Result<Self> {
        let d = Self::Exponential { mu };
        d.validate()?;
        Ok(d)
    }

    pub fn zero_inflated_exponential(alpha: f64, mu: f64) -> Result<Self> {
        let d = Self::ZeroInflatedExponential { alpha, mu };
        d.validate()?;
        Ok(d)
    }

    pub fn hyperexponential(branches: Vec<Branch>) -> Result<Self> {
        let d = Self::Hyperexponential { branches };
        d.validate()?;
        Ok(d)
    }

    /// Two-branch hyperexponential with balanced means, matching the given
    /// mean and squared coefficient of variation (`scv >= 1`).
    pub fn hyperexponential_with_scv(mean: f64, scv: f64) -> Result<Self> {
        positive_finite("mean", mean)?;
        if !(scv.is_finite() && scv >= 1.0) {
            return Err(Error::invalid("scv", format!("must be >= 1, got {scv}")));
        }
        let p = 0.5 * (1.0 + ((scv - 1.0) / (scv + 1.0)).sqrt());
        Self::hyperexponential(vec![
            Branch {
                weight: p,
                rate: 2.0 * p / mean,
            },
            Branch {
                weight: 1.0 - p,
                rate: 2.0 * (1.0 - p) / mean,
            },
        ])
    }

    /// Checks admissibility: every law must have a positive, finite mean.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Deterministic { length } => positive_finite("length", *length),
            Self::Exponential { mu } => positive_finite("mu", *mu),
            Self::ZeroInflatedExponential { alpha, mu } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::invalid(
                        "alpha",
                        format!("must lie in (0, 1], got {alpha}"),
                    ));
                }
                positive_finite("mu", *mu)
            }
            Self::Hyperexponential { branches } => {
                if branches.is_empty() {
                    return Err(Error::invalid("branches", "at least one branch required"));
                }
                let mut total = 0.0;
                for b in branches {
                    if !(b.weight.is_finite() && b.weight >= 0.0) {
                        return Err(Error::invalid(
                            "weight",
                            format!("must be a probability, got {}", b.weight),
                        ));
                    }
                    positive_finite("rate", b.rate)?;
                    total += b.weight;
                }
                if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    return Err(Error::invalid(
                        "branches",
                        format!("weights sum to {total}, expected 1"),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Deterministic { length } => *length,
            Self::Exponential { mu } => 1.0 / mu,
            Self::ZeroInflatedExponential { alpha, mu } => alpha / mu,
            Self::Hyperexponential { branches } => branches.iter().map(|b| b.weight / b.rate).sum(),
        }
    }

    /// Laplace-Stieltjes transform `E[exp(-s L)]`.
    pub fn lst(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::invalid("s", format!("must be nonnegative, got {s}")));
        }
        if s.is_infinite() {
            return Ok(match self {
                Self::ZeroInflatedExponential { alpha, .. } => 1.0 - alpha,
                _ => 0.0,
            });
        }
        Ok(match self {
            Self::Deterministic { length } => (-s * length).exp(),
            Self::Exponential { mu } => mu / (mu + s),
            Self::ZeroInflatedExponential { alpha, mu } => 1.0 - alpha * s / (s + mu),
            Self::Hyperexponential { branches } => branches
                .iter()
                .map(|b| b.weight * b.rate / (b.rate + s))
                .sum(),
        })
    }

    /// Variance of the law; used to size sampling tolerances.
    pub fn variance(&self) -> f64 {
        match self {
            Self::Deterministic { .. } => 0.0,
            Self::Exponential { mu } => 1.0 / (mu * mu),
            Self::ZeroInflatedExponential { alpha, mu } => {
                let m = alpha / mu;
                2.0 * alpha / (mu * mu) - m * m
            }
            Self::Hyperexponential { branches } => {
                let m = self.mean();
                let second: f64 = branches
                    .iter()
                    .map(|b| 2.0 * b.weight / (b.rate * b.rate))
                    .sum();
                second - m * m
            }
        }
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match self {
            Self::Deterministic { length } => *length,
            Self::Exponential { mu } => stream.exp1() / mu,
            Self::ZeroInflatedExponential { alpha, mu } => {
                if stream.uniform() < *alpha {
                    stream.exp1() / mu
                } else {
                    0.0
                }
            }
            Self::Hyperexponential { branches } => {
                let u = stream.uniform();
                let mut acc = 0.0;
                let mut rate = branches[branches.len() - 1].rate;
                for b in branches {
                    acc += b.weight;
                    if u < acc {
                        rate = b.rate;
                        break;
                    }
                }
                stream.exp1() / rate
            }
        }
    }
}

/// A seeded random stream. `(seed, index)` pairs select independent,
/// reproducible ChaCha substreams.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard exponential variate.
    pub fn exp1(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }
}

/// Poisson arrival rates `lambda_0..lambda_n`, indexed by the number of jobs
/// present. Levels above `n` use `lambda_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ArrivalRates {
    by_level: Vec<f64>,
}

impl ArrivalRates {
    pub fn new(by_level: Vec<f64>) -> Result<Self> {
        if by_level.len() < 2 {
            return Err(Error::invalid(
                "lambda",
                format!("need n + 1 >= 2 rates, got {}", by_level.len()),
            ));
        }
        if let Some(bad) = by_level.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::invalid(
                "lambda",
                format!("rates must be finite and nonnegative, got {bad}"),
            ));
        }
        Ok(Self { by_level })
    }

    pub fn constant(n: usize, lambda: f64) -> Result<Self> {
        Self::new(vec![lambda; n + 1])
    }

    /// The capacity `n` these rates were built for.
    pub fn capacity(&self) -> usize {
        self.by_level.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.by_level
    }

    pub fn at(&self, level: usize) -> f64 {
        self.by_level[level.min(self.capacity())]
    }

    pub fn max(&self) -> f64 {
        self.by_level.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.by_level.iter().all(|l| *l == self.by_level[0])
    }
}

impl TryFrom<Vec<f64>> for ArrivalRates {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ArrivalRates> for Vec<f64> {
    fn from(r: ArrivalRates) -> Self {
        r.by_level
    }
}
