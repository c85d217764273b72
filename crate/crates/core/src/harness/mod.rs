//! Scenario files, formula selection and the reports behind the `lps` CLI.
//!
//! A scenario is one JSON document:
//!
//! ```json
//! {
//!   "name": "srl-n2",
//!   "n": 2,
//!   "lambda": 1.0,
//!   "service": "egalitarian",
//!   "length": { "kind": "exponential", "mu": 1.0 },
//!   "discipline": "srl_loss",
//!   "formulas": ["egalitarian_loss", "limited_ps"],
//!   "run": { "horizon": 1000000, "warmup": 100000, "replications": 1, "seed": 7 }
//! }
//! ```
//!
//! `lambda` is either one rate or the `n + 1` state-dependent rates;
//! `service` is `"egalitarian"`, `"unit"` or the list `c_1..c_n`.

mod report;
pub mod table1;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    egalitarian_loss, erlang_b, fcfd_constant_loss, limited_ps_probs, little_sojourn,
    nserver_srl_probs, zero_inflated_fcfd_probs, ServiceRateProfile, StateDistribution,
};
use crate::simulator::{Discipline, SystemSpec, Variant};
use crate::stochastic::{ArrivalRates, Branch, LengthDistribution};
use crate::{Error, Result};

pub use report::{
    compare, couple, render_analytic, render_comparison, render_coupling, render_estimates,
    simulate, ComparisonReport, ComparisonRow, CouplingOutcome,
};

/// Seed used when neither the scenario nor the command line gives one.
pub const DEFAULT_SEED: u64 = 20_240_611;
pub const DEFAULT_HORIZON: u64 = 1_000_000;

/// Closed-form results a scenario can request. Each has a descriptive wire
/// name and a short alias; both are accepted in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    /// Limited PS with shortest-remaining-length loss, state-dependent input.
    #[serde(rename = "limited_ps", alias = "theorem2")]
    LimitedPs,
    /// Closed-form loss of the egalitarian system with constant input.
    #[serde(rename = "egalitarian_loss", alias = "corollary2")]
    EgalitarianLoss,
    /// FCFD with constant lengths and unit per-job rates.
    #[serde(rename = "fcfd_constant", alias = "eq4")]
    FcfdConstant,
    /// FCFD with zero-inflated exponential lengths.
    #[serde(rename = "zero_inflated_fcfd", alias = "theorem5")]
    ZeroInflatedFcfd,
    #[serde(rename = "erlang_b")]
    ErlangB,
    /// `n`-server SRL system: Poisson head with the tail at level `n`.
    #[serde(rename = "nserver_srl", alias = "srl_tail")]
    NserverTail,
}

impl Formula {
    pub fn wire_name(self) -> &'static str {
        match self {
            Formula::LimitedPs => "limited_ps",
            Formula::EgalitarianLoss => "egalitarian_loss",
            Formula::FcfdConstant => "fcfd_constant",
            Formula::ZeroInflatedFcfd => "zero_inflated_fcfd",
            Formula::ErlangB => "erlang_b",
            Formula::NserverTail => "nserver_srl",
        }
    }

    /// Whether the formula describes the stationary behaviour of a simulated
    /// system with this discipline, length law and service profile.
    ///
    /// State-dependent input is excluded: the closed forms weight level `i`
    /// by `lambda_i`, while the simulated chain enters level `i` at rate
    /// `lambda_{i-1}`.
    pub fn describes(self, spec: &SystemSpec) -> bool {
        if !spec.rates.is_constant() {
            return false;
        }
        let deterministic = matches!(spec.length_law, LengthDistribution::Deterministic { .. });
        match self {
            Formula::LimitedPs | Formula::EgalitarianLoss | Formula::NserverTail => {
                spec.discipline == Discipline::SrlLoss
                    || (spec.discipline == Discipline::FcfdDisplace && deterministic)
            }
            Formula::FcfdConstant => spec.discipline != Discipline::BlockArriving,
            Formula::ZeroInflatedFcfd => spec.discipline == Discipline::FcfdDisplace,
            Formula::ErlangB => {
                spec.profile.is_unit()
                    && (spec.discipline == Discipline::BlockArriving
                        || (spec.discipline == Discipline::FcfdDisplace
                            && matches!(spec.length_law, LengthDistribution::Exponential { .. })))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaConfig {
    Constant(f64),
    ByLevel(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ServiceConfig {
    Named(ServiceKind),
    Rates(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    Egalitarian,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LengthConfig {
    Deterministic {
        length: f64,
    },
    Exponential {
        mu: f64,
    },
    ZeroInflatedExponential {
        alpha: f64,
        mu: f64,
    },
    Hyperexponential {
        branches: Vec<Branch>,
    },
    /// Balanced-means two-branch hyperexponential.
    HyperexponentialScv {
        mean: f64,
        scv: f64,
    },
}

impl LengthConfig {
    fn build(&self) -> Result<LengthDistribution> {
        match self {
            LengthConfig::Deterministic { length } => LengthDistribution::deterministic(*length),
            LengthConfig::Exponential { mu } => LengthDistribution::exponential(*mu),
            LengthConfig::ZeroInflatedExponential { alpha, mu } => {
                LengthDistribution::zero_inflated_exponential(*alpha, *mu)
            }
            LengthConfig::Hyperexponential { branches } => {
                LengthDistribution::hyperexponential(branches.clone())
            }
            LengthConfig::HyperexponentialScv { mean, scv } => {
                LengthDistribution::hyperexponential_with_scv(*mean, *scv)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: Option<u64>,
    pub warmup: Option<u64>,
    pub replications: Option<u64>,
    pub seed: Option<u64>,
}

fn default_discipline() -> Discipline {
    Discipline::SrlLoss
}

fn default_variant() -> Variant {
    Variant::Limited
}

/// Scenario file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub lambda: LambdaConfig,
    pub service: ServiceConfig,
    pub length: LengthConfig,
    #[serde(default = "default_discipline")]
    pub discipline: Discipline,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub formulas: Vec<Formula>,
    #[serde(default)]
    pub run: RunConfig,
}

/// Resolved run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunParams {
    pub horizon: u64,
    pub warmup: u64,
    pub replications: u64,
    pub seed: u64,
}

/// Command-line overrides for [`RunParams`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOverrides {
    pub horizon: Option<u64>,
    pub warmup: Option<u64>,
    pub replications: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: SystemSpec,
    pub formulas: Vec<Formula>,
    pub run: RunConfig,
}

impl Scenario {
    pub fn from_config(cfg: ScenarioConfig) -> Result<Self> {
        let n = cfg.n;
        if n == 0 {
            return Err(Error::invalid("n", "capacity must be at least 1"));
        }
        let rates = match cfg.lambda {
            LambdaConfig::Constant(l) => ArrivalRates::constant(n, l)?,
            LambdaConfig::ByLevel(v) => ArrivalRates::new(v)?,
        };
        let profile = match cfg.service {
            ServiceConfig::Named(ServiceKind::Egalitarian) => ServiceRateProfile::egalitarian(n)?,
            ServiceConfig::Named(ServiceKind::Unit) => ServiceRateProfile::unit(n)?,
            ServiceConfig::Rates(c) => ServiceRateProfile::new(c)?,
        };
        let spec = SystemSpec {
            n,
            rates,
            profile,
            length_law: cfg.length.build()?,
            discipline: cfg.discipline,
            variant: cfg.variant,
        };
        spec.validate()?;
        let scenario = Self {
            name: cfg.name,
            spec,
            formulas: cfg.formulas,
            run: cfg.run,
        };
        for f in &scenario.formulas {
            scenario.check_admissible(*f)?;
        }
        Ok(scenario)
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|source| Error::Config {
            path: origin.to_string(),
            source,
        })?;
        Self::from_config(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn params(&self, overrides: &RunOverrides) -> RunParams {
        let horizon = overrides
            .horizon
            .or(self.run.horizon)
            .unwrap_or(DEFAULT_HORIZON);
        RunParams {
            horizon,
            warmup: overrides.warmup.or(self.run.warmup).unwrap_or(horizon / 10),
            replications: overrides
                .replications
                .or(self.run.replications)
                .unwrap_or(1)
                .max(1),
            seed: overrides.seed.or(self.run.seed).unwrap_or(DEFAULT_SEED),
        }
    }

    fn constant_lambda(&self) -> Option<f64> {
        self.spec.rates.is_constant().then(|| self.spec.rates.at(0))
    }

    fn inadmissible(f: Formula, reason: &str) -> Error {
        Error::Inadmissible {
            formula: f.wire_name().to_string(),
            reason: reason.to_string(),
        }
    }

    pub fn check_admissible(&self, f: Formula) -> Result<()> {
        let spec = &self.spec;
        let constant = self.constant_lambda().is_some();
        let fail = |reason: &str| Err(Self::inadmissible(f, reason));
        match f {
            Formula::LimitedPs => Ok(()),
            Formula::EgalitarianLoss => {
                if !constant {
                    fail("requires a constant arrival rate")
                } else if !spec.profile.is_egalitarian() {
                    fail("requires egalitarian service rates c_i = 1/i")
                } else {
                    Ok(())
                }
            }
            Formula::FcfdConstant => {
                if !matches!(spec.length_law, LengthDistribution::Deterministic { .. }) {
                    fail("requires deterministic job lengths")
                } else if !spec.profile.is_unit() {
                    fail("requires unit service rates c_i = 1")
                } else if !constant {
                    fail("requires a constant arrival rate")
                } else {
                    Ok(())
                }
            }
            Formula::ZeroInflatedFcfd => match spec.length_law {
                LengthDistribution::ZeroInflatedExponential { .. }
                | LengthDistribution::Exponential { .. } => Ok(()),
                _ => fail("requires zero-inflated exponential (or exponential) lengths"),
            },
            Formula::ErlangB => {
                if constant {
                    Ok(())
                } else {
                    fail("requires a constant arrival rate")
                }
            }
            Formula::NserverTail => {
                if !constant {
                    fail("requires a constant arrival rate")
                } else if !spec.profile.is_unit() {
                    fail("requires unit service rates c_i = 1")
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Evaluates one formula for this scenario.
    pub fn evaluate(&self, f: Formula) -> Result<FormulaResult> {
        self.check_admissible(f)?;
        let spec = &self.spec;
        let n = spec.n;
        let b = spec.length_law.mean();
        let lambda = self.constant_lambda();
        let distribution = match f {
            Formula::LimitedPs | Formula::EgalitarianLoss => {
                Some(limited_ps_probs(n, &spec.rates, b, &spec.profile)?)
            }
            Formula::FcfdConstant | Formula::NserverTail => {
                Some(nserver_srl_probs(n, lambda.expect("admissible"), b)?)
            }
            Formula::ZeroInflatedFcfd => {
                let (alpha, mu) = match spec.length_law {
                    LengthDistribution::ZeroInflatedExponential { alpha, mu } => (alpha, mu),
                    LengthDistribution::Exponential { mu } => (1.0, mu),
                    _ => unreachable!("admissibility checked"),
                };
                Some(zero_inflated_fcfd_probs(
                    n,
                    &spec.rates,
                    alpha,
                    mu,
                    &spec.profile,
                )?)
            }
            Formula::ErlangB => None,
        };
        let loss = match f {
            Formula::EgalitarianLoss => egalitarian_loss(n, lambda.expect("admissible"), b)?,
            Formula::FcfdConstant => fcfd_constant_loss(n, lambda.expect("admissible"), b)?,
            Formula::ErlangB => erlang_b(n, lambda.expect("admissible") * b)?,
            _ => distribution.as_ref().expect("has distribution").loss(),
        };
        let (mean_jobs, sojourn) = match (&distribution, lambda) {
            (Some(d), Some(l)) if l > 0.0 => {
                let (lj, v) = little_sojourn(d, l)?;
                (Some(lj), Some(v))
            }
            (Some(d), _) => (Some(d.mean_jobs()), None),
            _ => (None, None),
        };
        Ok(FormulaResult {
            formula: f,
            distribution,
            loss,
            mean_jobs,
            sojourn,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaResult {
    pub formula: Formula,
    pub distribution: Option<StateDistribution>,
    pub loss: f64,
    pub mean_jobs: Option<f64>,
    pub sojourn: Option<f64>,
}
