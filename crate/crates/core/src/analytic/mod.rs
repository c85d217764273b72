//! Closed-form stationary probabilities for limited processor-sharing loss
//! systems.
//!
//! Every function is pure. Products of traffic intensities are carried in log
//! space and normalized with a log-sum-exp, so the results stay finite for any
//! finite input.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::stochastic::{ArrivalRates, LengthDistribution};
use crate::{Error, Result};
use special::{ln_factorial, ln_poisson_bracket, log_sum_exp, poisson_pmf, poisson_upper_tail};

/// Probabilities must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Per-job service rates `c_1..c_n`; above `n` jobs the rate stays `c_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ServiceRateProfile {
    rates: Vec<f64>,
}

impl ServiceRateProfile {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::invalid("c", "at least one service rate required"));
        }
        if let Some(bad) = rates.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::invalid(
                "c",
                format!("service rates must be positive and finite, got {bad}"),
            ));
        }
        Ok(Self { rates })
    }

    /// Egalitarian sharing of a unit-rate server: `c_i = 1/i`.
    pub fn egalitarian(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| 1.0 / i as f64).collect())
    }

    /// Every job served at rate one regardless of occupancy (`n` servers).
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn capacity(&self) -> usize {
        self.rates.len()
    }

    /// Rate received by each job when `jobs` are present (`jobs >= 1`).
    pub fn rate_at(&self, jobs: usize) -> f64 {
        debug_assert!(jobs >= 1);
        self.rates[jobs.min(self.rates.len()) - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_egalitarian(&self) -> bool {
        self.rates
            .iter()
            .enumerate()
            .all(|(i, c)| (c * (i + 1) as f64 - 1.0).abs() <= 1e-14)
    }

    pub fn is_unit(&self) -> bool {
        self.rates.iter().all(|c| *c == 1.0)
    }
}

impl TryFrom<Vec<f64>> for ServiceRateProfile {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ServiceRateProfile> for Vec<f64> {
    fn from(p: ServiceRateProfile) -> Self {
        p.rates
    }
}

/// Traffic intensities `rho_1..rho_n`; the last entry is the top-level
/// intensity that governs the tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoProfile {
    pub rho: Vec<f64>,
}

impl RhoProfile {
    pub fn top(&self) -> f64 {
        *self.rho.last().expect("rho profile is never empty")
    }

    /// `ln prod_{j<=i} rho_j` for `i = 0..=n`.
    fn ln_partial_products(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rho.len() + 1);
        let mut acc = 0.0;
        out.push(acc);
        for r in &self.rho {
            acc += r.ln();
            out.push(acc);
        }
        out
    }
}

/// Stationary (or estimated) occupancy probabilities `p_0..p_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub p: Vec<f64>,
}

impl StateDistribution {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::invalid("p", "need at least levels 0 and 1"));
        }
        if let Some(bad) = p.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
            return Err(Error::invalid("p", format!("entry {bad} outside [0, 1]")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid("p", format!("sums to {total}")));
        }
        Ok(Self { p })
    }

    fn from_log_weights(ln_w: &[f64]) -> Result<Self> {
        let lse = log_sum_exp(ln_w);
        if !lse.is_finite() {
            return Err(Error::NonNormalizable(format!(
                "normalizing constant is {lse}"
            )));
        }
        Self::new(ln_w.iter().map(|w| (w - lse).exp()).collect())
    }

    pub fn capacity(&self) -> usize {
        self.p.len() - 1
    }

    /// Probability that all `n` positions are busy; under Poisson input this
    /// is the loss probability.
    pub fn loss(&self) -> f64 {
        self.p[self.capacity()]
    }

    pub fn mean_jobs(&self) -> f64 {
        self.p.iter().enumerate().map(|(i, p)| i as f64 * p).sum()
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n", "capacity must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_rate(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and nonnegative, got {v}"),
        ))
    }
}

fn check_mean(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "b",
            format!("mean length must be positive, got {b}"),
        ))
    }
}

fn check_shapes(n: usize, rates: &ArrivalRates, profile: &ServiceRateProfile) -> Result<()> {
    check_capacity(n)?;
    if rates.capacity() != n {
        return Err(Error::invalid(
            "lambda",
            format!("expected {} rates, got {}", n + 1, rates.capacity() + 1),
        ));
    }
    if profile.capacity() != n {
        return Err(Error::invalid(
            "c",
            format!("expected {n} service rates, got {}", profile.capacity()),
        ));
    }
    Ok(())
}

/// State probabilities of the `n`-server system (unit rate per job) with
/// shortest-remaining-length loss: Poisson masses below `n`, the Poisson tail
/// at `n`.
pub fn nserver_srl_probs(n: usize, lambda: f64, b: f64) -> Result<StateDistribution> {
    check_capacity(n)?;
    check_rate("lambda", lambda)?;
    check_mean(b)?;
    let x = lambda * b;
    let mut p: Vec<f64> = (0..n).map(|i| poisson_pmf(i, x)).collect();
    p.push(poisson_upper_tail(n, x));
    StateDistribution::new(p)
}

/// Intensities `rho_i = lambda_i b / (i c_i)`.
pub fn limited_ps_rhos(rates: &ArrivalRates, b: f64, profile: &ServiceRateProfile) -> RhoProfile {
    let n = profile.capacity();
    RhoProfile {
        rho: (1..=n)
            .map(|i| rates.at(i) * b / (i as f64 * profile.rate_at(i)))
            .collect(),
    }
}

/// `ln` of the aggregated weight of levels `>= n` in the unlimited twin,
/// relative to level 0:
/// `n! prod rho_j / (n rho)^n * (exp(n rho) - sum_{i<n} (n rho)^i / i!)`.
fn ln_tail_weight(n: usize, rhos: &RhoProfile, ln_prod_n: f64) -> f64 {
    let top = rhos.top();
    if top == 0.0 || ln_prod_n == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let x = n as f64 * top;
    ln_factorial(n) + ln_prod_n - n as f64 * x.ln() + ln_poisson_bracket(n, x)
}

/// Stationary probabilities of the limited processor-sharing system with
/// shortest-remaining-length loss under state-dependent Poisson input.
///
/// Levels below `n` follow the product form of the unlimited twin; level `n`
/// collects the whole tail of that twin. Valid for any length law with mean
/// `b`.
pub fn limited_ps_probs(
    n: usize,
    rates: &ArrivalRates,
    b: f64,
    profile: &ServiceRateProfile,
) -> Result<StateDistribution> {
    check_shapes(n, rates, profile)?;
    check_mean(b)?;
    let rhos = limited_ps_rhos(rates, b, profile);
    let mut ln_w = rhos.ln_partial_products();
    ln_w[n] = ln_tail_weight(n, &rhos, ln_w[n]);
    StateDistribution::from_log_weights(&ln_w)
}

/// Probability `p̂_i` that the unlimited twin (rate `c_n` per job above `n`,
/// arrivals at `lambda_n` above `n`) holds `i` jobs.
pub fn unlimited_ps_prob(
    rates: &ArrivalRates,
    b: f64,
    profile: &ServiceRateProfile,
    i: usize,
) -> Result<f64> {
    let n = profile.capacity();
    check_shapes(n, rates, profile)?;
    check_mean(b)?;
    let rhos = limited_ps_rhos(rates, b, profile);
    let mut ln_w = rhos.ln_partial_products();
    let ln_prod_n = ln_w[n];
    ln_w[n] = ln_tail_weight(n, &rhos, ln_prod_n);
    let ln_norm = log_sum_exp(&ln_w);
    if !ln_norm.is_finite() {
        return Err(Error::NonNormalizable(format!(
            "unlimited tail sum is {ln_norm}"
        )));
    }
    let ln_wi = if i < n {
        ln_w[i]
    } else if rhos.top() == 0.0 {
        if i == n {
            ln_prod_n
        } else {
            f64::NEG_INFINITY
        }
    } else {
        let x = n as f64 * rhos.top();
        ln_prod_n + (i - n) as f64 * x.ln() + ln_factorial(n) - ln_factorial(i)
    };
    Ok((ln_wi - ln_norm).exp())
}

/// Head `p̂_0..p̂_{n-1}` of the unlimited twin's distribution.
pub fn unlimited_ps_head(
    rates: &ArrivalRates,
    b: f64,
    profile: &ServiceRateProfile,
) -> Result<Vec<f64>> {
    (0..profile.capacity())
        .map(|i| unlimited_ps_prob(rates, b, profile, i))
        .collect()
}

/// Limited-system distribution from the unlimited twin's head: levels below
/// `n` are copied and level `n` receives the complement.
pub fn truncate_unlimited(head: &[f64]) -> Result<StateDistribution> {
    if head.is_empty() {
        return Err(Error::invalid("head", "capacity must be at least 1"));
    }
    if let Some(bad) = head.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(Error::invalid(
            "head",
            format!("entry {bad} is not a probability"),
        ));
    }
    let total: f64 = head.iter().sum();
    if total > 1.0 + SUM_TOLERANCE {
        return Err(Error::invalid("head", format!("sums to {total} > 1")));
    }
    let mut p = head.to_vec();
    p.push((1.0 - total).max(0.0));
    StateDistribution::new(p)
}

/// Loss probability of the egalitarian system (`c_i = 1/i`) with constant
/// Poisson rate `lambda` and mean length `b`, in closed form.
pub fn egalitarian_loss(n: usize, lambda: f64, b: f64) -> Result<f64> {
    check_capacity(n)?;
    check_rate("lambda", lambda)?;
    check_mean(b)?;
    let x = lambda * b;
    if x == 0.0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    // numerator B = exp(n x) - sum_{i<n} (n x)^i / i!
    // denominator (n^n / n!) sum_{i<n} x^i + B
    let ln_b = ln_poisson_bracket(n, nf * x);
    let ln_geo: Vec<f64> = (0..n).map(|i| i as f64 * x.ln()).collect();
    let ln_head = nf * nf.ln() - ln_factorial(n) + log_sum_exp(&ln_geo);
    Ok(1.0 / (1.0 + (ln_head - ln_b).exp()))
}

/// Loss probability under FCFD with constant length `b`, unit service rate
/// per job and Poisson rate `lambda`: the probability that at least `n` other
/// jobs arrive during a job's service.
pub fn fcfd_constant_loss(n: usize, lambda: f64, b: f64) -> Result<f64> {
    check_capacity(n)?;
    check_rate("lambda", lambda)?;
    check_mean(b)?;
    let x = lambda * b;
    let head: f64 = (0..n).map(|i| poisson_pmf(i, x)).sum();
    Ok((1.0 - head).max(0.0))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            format!("must lie in (0, 1], got {alpha}"),
        ))
    }
}

/// Intensities of the FCFD system whose lengths are zero with probability
/// `1 - alpha` and exponential(`mu`) otherwise.
pub fn zero_inflated_rhos(
    rates: &ArrivalRates,
    alpha: f64,
    mu: f64,
    profile: &ServiceRateProfile,
) -> RhoProfile {
    let n = profile.capacity();
    let mut rho: Vec<f64> = (1..n)
        .map(|i| alpha * rates.at(i) / (i as f64 * profile.rate_at(i) * mu))
        .collect();
    let ln = rates.at(n);
    rho.push(alpha * ln / ((1.0 - alpha) * ln + n as f64 * profile.rate_at(n) * mu));
    RhoProfile { rho }
}

/// Stationary probabilities of the FCFD system with zero-inflated exponential
/// lengths. The top level is left either by a completion or by a zero-length
/// arrival, which displaces the oldest job and departs at once.
pub fn zero_inflated_fcfd_probs(
    n: usize,
    rates: &ArrivalRates,
    alpha: f64,
    mu: f64,
    profile: &ServiceRateProfile,
) -> Result<StateDistribution> {
    check_shapes(n, rates, profile)?;
    check_alpha(alpha)?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid("mu", format!("must be positive, got {mu}")));
    }
    let rhos = zero_inflated_rhos(rates, alpha, mu, profile);
    StateDistribution::from_log_weights(&rhos.ln_partial_products())
}

/// Top-level intensity `(1 - beta) / beta`, where `beta` is the transform of
/// the length law served at total rate `n c_n`, evaluated at `lambda_n`.
pub fn top_rho_from_lst(
    dist: &LengthDistribution,
    lambda_n: f64,
    n: usize,
    c_n: f64,
) -> Result<f64> {
    check_capacity(n)?;
    check_rate("lambda", lambda_n)?;
    if !(c_n.is_finite() && c_n > 0.0) {
        return Err(Error::invalid("c", format!("must be positive, got {c_n}")));
    }
    dist.validate()?;
    let beta = dist.lst(lambda_n / (n as f64 * c_n))?;
    if beta <= 0.0 {
        return Err(Error::Singular(format!(
            "transform vanishes at lambda_n = {lambda_n}"
        )));
    }
    Ok((1.0 - beta) / beta)
}

/// Erlang's loss formula by the stable upward recursion.
pub fn erlang_b(n: usize, rho: f64) -> Result<f64> {
    check_rate("rho", rho)?;
    let mut blocking = 1.0;
    for k in 1..=n {
        blocking = rho * blocking / (k as f64 + rho * blocking);
    }
    Ok(blocking)
}

/// Mean number in system `L` and mean time in system `V = L / lambda`.
pub fn little_sojourn(dist: &StateDistribution, lambda: f64) -> Result<(f64, f64)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(
            "lambda",
            format!("must be positive for Little's law, got {lambda}"),
        ));
    }
    let l = dist.mean_jobs();
    Ok((l, l / lambda))
}

/// Loss probability of the zero-inflated FCFD system as `mu -> 0`, which is
/// `alpha` regardless of the arrival and service profiles.
pub fn small_rate_loss_limit(
    n: usize,
    rates: &ArrivalRates,
    alpha: f64,
    profile: &ServiceRateProfile,
) -> Result<f64> {
    check_shapes(n, rates, profile)?;
    check_alpha(alpha)?;
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn egal(n: usize) -> ServiceRateProfile {
        ServiceRateProfile::egalitarian(n).unwrap()
    }

    fn lam(n: usize, l: f64) -> ArrivalRates {
        ArrivalRates::constant(n, l).unwrap()
    }

    #[test]
    fn nserver_examples() {
        let d = nserver_srl_probs(1, 0.5, 1.0).unwrap();
        assert!(close(d.loss(), 1.0 - (-0.5f64).exp(), 1e-15));
        let d = nserver_srl_probs(2, 1.0, 1.0).unwrap();
        assert!(close(d.loss(), 1.0 - 2.0 * (-1.0f64).exp(), 1e-15));
        let d = nserver_srl_probs(3, 0.0, 1.0).unwrap();
        assert_eq!(d.p, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(nserver_srl_probs(3, 1.0, 0.0).is_err());
    }

    #[test]
    fn limited_ps_table_values() {
        let d = limited_ps_probs(2, &lam(2, 1.0), 1.0, &egal(2)).unwrap();
        assert!(close(d.loss(), 0.523, 5e-4));
        let d = limited_ps_probs(5, &lam(5, 2.0), 1.0, &egal(5)).unwrap();
        assert!(close(d.loss(), 0.964, 5e-4));
        let d = limited_ps_probs(3, &lam(3, 0.0), 1.0, &egal(3)).unwrap();
        assert_eq!(d.p, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_top_rate_makes_top_unreachable() {
        let rates = ArrivalRates::new(vec![1.0, 1.0, 0.0]).unwrap();
        let d = limited_ps_probs(2, &rates, 1.0, &egal(2)).unwrap();
        assert_eq!(d.loss(), 0.0);
        assert!(close(d.p[0], 0.5, 1e-15));
    }

    #[test]
    fn egalitarian_loss_examples() {
        assert!(close(egalitarian_loss(1, 0.5, 1.0).unwrap(), 0.393, 5e-4));
        assert!(close(egalitarian_loss(5, 1.5, 1.0).unwrap(), 0.820, 5e-4));
        assert_eq!(egalitarian_loss(2, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn fcfd_constant_examples() {
        assert!(close(
            fcfd_constant_loss(1, 1.0, 1.0).unwrap(),
            0.6321,
            5e-5
        ));
        assert!(close(
            fcfd_constant_loss(2, 1.0, 1.0).unwrap(),
            0.2642,
            5e-5
        ));
        assert_eq!(fcfd_constant_loss(2, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_inflated_examples() {
        let d = zero_inflated_fcfd_probs(2, &lam(2, 1.0), 0.5, 0.5, &egal(2)).unwrap();
        for (got, want) in d.p.iter().zip([0.4, 0.4, 0.2]) {
            assert!(close(*got, want, 1e-14));
        }
        let d = zero_inflated_fcfd_probs(2, &lam(2, 1.0), 1.0, 1.0, &egal(2)).unwrap();
        for got in &d.p {
            assert!(close(*got, 1.0 / 3.0, 1e-14));
        }
        let d = zero_inflated_fcfd_probs(1, &lam(1, 0.1), 0.5, 0.5, &egal(1)).unwrap();
        let r = 0.05 / 0.55;
        assert!(close(d.loss(), r / (1.0 + r), 1e-15));
        assert!(zero_inflated_fcfd_probs(2, &lam(2, 1.0), 0.0, 0.5, &egal(2)).is_err());
        assert!(zero_inflated_fcfd_probs(2, &lam(2, 1.0), 1.5, 0.5, &egal(2)).is_err());
    }

    #[test]
    fn top_rho_examples() {
        let zie = LengthDistribution::zero_inflated_exponential(0.5, 0.5).unwrap();
        let r = top_rho_from_lst(&zie, 1.0, 2, 0.5).unwrap();
        assert!(close(r, 0.5, 1e-15));
        let det = LengthDistribution::deterministic(1.0).unwrap();
        let r = top_rho_from_lst(&det, 1.0, 1, 1.0).unwrap();
        assert!(close(r, std::f64::consts::E - 1.0, 1e-14));
        assert!(close(r / (1.0 + r), 1.0 - (-1.0f64).exp(), 1e-15));
        assert_eq!(top_rho_from_lst(&det, 0.0, 3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn top_rho_singular_transform() {
        let det = LengthDistribution::deterministic(1.0).unwrap();
        assert!(matches!(
            top_rho_from_lst(&det, f64::MAX, 1, 1e-300),
            Err(Error::Singular(_)) | Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn erlang_examples() {
        assert!(close(erlang_b(1, 0.5).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(close(erlang_b(2, 1.0).unwrap(), 0.2, 1e-15));
        assert_eq!(erlang_b(4, 0.0).unwrap(), 0.0);
        assert_eq!(erlang_b(0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn little_examples() {
        let d = StateDistribution::new(vec![0.4, 0.4, 0.2]).unwrap();
        let (l, v) = little_sojourn(&d, 1.0).unwrap();
        assert!(close(l, 0.8, 1e-15) && close(v, 0.8, 1e-15));
        let d = StateDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(little_sojourn(&d, 1.0).unwrap(), (0.0, 0.0));
        let d = limited_ps_probs(1, &lam(1, 0.5), 1.0, &egal(1)).unwrap();
        let (l, v) = little_sojourn(&d, 0.5).unwrap();
        assert!(close(l, 0.3935, 5e-5));
        assert!(close(v, 0.787, 5e-4));
        assert!(little_sojourn(&d, 0.0).is_err());
    }

    #[test]
    fn truncate_examples() {
        let d = truncate_unlimited(&[0.5, 0.3]).unwrap();
        assert!(close(d.p[2], 0.2, 1e-15));
        let e = (-1.0f64).exp();
        let d = truncate_unlimited(&[e, e]).unwrap();
        assert!(close(d.loss(), 1.0 - 2.0 * e, 1e-15));
        assert!(truncate_unlimited(&[]).is_err());
        assert!(truncate_unlimited(&[0.7, 0.7]).is_err());
    }

    #[test]
    fn unlimited_head_agrees_with_limited() {
        let profile = ServiceRateProfile::new(vec![1.0, 0.5]).unwrap();
        let p0 = unlimited_ps_prob(&lam(2, 1.0), 1.0, &profile, 0).unwrap();
        let d = limited_ps_probs(2, &lam(2, 1.0), 1.0, &profile).unwrap();
        assert!(close(p0, d.p[0], 1e-15));
        assert_eq!(
            unlimited_ps_prob(&lam(2, 0.0), 1.0, &profile, 0).unwrap(),
            1.0
        );
    }

    #[test]
    fn unlimited_tail_sums_to_limited_top() {
        // direct summation of the twin's tail, independent of the
        // incomplete-gamma route
        for (n, l) in [(1, 0.5), (2, 1.0), (5, 2.0), (3, 0.3)] {
            let rates = lam(n, l);
            let d = limited_ps_probs(n, &rates, 1.0, &egal(n)).unwrap();
            let tail: f64 = (n..n + 400)
                .map(|i| unlimited_ps_prob(&rates, 1.0, &egal(n), i).unwrap())
                .sum();
            assert!(close(tail, d.loss(), 1e-13), "n={n} l={l}");
        }
    }

    #[test]
    fn small_rate_limit() {
        assert_eq!(
            small_rate_loss_limit(3, &lam(3, 1.0), 0.5, &egal(3)).unwrap(),
            0.5
        );
        assert_eq!(
            small_rate_loss_limit(3, &lam(3, 1.0), 1.0, &egal(3)).unwrap(),
            1.0
        );
        let d = zero_inflated_fcfd_probs(3, &lam(3, 1.0), 0.5, 1e-6, &egal(3)).unwrap();
        assert!(close(d.loss(), 0.5, 1e-4));
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(limited_ps_probs(3, &lam(2, 1.0), 1.0, &egal(3)).is_err());
        assert!(limited_ps_probs(2, &lam(2, 1.0), 1.0, &egal(3)).is_err());
        assert!(limited_ps_probs(0, &lam(2, 1.0), 1.0, &egal(2)).is_err());
    }

    #[test]
    fn extreme_load_is_finite() {
        let d = limited_ps_probs(10, &lam(10, 200.0), 1.0, &egal(10)).unwrap();
        assert!(d.loss() > 0.999);
        let total: f64 = d.p.iter().sum();
        assert!(close(total, 1.0, 1e-12));
    }
}
