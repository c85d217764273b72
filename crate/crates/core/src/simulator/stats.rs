//! Output analysis: batch-means confidence intervals and Kolmogorov-Smirnov
//! tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Two-sided 95% half-width from independent batch values, using the
/// Student t quantile with `k - 1` degrees of freedom. Infinite with fewer
/// than two batches.
pub fn batch_half_width(values: &[f64]) -> f64 {
    let k = values.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (k - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975);
    t * (var / k as f64).sqrt()
}

/// Asymptotic Kolmogorov distribution tail `P(K > lambda)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-value with the Stephens small-sample correction for an effective
/// sample size `ne`.
fn ks_p_value(d: f64, ne: f64) -> f64 {
    let sq = ne.sqrt();
    kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// True when the null hypothesis is not rejected at `level`.
    pub pass: bool,
    pub level: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample KS statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let p = ks_p_value(d, na * nb / (na + nb));
    Ok(KsResult {
        statistic: d,
        p_value: p,
        pass: p >= level,
        level,
    })
}

/// One-sample KS test against the exponential law with the given rate.
pub fn ks_exponential(sample: &[f64], rate: f64, level: f64) -> Result<KsResult> {
    if sample.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(
            "rate",
            format!("must be positive, got {rate}"),
        ));
    }
    let s = sorted(sample);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        let f = 1.0 - (-rate * x.max(0.0)).exp();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let p = ks_p_value(d, n);
    Ok(KsResult {
        statistic: d,
        p_value: p,
        pass: p >= level,
        level,
    })
}
