//! Poisson tail numerics via the regularized incomplete gamma function.
//!
//! For integer `n >= 1`, `P(N >= n)` with `N ~ Poisson(x)` equals the
//! regularized lower incomplete gamma `P(n, x)`. The closed forms in this crate
//! need the unnormalized bracket `exp(x) - sum_{i<n} x^i / i!`, which is
//! `exp(x) * P(n, x)`; it is returned as a logarithm so that neither the
//! exponential overflow nor the cancellation for small `x` shows up.

const EPS: f64 = 1e-17;
const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// `ln(k!)`.
pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Series for `sum_{k>=0} x^k / ((n+1)(n+2)...(n+k))`, valid for all `x` but
/// used only where it converges quickly (`x < n + 1`).
fn lower_series(n: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut denom = n as f64;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term < sum * EPS {
            break;
        }
    }
    sum
}

/// Regularized upper incomplete gamma `Q(n, x)` by the modified Lentz
/// continued fraction; accurate for `x >= n + 1`.
fn upper_continued_fraction(n: usize, x: f64) -> f64 {
    let a = n as f64;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_factorial(n - 1)).exp() * h
}

/// `ln(exp(x) - sum_{i<n} x^i / i!)` for `x >= 0`. Returns `-inf` when the
/// bracket is zero (`x == 0`, `n >= 1`).
pub fn ln_poisson_bracket(n: usize, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if n == 0 {
        return x;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    if x < n as f64 + 1.0 {
        n as f64 * x.ln() - ln_factorial(n) + lower_series(n, x).ln()
    } else {
        x + (-upper_continued_fraction(n, x)).ln_1p()
    }
}

/// `P(N >= n)` for `N ~ Poisson(x)`.
pub fn poisson_upper_tail(n: usize, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (ln_poisson_bracket(n, x) - x).exp()
}

/// `P(N = k)` for `N ~ Poisson(x)`.
pub fn poisson_pmf(k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-x + k as f64 * x.ln() - ln_factorial(k)).exp()
}

/// `ln(sum exp(v))`, ignoring `-inf` entries.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
