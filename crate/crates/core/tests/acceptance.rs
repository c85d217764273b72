//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use lps_core::analytic::{
    egalitarian_loss, fcfd_constant_loss, limited_ps_probs, nserver_srl_probs, top_rho_from_lst,
    zero_inflated_fcfd_probs, zero_inflated_rhos, ServiceRateProfile,
};
use lps_core::harness::table1;
use lps_core::simulator::{
    idle_periods, run, run_coupled, Discipline, RunOptions, SystemSpec, Variant,
};
use lps_core::stochastic::{ArrivalRates, LengthDistribution};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn egal(n: usize) -> ServiceRateProfile {
    ServiceRateProfile::egalitarian(n).unwrap()
}

fn constant(n: usize, lambda: f64) -> ArrivalRates {
    ArrivalRates::constant(n, lambda).unwrap()
}

fn srl_spec(n: usize, lambda: f64, law: LengthDistribution) -> SystemSpec {
    SystemSpec {
        n,
        rates: constant(n, lambda),
        profile: egal(n),
        length_law: law,
        discipline: Discipline::SrlLoss,
        variant: Variant::Limited,
    }
}

/// Exact rational for a decimal with at most one fractional digit.
fn tenths(x: f64) -> BigRational {
    BigRational::new(BigInt::from((x * 10.0).round() as i64), BigInt::from(10))
}

fn ratio(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Loss of the egalitarian SRL system (`b = 1`) by summing the birth-death
/// chain of the unlimited twin: weight `x^i` below `n`, then each step above
/// `n` multiplies by `n x / (n + k)`.
fn srl_oracle(n: usize, lambda: f64) -> f64 {
    let x = tenths(lambda);
    let mut head = BigRational::zero();
    let mut power = BigRational::one();
    for _ in 0..n {
        head += &power;
        power *= &x;
    }
    let nx = &x * BigInt::from(n);
    let mut term = BigRational::one();
    let mut series = BigRational::zero();
    let mut k = 0u64;
    loop {
        series += &term;
        k += 1;
        term = term * &nx / BigRational::from(BigInt::from(n as u64 + k));
        let t = term.to_f64().unwrap();
        // past k > 2 n x the ratio is below 1/2, so the rest is below `term`
        if (k as f64) > 2.0 * nx.to_f64().unwrap() && t < 1e-40 {
            break;
        }
    }
    let tail = power * series;
    (&tail / (head + &tail)).to_f64().unwrap()
}

/// Loss of the zero-inflated FCFD system with `c_i = 1/i` in exact
/// arithmetic: truncated product of `alpha lambda / mu` below `n` and
/// `alpha lambda / ((1 - alpha) lambda + mu)` on top.
fn fcfd_oracle(n: usize, lambda: f64, alpha: &BigRational, mu: &BigRational) -> f64 {
    let l = tenths(lambda);
    let low = alpha * &l / mu;
    let top = alpha * &l / ((BigRational::one() - alpha) * &l + mu);
    let mut weights = vec![BigRational::one()];
    for i in 1..=n {
        let r = if i < n { &low } else { &top };
        let w = weights[i - 1].clone() * r;
        weights.push(w);
    }
    let total: BigRational = weights.iter().fold(BigRational::zero(), |a, w| a + w);
    (&weights[n] / total).to_f64().unwrap()
}

fn table_reproduction() -> Outcome {
    let start = Instant::now();
    let rows = table1::compute().map_err(|e| e.to_string())?;
    let took = within_time(start, Duration::from_secs(1))?;
    let cells = table1::cells(&rows);
    ensure(cells.len() == 78, || format!("{} cells", cells.len()))?;
    let matched = cells.iter().filter(|c| c.abs_dev <= 0.0015).count();
    ensure(matched >= 70, || {
        format!("only {matched} of 78 cells match")
    })?;
    let mut worst: f64 = 0.0;
    for c in &cells {
        ensure(c.flag == (c.abs_dev > 0.0015), || {
            format!("row {} col {} flag inconsistent", c.row, c.col)
        })?;
        let oracle = match c.col {
            1 => srl_oracle(c.n, c.lambda),
            2 => fcfd_oracle(c.n, c.lambda, &ratio(1, 1), &ratio(1, 1)),
            _ => fcfd_oracle(c.n, c.lambda, &ratio(1, 2), &ratio(1, 2)),
        };
        let d = (c.computed - oracle).abs();
        worst = worst.max(d);
        ensure(d <= 1e-9, || {
            format!(
                "row {} col {}: {} vs oracle {oracle}",
                c.row, c.col, c.computed
            )
        })?;
    }
    Ok(format!(
        "{matched}/78 cells within 0.0015, {} flagged; all cells equal the exact oracle within {worst:.1e}; {took:?}",
        78 - matched
    ))
}

fn cross_identities() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    let loads = [0.05, 0.3, 1.0, 2.5, 5.0, 7.5, 10.0];
    for n in 1..=20 {
        let profile = egal(n);
        let unit = ServiceRateProfile::unit(n).unwrap();
        for &load in &loads {
            for &b in &[1.0, 0.5, 2.0] {
                let lambda = load / b;
                let rates = constant(n, lambda);
                let mut same = |a: f64, c: f64, what: &str| -> Result<(), String> {
                    let d = (a - c).abs();
                    worst = worst.max(d);
                    checked += 1;
                    ensure(d <= 1e-12, || {
                        format!("{what} n={n} lambda={lambda} b={b}: {a} vs {c}")
                    })
                };
                let product = limited_ps_probs(n, &rates, b, &profile).unwrap().loss();
                same(
                    egalitarian_loss(n, lambda, b).unwrap(),
                    product,
                    "egalitarian",
                )?;

                let tail = nserver_srl_probs(n, lambda, b).unwrap().p[n];
                same(
                    fcfd_constant_loss(n, lambda, b).unwrap(),
                    tail,
                    "constant-length",
                )?;
                let unit_product = limited_ps_probs(n, &rates, b, &unit).unwrap().p[n];
                same(unit_product, tail, "unit-rate product form")?;

                let mu = 1.0 / b;
                let r = lambda / mu;
                let geo: f64 = (0..=n).map(|i| r.powi(i as i32)).sum();
                let z = zero_inflated_fcfd_probs(n, &rates, 1.0, mu, &profile).unwrap();
                for i in 0..=n {
                    same(z.p[i], r.powi(i as i32) / geo, "truncated geometric")?;
                }

                for &alpha in &[0.25, 0.5, 1.0] {
                    let law = LengthDistribution::zero_inflated_exponential(alpha, mu).unwrap();
                    let c_n = profile.rate_at(n);
                    let via_transform = top_rho_from_lst(&law, lambda, n, c_n).unwrap();
                    let direct = alpha * lambda / ((1.0 - alpha) * lambda + n as f64 * c_n * mu);
                    same(via_transform, direct, "transform top intensity")?;
                    let top = zero_inflated_rhos(&rates, alpha, mu, &profile).top();
                    same(top, direct, "zero-inflated top intensity")?;
                }
            }
        }
    }
    let took = within_time(start, Duration::from_secs(1))?;
    Ok(format!(
        "{checked} identities, max deviation {worst:.1e}; {took:?}"
    ))
}

fn non_monotonicity() -> Outcome {
    let loss = |n, l| egalitarian_loss(n, l, 1.0).unwrap();
    let high = [loss(1, 2.0), loss(2, 2.0), loss(5, 2.0)];
    let low = [loss(1, 1.0), loss(2, 1.0), loss(5, 1.0)];
    ensure(high[0] < high[1] && high[1] < high[2], || {
        format!("load 2 not increasing: {high:?}")
    })?;
    ensure(low[0] > low[1] && low[1] > low[2], || {
        format!("load 1 not decreasing: {low:?}")
    })?;
    for (got, want) in high
        .iter()
        .zip([0.865, 0.892, 0.964])
        .chain(low.iter().zip([0.632, 0.523, 0.390]))
    {
        ensure((got - want).abs() <= 0.001, || format!("{got} vs {want}"))?;
    }
    Ok(format!(
        "load 2: {:.4} < {:.4} < {:.4}; load 1: {:.4} > {:.4} > {:.4}",
        high[0], high[1], high[2], low[0], low[1], low[2]
    ))
}

fn coupling() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let mut min_events = u64::MAX;
    let mut seed = 1000;
    for n in [1, 2, 5] {
        for lambda in [0.5, 1.0, 2.0] {
            for law in [
                LengthDistribution::exponential(1.0).unwrap(),
                LengthDistribution::deterministic(1.0).unwrap(),
            ] {
                seed += 1;
                let spec = srl_spec(n, lambda, law);
                let r = run_coupled(&spec, 60_000, seed)
                    .map_err(|e| format!("n={n} lambda={lambda}: {e}"))?;
                ensure(r.events >= 100_000, || format!("only {} events", r.events))?;
                min_events = min_events.min(r.events);
                runs += 1;
            }
        }
    }
    let took = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "{runs} coupled runs, at least {min_events} events each, no violations; {took:?}"
    ))
}

fn insensitivity() -> Outcome {
    let start = Instant::now();
    let laws = [
        (
            "deterministic",
            LengthDistribution::deterministic(1.0).unwrap(),
        ),
        ("exponential", LengthDistribution::exponential(1.0).unwrap()),
        (
            "hyperexponential",
            LengthDistribution::hyperexponential_with_scv(1.0, 4.0).unwrap(),
        ),
    ];
    let mut est = Vec::new();
    for (i, (name, law)) in laws.iter().enumerate() {
        let r = run(
            &srl_spec(2, 1.0, law.clone()),
            &RunOptions::new(1_000_000, 500 + i as u64),
        )
        .map_err(|e| e.to_string())?;
        ensure((r.loss_prob - 0.523).abs() <= 0.01, || {
            format!("{name}: loss {}", r.loss_prob)
        })?;
        est.push((name, r.loss_prob, r.loss_ci_half));
    }
    for i in 0..3 {
        for j in i + 1..3 {
            let (a, b) = (&est[i], &est[j]);
            ensure((a.1 - b.1).abs() <= a.2 + b.2, || {
                format!(
                    "{} {:.5}±{:.5} and {} {:.5}±{:.5} disjoint",
                    a.0, a.1, a.2, b.0, b.1, b.2
                )
            })?;
        }
    }
    let took = within_time(start, Duration::from_secs(60))?;
    let parts: Vec<String> = est
        .iter()
        .map(|(n, l, h)| format!("{n} {l:.4}±{h:.4}"))
        .collect();
    Ok(format!("{}; {took:?}", parts.join(", ")))
}

fn zero_inflated_simulation() -> Outcome {
    let spec = SystemSpec {
        n: 2,
        rates: constant(2, 1.0),
        profile: egal(2),
        length_law: LengthDistribution::zero_inflated_exponential(0.5, 0.5).unwrap(),
        discipline: Discipline::FcfdDisplace,
        variant: Variant::Limited,
    };
    let r = run(&spec, &RunOptions::new(1_000_000, 600)).map_err(|e| e.to_string())?;
    ensure((r.loss_prob - 0.2).abs() <= 0.01, || {
        format!("loss {}", r.loss_prob)
    })?;
    for (got, want) in r.occupancy.iter().zip([0.4, 0.4, 0.2]) {
        ensure((got - want).abs() <= 0.01, || {
            format!("occupancy {:?}", r.occupancy)
        })?;
    }
    Ok(format!(
        "loss {:.4}, occupancy ({:.4}, {:.4}, {:.4})",
        r.loss_prob, r.occupancy[0], r.occupancy[1], r.occupancy[2]
    ))
}

fn small_rate_limit() -> Outcome {
    let loss = zero_inflated_fcfd_probs(3, &constant(3, 1.0), 0.5, 1e-6, &egal(3))
        .map_err(|e| e.to_string())?
        .loss();
    ensure((loss - 0.5).abs() <= 1e-4, || format!("loss {loss}"))?;
    Ok(format!("loss {loss:.8}"))
}

fn idle_period_law() -> Outcome {
    let s1 = srl_spec(2, 1.0, LengthDistribution::exponential(1.0).unwrap());
    let s2 = s1.unlimited_twin();
    let a = run(&s1, &RunOptions::new(100_000, 700)).map_err(|e| e.to_string())?;
    let b = run(&s2, &RunOptions::new(100_000, 701)).map_err(|e| e.to_string())?;
    ensure(
        a.idle_periods.len() >= 1000 && b.idle_periods.len() >= 1000,
        || {
            format!(
                "{} and {} idle samples",
                a.idle_periods.len(),
                b.idle_periods.len()
            )
        },
    )?;
    let c = idle_periods(&a, &b, Some(1.0)).map_err(|e| e.to_string())?;
    let (ra, rb) = c.reference.expect("reference requested");
    ensure(c.pass(), || format!("{c:?}"))?;
    Ok(format!(
        "{} vs {} samples: two-sample p = {:.3}, exponential p = {:.3} / {:.3}",
        c.samples.0, c.samples.1, c.between.p_value, ra.p_value, rb.p_value
    ))
}

fn deterministic_equivalence() -> Outcome {
    let mk = |discipline| SystemSpec {
        n: 3,
        rates: constant(3, 1.5),
        profile: ServiceRateProfile::unit(3).unwrap(),
        length_law: LengthDistribution::deterministic(1.0).unwrap(),
        discipline,
        variant: Variant::Limited,
    };
    let opts = RunOptions::new(100_000, 800);
    let srl = run(&mk(Discipline::SrlLoss), &opts).map_err(|e| e.to_string())?;
    let fcfd = run(&mk(Discipline::FcfdDisplace), &opts).map_err(|e| e.to_string())?;
    ensure(srl.counts.losses() == fcfd.counts.losses(), || {
        format!("losses {} vs {}", srl.counts.losses(), fcfd.counts.losses())
    })?;
    let target = 1.0 - (-1.5f64).exp() * (1.0 + 1.5 + 1.125);
    ensure((srl.loss_prob - target).abs() <= 0.01, || {
        format!("loss {} vs {target}", srl.loss_prob)
    })?;
    Ok(format!(
        "{} losses in both; loss {:.4} vs {target:.4}",
        srl.counts.losses(),
        srl.loss_prob
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("table reproduction", table_reproduction),
        ("formula cross-identities", cross_identities),
        ("non-monotonicity in n", non_monotonicity),
        ("sample-path coupling", coupling),
        ("insensitivity of SRL loss", insensitivity),
        ("zero-inflated FCFD simulation", zero_inflated_simulation),
        ("small-rate limit", small_rate_limit),
        ("idle-period law", idle_period_law),
        (
            "SRL/FCFD equivalence, constant lengths",
            deterministic_equivalence,
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
