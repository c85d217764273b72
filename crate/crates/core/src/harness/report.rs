use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Formula, FormulaResult, RunParams, Scenario};
use crate::analytic::limited_ps_probs;
use crate::simulator::stats::{ks_exponential, ks_two_sample};
use crate::simulator::{
    run, run_coupled, run_replications, CouplingReport, Discipline, RunOptions, SimEstimates,
    SystemSpec, Variant, MIN_IDLE_SAMPLES,
};
use crate::{Error, Result};

const IDLE_LEVEL: f64 = 0.01;

/// Agreement below this counts as exact, for levels that are never visited.
const EXACT: f64 = 1e-12;

fn options(params: &RunParams, trace: bool) -> RunOptions {
    RunOptions {
        horizon: params.horizon,
        warmup: params.warmup,
        seed: params.seed,
        replication: 0,
        trace,
    }
}

/// Runs the scenario's system. A trace is kept only for a single replication.
pub fn simulate(scenario: &Scenario, params: &RunParams, trace: bool) -> Result<SimEstimates> {
    let opts = options(params, trace && params.replications == 1);
    if params.replications == 1 {
        run(&scenario.spec, &opts)
    } else {
        run_replications(&scenario.spec, &opts, params.replications)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub formula: Formula,
    pub quantity: String,
    pub analytic: f64,
    pub simulated: f64,
    pub ci_half: f64,
    /// `None` when the formula does not describe the simulated system.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdleTest {
    pub name: String,
    pub samples: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub params: RunParams,
    pub rows: Vec<ComparisonRow>,
    pub idle: Vec<IdleTest>,
    /// Why idle-period tests were skipped, if they were.
    pub idle_note: Option<String>,
    pub estimates: SimEstimates,
}

impl ComparisonReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false)) && self.idle.iter().all(|t| t.pass)
    }
}

fn within(analytic: f64, simulated: f64, half: f64) -> bool {
    let d = (analytic - simulated).abs();
    d <= half || d <= EXACT
}

fn comparison_rows(
    spec: &SystemSpec,
    result: &FormulaResult,
    est: &SimEstimates,
) -> Vec<ComparisonRow> {
    let f = result.formula;
    let n = spec.n;
    let limited = spec.variant == Variant::Limited;
    let judged = f.describes(spec)
        && (limited || matches!(f, Formula::LimitedPs | Formula::EgalitarianLoss));
    let row = |quantity: String, analytic: f64, simulated: f64, ci_half: f64| ComparisonRow {
        formula: f,
        quantity,
        analytic,
        simulated,
        ci_half,
        pass: judged.then(|| within(analytic, simulated, ci_half)),
    };
    let mut rows = Vec::new();
    if let Some(d) = &result.distribution {
        let occupancy = est.occupancy_capped(n);
        let half = {
            let mut h = est.occupancy_ci_half.clone();
            h.resize(n + 1, f64::INFINITY);
            if !limited {
                // folded tail has no batch interval of its own
                h[n] = f64::INFINITY;
            }
            h
        };
        for (i, p) in d.p.iter().enumerate() {
            rows.push(row(format!("p_{i}"), *p, occupancy[i], half[i]));
        }
    }
    if limited {
        rows.push(row(
            "loss".into(),
            result.loss,
            est.loss_prob,
            est.loss_ci_half,
        ));
        if let Some(v) = result.sojourn {
            rows.push(row("V".into(), v, est.sojourn_all, est.sojourn_all_ci_half));
        }
    }
    rows
}

fn idle_tests(
    scenario: &Scenario,
    params: &RunParams,
    est: &SimEstimates,
) -> Result<(Vec<IdleTest>, Option<String>)> {
    let spec = &scenario.spec;
    let lambda0 = spec.rates.at(0);
    if lambda0 <= 0.0 {
        return Ok((Vec::new(), Some("no arrivals in the empty state".into())));
    }
    if est.idle_periods.len() < MIN_IDLE_SAMPLES {
        return Ok((
            Vec::new(),
            Some(format!(
                "{} idle periods, at least {MIN_IDLE_SAMPLES} needed",
                est.idle_periods.len()
            )),
        ));
    }
    let mut tests = Vec::new();
    let r = ks_exponential(&est.idle_periods, lambda0, IDLE_LEVEL)?;
    tests.push(IdleTest {
        name: format!("idle periods vs Exp({lambda0})"),
        samples: est.idle_periods.len(),
        statistic: r.statistic,
        p_value: r.p_value,
        pass: r.pass,
    });
    if spec.discipline == Discipline::SrlLoss && spec.variant == Variant::Limited {
        let twin = spec.unlimited_twin();
        let opts = RunOptions {
            replication: 1,
            ..options(params, false)
        };
        let other = run(&twin, &opts)?;
        if other.idle_periods.len() >= MIN_IDLE_SAMPLES {
            let r = ks_two_sample(&est.idle_periods, &other.idle_periods, IDLE_LEVEL)?;
            tests.push(IdleTest {
                name: "idle periods, limited vs unlimited twin".into(),
                samples: est.idle_periods.len().min(other.idle_periods.len()),
                statistic: r.statistic,
                p_value: r.p_value,
                pass: r.pass,
            });
        }
    }
    Ok((tests, None))
}

/// Simulates the scenario and checks every requested formula against it.
pub fn compare(scenario: &Scenario, params: &RunParams) -> Result<ComparisonReport> {
    let est = simulate(scenario, params, false)?;
    let mut rows = Vec::new();
    for f in &scenario.formulas {
        let result = scenario.evaluate(*f)?;
        rows.extend(comparison_rows(&scenario.spec, &result, &est));
    }
    let (idle, idle_note) = idle_tests(scenario, params, &est)?;
    Ok(ComparisonReport {
        scenario: scenario.name.clone(),
        params: *params,
        rows,
        idle,
        idle_note,
        estimates: est,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingOutcome {
    pub report: Option<CouplingReport>,
    /// Violation message with the event window that preceded it.
    pub violation: Option<String>,
    /// Stationary limited-system probabilities for reference.
    pub analytic: Option<Vec<f64>>,
}

impl CouplingOutcome {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Runs the coupled limited/unlimited pair. A violated invariant is part of
/// the outcome; other failures are errors.
pub fn couple(scenario: &Scenario, params: &RunParams) -> Result<CouplingOutcome> {
    let spec = &scenario.spec;
    let analytic = limited_ps_probs(spec.n, &spec.rates, spec.length_law.mean(), &spec.profile)
        .ok()
        .map(|d| d.p);
    match run_coupled(spec, params.horizon, params.seed) {
        Ok(report) => Ok(CouplingOutcome {
            report: Some(report),
            violation: None,
            analytic,
        }),
        Err(e @ Error::Coupling { .. }) => Ok(CouplingOutcome {
            report: None,
            violation: Some(e.to_string()),
            analytic,
        }),
        Err(e) => Err(e),
    }
}

pub fn render_analytic(scenario: &Scenario, results: &[FormulaResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario: {}  (n = {})",
        scenario.name, scenario.spec.n
    );
    for r in results {
        let _ = writeln!(out, "\n[{}]", r.formula);
        if let Some(d) = &r.distribution {
            for (i, p) in d.p.iter().enumerate() {
                let _ = writeln!(out, "  p_{i:<3} {p:.10}");
            }
        }
        let _ = writeln!(out, "  loss   {:.10}", r.loss);
        if let Some(l) = r.mean_jobs {
            let _ = writeln!(out, "  L      {l:.10}");
        }
        if let Some(v) = r.sojourn {
            let _ = writeln!(out, "  V      {v:.10}");
        }
    }
    out
}

fn fmt_half(h: f64) -> String {
    if h.is_finite() {
        format!("{h:.5}")
    } else {
        "inf".into()
    }
}

pub fn render_estimates(est: &SimEstimates) -> String {
    let mut out = String::new();
    let c = &est.counts;
    let _ = writeln!(
        out,
        "arrivals {}  served {}  displaced {}  blocked {}  events {}",
        c.arrivals, c.served, c.displaced, c.blocked, est.events
    );
    let _ = writeln!(out, "measured time {:.3}", est.measured_time);
    for (i, p) in est.occupancy.iter().enumerate() {
        let h = est
            .occupancy_ci_half
            .get(i)
            .copied()
            .unwrap_or(f64::INFINITY);
        let _ = writeln!(out, "  p_{i:<3} {p:.6} +- {}", fmt_half(h));
    }
    let _ = writeln!(
        out,
        "  loss   {:.6} +- {}",
        est.loss_prob,
        fmt_half(est.loss_ci_half)
    );
    let _ = writeln!(
        out,
        "  L      {:.6} +- {}",
        est.mean_jobs,
        fmt_half(est.mean_jobs_ci_half)
    );
    let _ = writeln!(
        out,
        "  V      {:.6} +- {}",
        est.sojourn_all,
        fmt_half(est.sojourn_all_ci_half)
    );
    let _ = writeln!(out, "  idle periods {}", est.idle_periods.len());
    out
}

pub fn render_comparison(report: &ComparisonReport) -> String {
    let mut out = String::new();
    let p = &report.params;
    let _ = writeln!(
        out,
        "scenario: {}  horizon {}  warmup {}  replications {}  seed {}",
        report.scenario, p.horizon, p.warmup, p.replications, p.seed
    );
    let _ = writeln!(
        out,
        "{:<18} {:<8} {:>12} {:>12} {:>10}  result",
        "formula", "quantity", "analytic", "simulated", "ci_half"
    );
    for r in &report.rows {
        let verdict = match r.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "n/a",
        };
        let _ = writeln!(
            out,
            "{:<18} {:<8} {:>12.6} {:>12.6} {:>10}  {verdict}",
            r.formula.wire_name(),
            r.quantity,
            r.analytic,
            r.simulated,
            fmt_half(r.ci_half)
        );
    }
    for t in &report.idle {
        let _ = writeln!(
            out,
            "KS {}: D = {:.5}, p = {:.4}, samples {}  {}",
            t.name,
            t.statistic,
            t.p_value,
            t.samples,
            if t.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(note) = &report.idle_note {
        let _ = writeln!(out, "idle-period tests skipped: {note}");
    }
    let _ = writeln!(
        out,
        "overall: {}",
        if report.pass() { "PASS" } else { "FAIL" }
    );
    out
}

pub fn render_coupling(outcome: &CouplingOutcome) -> String {
    let mut out = String::new();
    if let Some(v) = &outcome.violation {
        let _ = writeln!(out, "verdict: VIOLATION\n{v}");
        return out;
    }
    let r = outcome
        .report
        .as_ref()
        .expect("report present without violation");
    let _ = writeln!(
        out,
        "verdict: OK  arrivals {}  events {}  checks {}  overflow checks {}  max remaining gap {:.3e}",
        r.arrivals, r.events, r.checks, r.overflow_checks, r.max_remaining_gap
    );
    let _ = writeln!(
        out,
        "{:>5} {:>10} {:>10} {:>10}",
        "level", "limited", "twin", "analytic"
    );
    for i in 0..=r.n {
        let a = outcome
            .analytic
            .as_ref()
            .map_or("-".to_string(), |p| format!("{:.6}", p[i]));
        let _ = writeln!(
            out,
            "{i:>5} {:>10.6} {:>10.6} {a:>10}",
            r.limited_occupancy[i], r.unlimited_occupancy_capped[i]
        );
    }
    out
}
