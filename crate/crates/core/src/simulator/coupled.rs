use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::run::{ArrivalSource, SimEstimates};
use super::stats::{ks_exponential, ks_two_sample, KsResult};
use super::system::{Discipline, Event, Job, PsSystem, SystemSpec, Variant};
use crate::{Error, Result};

/// Events kept for the dump attached to a coupling violation.
const TRACE_WINDOW: usize = 48;

/// Completions of the two systems closer than this (relative to the clock)
/// are treated as one epoch; they are the same job finishing in both.
const EPOCH_TOLERANCE: f64 = 1e-9;

/// Tolerance when matching remaining lengths across the two systems.
const REMAINING_TOLERANCE: f64 = 1e-9;

/// Minimum idle-period samples per system for a distribution comparison.
pub const MIN_IDLE_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub arrivals: u64,
    pub events: u64,
    /// Epochs at which both invariants were checked.
    pub checks: u64,
    /// Checks at which the unlimited twin held more than `n` jobs.
    pub overflow_checks: u64,
    pub max_remaining_gap: f64,
    pub duration: f64,
    /// Time-average occupancy of the limited system, levels `0..=n`.
    pub limited_occupancy: Vec<f64>,
    /// Same for the unlimited twin, with every level `>= n` folded into `n`.
    pub unlimited_occupancy_capped: Vec<f64>,
}

struct Side {
    sys: PsSystem,
    last_time: f64,
    time_at_level: Vec<f64>,
}

impl Side {
    fn new(spec: &SystemSpec) -> Self {
        Self {
            sys: PsSystem::new(spec),
            last_time: 0.0,
            time_at_level: vec![0.0; spec.n + 1],
        }
    }

    fn elapse(&mut self, t: f64, n: usize) {
        let level = self.sys.level().min(n);
        self.time_at_level[level] += (t - self.last_time).max(0.0);
        self.last_time = self.last_time.max(t);
    }
}

struct Trail(VecDeque<String>);

impl Trail {
    fn push(&mut self, line: String) {
        if self.0.len() == TRACE_WINDOW {
            self.0.pop_front();
        }
        self.0.push_back(line);
    }

    fn dump(&self) -> String {
        self.0.iter().cloned().collect::<Vec<_>>().join("\n")
    }
}

fn violation(trail: &Trail, time: f64, detail: String) -> Error {
    Error::Coupling {
        time,
        detail,
        trace: trail.dump(),
    }
}

/// Checks `X1 = min(X2, n)` and that the limited system's jobs are the `n`
/// jobs with the largest remaining lengths in the twin. Returns the largest
/// remaining-length gap seen.
fn check(limited: &PsSystem, twin: &PsSystem, n: usize, time: f64, trail: &Trail) -> Result<f64> {
    let (x1, x2) = (limited.level(), twin.level());
    if x1 != x2.min(n) {
        return Err(violation(
            trail,
            time,
            format!("limited level {x1} != min(unlimited level {x2}, {n})"),
        ));
    }
    let ours = limited.sorted_remaining();
    let theirs = twin.sorted_remaining();
    let top = &theirs[theirs.len() - x1..];
    let mut gap: f64 = 0.0;
    for ((_, a), (_, b)) in ours.iter().zip(top) {
        let d = (a - b).abs();
        if d > REMAINING_TOLERANCE * a.abs().max(1.0) {
            return Err(violation(
                trail,
                time,
                format!(
                    "remaining lengths differ: limited {:?} vs largest of unlimited {:?}",
                    ours, top
                ),
            ));
        }
        gap = gap.max(d);
    }
    Ok(gap)
}

/// Drives a limited SRL system and its unlimited twin with one common input
/// and checks the sample-path relation between them after every epoch.
///
/// `horizon` counts accepted arrivals. Any violation aborts with an error
/// carrying the most recent events of both systems.
pub fn run_coupled(spec_limited: &SystemSpec, horizon: u64, seed: u64) -> Result<CouplingReport> {
    spec_limited.validate()?;
    if spec_limited.discipline != Discipline::SrlLoss || spec_limited.variant != Variant::Limited {
        return Err(Error::invalid(
            "discipline",
            "coupling requires a limited system with shortest-remaining-length loss",
        ));
    }
    let n = spec_limited.n;
    let twin_spec = spec_limited.unlimited_twin();
    let mut one = Side::new(spec_limited);
    let mut two = Side::new(&twin_spec);
    let mut trail = Trail(VecDeque::with_capacity(TRACE_WINDOW));
    let mut report = CouplingReport {
        n,
        arrivals: 0,
        events: 0,
        checks: 0,
        overflow_checks: 0,
        max_remaining_gap: 0.0,
        duration: 0.0,
        limited_occupancy: vec![0.0; n + 1],
        unlimited_occupancy_capped: vec![0.0; n + 1],
    };
    if horizon == 0 || spec_limited.rates.max() == 0.0 {
        report.limited_occupancy[0] = 1.0;
        report.unlimited_occupancy_capped[0] = 1.0;
        return Ok(report);
    }
    let rates = &spec_limited.rates;
    let mut source = ArrivalSource::new(rates, &spec_limited.length_law, seed, 0);
    let mut candidate = source.next_candidate();

    while report.arrivals < horizon {
        let next_completion = [
            one.sys.next_completion_time(),
            two.sys.next_completion_time(),
        ]
        .into_iter()
        .flatten()
        .min_by(f64::total_cmp);
        match next_completion {
            Some(t) if t <= candidate.time => {
                let window = (t + EPOCH_TOLERANCE * t.abs().max(1.0)).min(candidate.time);
                for (side, name) in [(&mut one, "S1"), (&mut two, "S2")] {
                    while side.sys.next_completion_time().is_some_and(|c| c <= window) {
                        let before = side.sys.level();
                        let at = side.sys.next_completion_time().expect("checked");
                        side.elapse(at, n);
                        match side.sys.advance_to_next_event(at)? {
                            Event::Completion { time, job } => {
                                report.events += 1;
                                trail.push(format!(
                                    "{name} t={time:.12} completion job={} level {before}->{}",
                                    job.id,
                                    side.sys.level()
                                ));
                            }
                            Event::Arrival { .. } => unreachable!("no arrival is due"),
                        }
                    }
                    // bring both clocks to the end of the epoch
                    side.elapse(window, n);
                    side.sys.advance_to_next_event(window)?;
                }
                let g = check(&one.sys, &two.sys, n, window, &trail)?;
                report.max_remaining_gap = report.max_remaining_gap.max(g);
                report.checks += 1;
            }
            _ => {
                let cand = candidate;
                candidate = source.next_candidate();
                for side in [&mut one, &mut two] {
                    side.elapse(cand.time, n);
                    side.sys.advance_to_next_event(cand.time)?;
                }
                let level = one.sys.level();
                let accept = source.accepts(&cand, rates, level);
                if accept != source.accepts(&cand, rates, two.sys.level().min(n)) {
                    return Err(violation(
                        &trail,
                        cand.time,
                        "arrival acceptance differs between systems".into(),
                    ));
                }
                if !accept {
                    continue;
                }
                report.arrivals += 1;
                let job = Job::new(cand.id, cand.time, cand.length);
                let b1 = one.sys.level();
                let outcome = one.sys.apply_arrival(job.clone(), Discipline::SrlLoss);
                let b2 = two.sys.level();
                two.sys.apply_arrival(job, Discipline::SrlLoss);
                report.events += 2;
                trail.push(format!(
                    "S1 t={:.12} arrival job={} len={:.6} level {b1}->{} {:?}",
                    cand.time,
                    cand.id,
                    cand.length,
                    one.sys.level(),
                    outcome
                ));
                trail.push(format!(
                    "S2 t={:.12} arrival job={} level {b2}->{}",
                    cand.time,
                    cand.id,
                    two.sys.level()
                ));
                let g = check(&one.sys, &two.sys, n, cand.time, &trail)?;
                report.max_remaining_gap = report.max_remaining_gap.max(g);
                report.checks += 1;
                if two.sys.level() > n {
                    report.overflow_checks += 1;
                }
            }
        }
    }

    let end = one.last_time.max(two.last_time);
    one.elapse(end, n);
    two.elapse(end, n);
    report.duration = end;
    if end > 0.0 {
        report.limited_occupancy = one.time_at_level.iter().map(|t| t / end).collect();
        report.unlimited_occupancy_capped = two.time_at_level.iter().map(|t| t / end).collect();
    }
    Ok(report)
}

/// Result of comparing idle-period samples of two systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdleComparison {
    pub samples: (usize, usize),
    pub between: KsResult,
    /// Each sample against the exponential law with rate `lambda_0`, when a
    /// reference rate is given.
    pub reference: Option<(KsResult, KsResult)>,
}

impl IdleComparison {
    pub fn pass(&self) -> bool {
        self.between.pass
            && self
                .reference
                .as_ref()
                .is_none_or(|(a, b)| a.pass && b.pass)
    }
}

/// Two-sample KS comparison of idle periods at the 1% level, plus optional
/// one-sample tests against `Exp(reference_rate)`.
pub fn idle_periods(
    first: &SimEstimates,
    second: &SimEstimates,
    reference_rate: Option<f64>,
) -> Result<IdleComparison> {
    const LEVEL: f64 = 0.01;
    let (a, b) = (&first.idle_periods, &second.idle_periods);
    let got = a.len().min(b.len());
    if got < MIN_IDLE_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_IDLE_SAMPLES,
            got,
        });
    }
    let between = ks_two_sample(a, b, LEVEL)?;
    let reference = match reference_rate {
        Some(rate) => Some((
            ks_exponential(a, rate, LEVEL)?,
            ks_exponential(b, rate, LEVEL)?,
        )),
        None => None,
    };
    Ok(IdleComparison {
        samples: (a.len(), b.len()),
        between,
        reference,
    })
}
