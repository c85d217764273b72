use serde::{Deserialize, Serialize};

use super::stats::batch_half_width;
use super::system::{ArrivalOutcome, Event, Job, PsSystem, SystemSpec};
use crate::stochastic::{ArrivalRates, LengthDistribution, RandomStream};
use crate::{Error, Result};

/// Number of batches used for batch-means confidence intervals.
pub const BATCHES: usize = 30;

/// Relative tolerance for the completed-work check.
pub const WORK_TOLERANCE: f64 = 1e-9;

/// Substreams consumed per replication: interarrival times, thinning marks
/// and job lengths.
pub const STREAMS_PER_REPLICATION: u64 = 3;

/// Candidate arrival from a rate-`lambda_max` Poisson stream. It is accepted
/// at level `k` when `mark * lambda_max < lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub id: u64,
    pub time: f64,
    pub mark: f64,
    pub length: f64,
}

/// Generates the common arrival input. Two sources built from the same
/// `(seed, replication)` yield identical candidate sequences.
#[derive(Debug, Clone)]
pub struct ArrivalSource {
    interarrival: RandomStream,
    marks: RandomStream,
    lengths: RandomStream,
    law: LengthDistribution,
    lambda_max: f64,
    clock: f64,
    next_id: u64,
}

impl ArrivalSource {
    pub fn new(
        rates: &ArrivalRates,
        law: &LengthDistribution,
        seed: u64,
        replication: u64,
    ) -> Self {
        let base = replication * STREAMS_PER_REPLICATION;
        Self {
            interarrival: RandomStream::new(seed, base),
            marks: RandomStream::new(seed, base + 1),
            lengths: RandomStream::new(seed, base + 2),
            law: law.clone(),
            lambda_max: rates.max(),
            clock: 0.0,
            next_id: 0,
        }
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn accepts(&self, c: &Candidate, rates: &ArrivalRates, level: usize) -> bool {
        c.mark * self.lambda_max < rates.at(level)
    }

    pub fn next_candidate(&mut self) -> Candidate {
        self.clock += self.interarrival.exp1() / self.lambda_max;
        let c = Candidate {
            id: self.next_id,
            time: self.clock,
            mark: self.marks.uniform(),
            length: self.law.sample(&mut self.lengths),
        };
        self.next_id += 1;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Total accepted arrivals; the run stops at the epoch of this arrival.
    pub horizon: u64,
    /// Arrivals discarded before measurement starts.
    pub warmup: u64,
    pub seed: u64,
    /// Replication index; selects disjoint random substreams.
    pub replication: u64,
    pub trace: bool,
}

impl RunOptions {
    /// Horizon with the default warm-up of 10%.
    pub fn new(horizon: u64, seed: u64) -> Self {
        Self {
            horizon,
            warmup: horizon / 10,
            seed,
            replication: 0,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub arrivals: u64,
    pub served: u64,
    pub displaced: u64,
    pub blocked: u64,
    pub in_system_start: u64,
    pub in_system_end: u64,
}

impl Counts {
    pub fn losses(&self) -> u64 {
        self.displaced + self.blocked
    }

    /// Every job present at the start or arriving in the window is either
    /// still present, served, displaced or blocked.
    pub fn is_conserved(&self) -> bool {
        self.in_system_start + self.arrivals
            == self.served + self.displaced + self.blocked + self.in_system_end
    }
}

/// Raw accumulators of one batch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub arrivals: u64,
    pub losses: u64,
    pub duration: f64,
    pub time_at_level: Vec<f64>,
    pub sojourn_total: f64,
}

impl Batch {
    fn add_time(&mut self, level: usize, dt: f64) {
        if self.time_at_level.len() <= level {
            self.time_at_level.resize(level + 1, 0.0);
        }
        self.time_at_level[level] += dt;
        self.duration += dt;
    }

    fn mean_jobs(&self) -> f64 {
        self.time_at_level
            .iter()
            .enumerate()
            .map(|(i, t)| i as f64 * t)
            .sum::<f64>()
            / self.duration
    }
}

/// Estimates from one or more replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimates {
    /// Time-weighted fraction of the window spent at each level.
    pub occupancy: Vec<f64>,
    pub occupancy_ci_half: Vec<f64>,
    /// Fraction of arrivals that found each level.
    pub arrival_seen: Vec<f64>,
    pub loss_prob: f64,
    pub loss_ci_half: f64,
    pub mean_jobs: f64,
    pub mean_jobs_ci_half: f64,
    /// Mean time in system over all arrivals (zero for blocked arrivals).
    pub sojourn_all: f64,
    pub sojourn_all_ci_half: f64,
    pub sojourn_served: f64,
    pub sojourn_displaced: f64,
    pub idle_periods: Vec<f64>,
    pub counts: Counts,
    pub measured_time: f64,
    pub events: u64,
    /// Largest relative gap between attained service and length seen at a
    /// completion.
    pub max_work_error: f64,
    pub batches: Vec<Batch>,
    #[serde(skip)]
    pub trace: Vec<String>,
    #[serde(skip)]
    seen_counts: Vec<u64>,
    #[serde(skip)]
    served_sojourn_total: f64,
    #[serde(skip)]
    displaced_sojourn_total: f64,
}

impl SimEstimates {
    /// Occupancy folded to levels `0..=n`, with level `n` holding the mass of
    /// every level `>= n`.
    pub fn occupancy_capped(&self, n: usize) -> Vec<f64> {
        fold_levels(&self.occupancy, n)
    }

    /// Arrival-seen fraction folded like [`SimEstimates::occupancy_capped`].
    pub fn arrival_seen_capped(&self, n: usize) -> Vec<f64> {
        fold_levels(&self.arrival_seen, n)
    }

    /// Pools replications: counts and samples are added and batch values
    /// from every replication are treated as one set of batches.
    pub fn merge(parts: &[SimEstimates]) -> SimEstimates {
        let mut acc = Accumulated::default();
        for p in parts {
            acc.counts.arrivals += p.counts.arrivals;
            acc.counts.served += p.counts.served;
            acc.counts.displaced += p.counts.displaced;
            acc.counts.blocked += p.counts.blocked;
            acc.counts.in_system_start += p.counts.in_system_start;
            acc.counts.in_system_end += p.counts.in_system_end;
            acc.batches.extend(p.batches.iter().cloned());
            acc.idle_periods.extend(p.idle_periods.iter().copied());
            add_counts(&mut acc.seen, &p.seen_counts);
            acc.served_sojourn_total += p.served_sojourn_total;
            acc.displaced_sojourn_total += p.displaced_sojourn_total;
            acc.events += p.events;
            acc.max_work_error = acc.max_work_error.max(p.max_work_error);
        }
        acc.finish(Vec::new(), 0)
    }
}

fn fold_levels(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (i, x) in v.iter().enumerate() {
        out[i.min(n)] += x;
    }
    out
}

fn add_counts(into: &mut Vec<u64>, from: &[u64]) {
    if into.len() < from.len() {
        into.resize(from.len(), 0);
    }
    for (a, b) in into.iter_mut().zip(from) {
        *a += b;
    }
}

#[derive(Debug, Default)]
struct Accumulated {
    counts: Counts,
    batches: Vec<Batch>,
    idle_periods: Vec<f64>,
    seen: Vec<u64>,
    served_sojourn_total: f64,
    displaced_sojourn_total: f64,
    events: u64,
    max_work_error: f64,
}

impl Accumulated {
    fn finish(self, trace: Vec<String>, min_levels: usize) -> SimEstimates {
        let batches: Vec<Batch> = self
            .batches
            .into_iter()
            .filter(|b| b.duration > 0.0 || b.arrivals > 0)
            .collect();
        let levels = batches
            .iter()
            .map(|b| b.time_at_level.len())
            .max()
            .unwrap_or(0)
            .max(min_levels)
            .max(self.seen.len())
            .max(1);
        let total_time: f64 = batches.iter().map(|b| b.duration).sum();
        let timed: Vec<&Batch> = batches.iter().filter(|b| b.duration > 0.0).collect();

        let mut occupancy = vec![0.0; levels];
        let mut occupancy_ci_half = vec![0.0; levels];
        if total_time > 0.0 {
            for (level, (occ, half)) in occupancy
                .iter_mut()
                .zip(occupancy_ci_half.iter_mut())
                .enumerate()
            {
                let time: f64 = batches
                    .iter()
                    .map(|b| b.time_at_level.get(level).copied().unwrap_or(0.0))
                    .sum();
                *occ = time / total_time;
                let per_batch: Vec<f64> = timed
                    .iter()
                    .map(|b| b.time_at_level.get(level).copied().unwrap_or(0.0) / b.duration)
                    .collect();
                *half = batch_half_width(&per_batch);
            }
        } else {
            // nothing elapsed: the system sat at its initial, empty level
            occupancy[0] = 1.0;
        }

        let arrivals = self.counts.arrivals;
        let ratio = |num: f64| {
            if arrivals > 0 {
                num / arrivals as f64
            } else {
                0.0
            }
        };
        let with_arrivals: Vec<&Batch> = batches.iter().filter(|b| b.arrivals > 0).collect();
        let loss_ci_half = batch_half_width(
            &with_arrivals
                .iter()
                .map(|b| b.losses as f64 / b.arrivals as f64)
                .collect::<Vec<_>>(),
        );
        let sojourn_total: f64 = batches.iter().map(|b| b.sojourn_total).sum();
        let sojourn_all_ci_half = batch_half_width(
            &with_arrivals
                .iter()
                .map(|b| b.sojourn_total / b.arrivals as f64)
                .collect::<Vec<_>>(),
        );
        let mean_jobs: f64 = occupancy
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum();
        let mean_jobs_ci_half =
            batch_half_width(&timed.iter().map(|b| b.mean_jobs()).collect::<Vec<_>>());
        let mut arrival_seen: Vec<f64> = self.seen.iter().map(|c| ratio(*c as f64)).collect();
        arrival_seen.resize(levels, 0.0);

        SimEstimates {
            occupancy,
            occupancy_ci_half,
            arrival_seen,
            loss_prob: ratio(self.counts.losses() as f64),
            loss_ci_half,
            mean_jobs,
            mean_jobs_ci_half,
            sojourn_all: ratio(sojourn_total),
            sojourn_all_ci_half,
            sojourn_served: mean_or_zero(self.served_sojourn_total, self.counts.served),
            sojourn_displaced: mean_or_zero(self.displaced_sojourn_total, self.counts.displaced),
            idle_periods: self.idle_periods,
            counts: self.counts,
            measured_time: total_time,
            events: self.events,
            max_work_error: self.max_work_error,
            batches,
            trace,
            seen_counts: self.seen,
            served_sojourn_total: self.served_sojourn_total,
            displaced_sojourn_total: self.displaced_sojourn_total,
        }
    }
}

fn mean_or_zero(total: f64, count: u64) -> f64 {
    if count > 0 {
        total / count as f64
    } else {
        0.0
    }
}

/// Mutable bookkeeping for one run.
struct Recorder {
    acc: Accumulated,
    measuring: bool,
    batch_size: u64,
    warmup: u64,
    current: usize,
    last_time: f64,
    idle_since: Option<f64>,
    trace: Option<Vec<String>>,
}

impl Recorder {
    fn batch(&mut self) -> &mut Batch {
        &mut self.acc.batches[self.current]
    }

    fn elapse(&mut self, level: usize, t: f64) {
        let dt = t - self.last_time;
        if self.measuring && dt > 0.0 {
            self.batch().add_time(level, dt);
        }
        self.last_time = t;
    }

    fn note(&mut self, t: f64, kind: &str, before: usize, after: usize, id: u64) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(format!("{t:.17e} {kind} {before} {after} {id}"));
        }
    }

    fn sojourn(&mut self, s: f64) {
        if self.measuring {
            self.batch().sojourn_total += s;
        }
    }
}

/// Simulates `spec` for `opts.horizon` accepted arrivals.
///
/// Measurement covers the interval between the epochs of arrival number
/// `warmup` and arrival number `horizon`; the latter is not processed.
pub fn run(spec: &SystemSpec, opts: &RunOptions) -> Result<SimEstimates> {
    spec.validate()?;
    if opts.horizon <= opts.warmup {
        return Err(Error::invalid(
            "horizon",
            format!("must exceed warmup ({} <= {})", opts.horizon, opts.warmup),
        ));
    }
    let measured = opts.horizon - opts.warmup;
    let batch_count = (BATCHES as u64).min(measured) as usize;
    let mut rec = Recorder {
        acc: Accumulated {
            batches: vec![Batch::default(); batch_count],
            ..Default::default()
        },
        measuring: false,
        batch_size: measured / batch_count as u64,
        warmup: opts.warmup,
        current: 0,
        last_time: 0.0,
        idle_since: None,
        trace: opts.trace.then(Vec::new),
    };
    let min_levels = match spec.variant {
        super::system::Variant::Limited => spec.n + 1,
        super::system::Variant::UnlimitedCapped => 1,
    };

    let mut sys = PsSystem::new(spec);
    if spec.rates.max() == 0.0 {
        return Ok(rec.acc.finish(rec.trace.unwrap_or_default(), min_levels));
    }
    let mut source = ArrivalSource::new(&spec.rates, &spec.length_law, opts.seed, opts.replication);
    let mut accepted: u64 = 0;
    let mut candidate = source.next_candidate();

    loop {
        let before = sys.level();
        if before == 0 && spec.rates.at(0) == 0.0 {
            // empty with no possible arrivals: nothing will ever happen
            break;
        }
        let event = sys.advance_to_next_event(candidate.time)?;
        rec.elapse(before, event.time());
        rec.acc.events += 1;

        match event {
            Event::Completion { time, job } => {
                if job.total_length > 0.0 {
                    let err = (job.attained - job.total_length).abs() / job.total_length;
                    if err > WORK_TOLERANCE {
                        return Err(Error::Consistency {
                            time,
                            detail: format!(
                                "job {} completed with attained {} for length {}",
                                job.id, job.attained, job.total_length
                            ),
                        });
                    }
                    rec.acc.max_work_error = rec.acc.max_work_error.max(err);
                }
                rec.note(time, "completion", before, sys.level(), job.id);
                if rec.measuring {
                    rec.acc.counts.served += 1;
                    let s = time - job.arrival_time;
                    rec.acc.served_sojourn_total += s;
                    rec.sojourn(s);
                }
                if sys.level() == 0 {
                    rec.idle_since = Some(time);
                }
            }
            Event::Arrival { time } => {
                let cand = candidate;
                candidate = source.next_candidate();
                if !source.accepts(&cand, &spec.rates, before) {
                    rec.acc.events -= 1;
                    continue;
                }
                if accepted == opts.horizon {
                    break;
                }
                if accepted == rec.warmup {
                    rec.measuring = true;
                    rec.acc.counts.in_system_start = before as u64;
                }
                if rec.measuring {
                    rec.current =
                        (((accepted - rec.warmup) / rec.batch_size) as usize).min(batch_count - 1);
                }
                accepted += 1;

                if before == 0 {
                    if let Some(start) = rec.idle_since.take() {
                        if rec.measuring {
                            rec.acc.idle_periods.push(time - start);
                        }
                    }
                }
                let outcome =
                    sys.apply_arrival(Job::new(cand.id, time, cand.length), spec.discipline);
                let after = sys.level();
                if rec.measuring {
                    let c = &mut rec.acc.counts;
                    c.arrivals += 1;
                    if rec.acc.seen.len() <= before {
                        rec.acc.seen.resize(before + 1, 0);
                    }
                    rec.acc.seen[before] += 1;
                    rec.batch().arrivals += 1;
                }
                match outcome {
                    ArrivalOutcome::Admitted => {
                        rec.note(time, "arrival", before, after, cand.id);
                    }
                    ArrivalOutcome::ArrivingLost => {
                        rec.note(time, "blocked", before, after, cand.id);
                        if rec.measuring {
                            rec.acc.counts.blocked += 1;
                            rec.batch().losses += 1;
                        }
                    }
                    ArrivalOutcome::DisplacedLost(victim) => {
                        rec.note(time, "displaced", before, after, victim.id);
                        rec.note(time, "arrival", before, after, cand.id);
                        if rec.measuring {
                            rec.acc.counts.displaced += 1;
                            rec.batch().losses += 1;
                            let s = time - victim.arrival_time;
                            rec.acc.displaced_sojourn_total += s;
                            rec.sojourn(s);
                        }
                    }
                }
            }
        }
    }
    rec.acc.counts.in_system_end = if rec.measuring { sys.level() as u64 } else { 0 };
    if !rec.measuring {
        rec.acc.counts.in_system_start = 0;
    }
    Ok(rec.acc.finish(rec.trace.unwrap_or_default(), min_levels))
}

/// Runs `replications` independent replications (substreams
/// `0..replications`) on separate threads and pools them.
pub fn run_replications(
    spec: &SystemSpec,
    opts: &RunOptions,
    replications: u64,
) -> Result<SimEstimates> {
    let replications = replications.max(1);
    let parts: Vec<Result<SimEstimates>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..replications)
            .map(|r| {
                let o = RunOptions {
                    replication: opts.replication + r,
                    ..*opts
                };
                scope.spawn(move || run(spec, &o))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replication thread panicked"))
            .collect()
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().expect("one part"));
    }
    Ok(SimEstimates::merge(&parts))
}
