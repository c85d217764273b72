use serde::{Deserialize, Serialize};

use crate::analytic::ServiceRateProfile;
use crate::stochastic::{ArrivalRates, LengthDistribution};
use crate::{Error, Result};

/// Slack allowed on a materialized remaining length before it is treated as
/// an internal fault.
pub const REMAINING_SLACK: f64 = 1e-12;

/// Which job is lost when an arrival finds the station full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discipline {
    /// The job with the shortest remaining length (arrival included) is lost;
    /// an arrival whose length equals the minimum displaces the served job.
    #[serde(alias = "srl")]
    SrlLoss,
    /// The earliest-arrived job in service is displaced.
    #[serde(alias = "fcfd")]
    FcfdDisplace,
    /// The arriving job is lost.
    #[serde(alias = "block")]
    BlockArriving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// At most `n` jobs; the discipline resolves overflow.
    Limited,
    /// No bound; above `n` jobs each job is served at `c_n`.
    #[serde(alias = "unlimited")]
    UnlimitedCapped,
}

/// Complete description of a simulated station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub n: usize,
    pub rates: ArrivalRates,
    pub profile: ServiceRateProfile,
    pub length_law: LengthDistribution,
    pub discipline: Discipline,
    pub variant: Variant,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n", "capacity must be at least 1"));
        }
        if self.rates.capacity() != self.n {
            return Err(Error::invalid(
                "lambda",
                format!(
                    "expected {} rates, got {}",
                    self.n + 1,
                    self.rates.capacity() + 1
                ),
            ));
        }
        if self.profile.capacity() != self.n {
            return Err(Error::invalid(
                "c",
                format!(
                    "expected {} service rates, got {}",
                    self.n,
                    self.profile.capacity()
                ),
            ));
        }
        self.length_law.validate()
    }

    /// The unlimited twin fed by the same input.
    pub fn unlimited_twin(&self) -> Self {
        Self {
            variant: Variant::UnlimitedCapped,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: u64,
    pub arrival_time: f64,
    pub total_length: f64,
    /// Service received so far, as of the system clock.
    pub attained: f64,
}

impl Job {
    pub fn new(id: u64, arrival_time: f64, total_length: f64) -> Self {
        Self {
            id,
            arrival_time,
            total_length,
            attained: 0.0,
        }
    }

    pub fn remaining(&self) -> f64 {
        self.total_length - self.attained
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Arrival { time: f64 },
    Completion { time: f64, job: Job },
}

impl Event {
    pub fn time(&self) -> f64 {
        match self {
            Event::Arrival { time } | Event::Completion { time, .. } => *time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalOutcome {
    Admitted,
    ArrivingLost,
    DisplacedLost(Job),
}

/// Shortest remaining first; ties go to the earliest arrival, then the
/// lowest id.
fn srl_order(a: &Job, b: &Job) -> std::cmp::Ordering {
    a.remaining()
        .total_cmp(&b.remaining())
        .then(a.arrival_time.total_cmp(&b.arrival_time))
        .then(a.id.cmp(&b.id))
}

fn fcfd_order(a: &Job, b: &Job) -> std::cmp::Ordering {
    a.arrival_time
        .total_cmp(&b.arrival_time)
        .then(a.id.cmp(&b.id))
}

/// A running processor-sharing station.
///
/// All jobs present receive the same per-job rate, so between events every
/// job's attained service grows by the same amount.
#[derive(Debug, Clone)]
pub struct PsSystem {
    capacity: Option<usize>,
    profile: ServiceRateProfile,
    jobs: Vec<Job>,
    clock: f64,
}

impl PsSystem {
    pub fn new(spec: &SystemSpec) -> Self {
        Self {
            capacity: match spec.variant {
                Variant::Limited => Some(spec.n),
                Variant::UnlimitedCapped => None,
            },
            profile: spec.profile.clone(),
            jobs: Vec::new(),
            clock: 0.0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn level(&self) -> usize {
        self.jobs.len()
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Per-job service rate at the current level.
    pub fn rate(&self) -> f64 {
        if self.jobs.is_empty() {
            0.0
        } else {
            self.profile.rate_at(self.jobs.len())
        }
    }

    fn next_completion(&self) -> Option<(usize, f64)> {
        let (idx, job) = self
            .jobs
            .iter()
            .enumerate()
            .min_by(|a, b| srl_order(a.1, b.1))?;
        let dt = job.remaining().max(0.0) / self.rate();
        Some((idx, self.clock + dt))
    }

    pub fn next_completion_time(&self) -> Option<f64> {
        self.next_completion().map(|(_, t)| t)
    }

    fn serve_until(&mut self, t: f64) {
        let dt = t - self.clock;
        if dt > 0.0 && !self.jobs.is_empty() {
            let work = self.rate() * dt;
            for j in &mut self.jobs {
                j.attained += work;
            }
        }
        self.clock = self.clock.max(t);
    }

    fn check_remaining(&self) -> Result<()> {
        for j in &self.jobs {
            if j.remaining() < -REMAINING_SLACK * j.total_length.max(1.0) {
                return Err(Error::Consistency {
                    time: self.clock,
                    detail: format!(
                        "job {} has remaining {} (total {})",
                        j.id,
                        j.remaining(),
                        j.total_length
                    ),
                });
            }
        }
        Ok(())
    }

    /// Processes the next completion if it happens no later than
    /// `next_arrival` (completions win ties); otherwise moves the clock to
    /// `next_arrival` and reports the arrival, leaving admission to
    /// [`PsSystem::apply_arrival`].
    pub fn advance_to_next_event(&mut self, next_arrival: f64) -> Result<Event> {
        match self.next_completion() {
            Some((idx, t)) if t <= next_arrival => {
                let remaining = self.jobs[idx].remaining().max(0.0);
                let dt = t - self.clock;
                let rate = self.rate();
                for (k, j) in self.jobs.iter_mut().enumerate() {
                    if k == idx {
                        j.attained += remaining;
                    } else if dt > 0.0 {
                        j.attained += rate * dt;
                    }
                }
                self.clock = t;
                let job = self.jobs.swap_remove(idx);
                self.check_remaining()?;
                Ok(Event::Completion { time: t, job })
            }
            _ => {
                self.serve_until(next_arrival);
                self.check_remaining()?;
                Ok(Event::Arrival { time: next_arrival })
            }
        }
    }

    /// Admits `job` at the current clock, applying `discipline` when the
    /// station is full.
    pub fn apply_arrival(&mut self, job: Job, discipline: Discipline) -> ArrivalOutcome {
        let full = self.capacity.is_some_and(|n| self.jobs.len() >= n);
        if !full {
            self.jobs.push(job);
            return ArrivalOutcome::Admitted;
        }
        let victim = match discipline {
            Discipline::BlockArriving => return ArrivalOutcome::ArrivingLost,
            Discipline::SrlLoss => {
                let (idx, shortest) = self
                    .jobs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| srl_order(a.1, b.1))
                    .expect("full station has jobs");
                if job.total_length < shortest.remaining() {
                    return ArrivalOutcome::ArrivingLost;
                }
                idx
            }
            Discipline::FcfdDisplace => {
                self.jobs
                    .iter()
                    .enumerate()
                    .min_by(|a, b| fcfd_order(a.1, b.1))
                    .expect("full station has jobs")
                    .0
            }
        };
        let lost = self.jobs.swap_remove(victim);
        self.jobs.push(job);
        ArrivalOutcome::DisplacedLost(lost)
    }

    /// Remaining lengths in ascending order.
    pub fn sorted_remaining(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<&Job> = self.jobs.iter().collect();
        v.sort_by(|a, b| srl_order(a, b));
        v.into_iter().map(|j| (j.id, j.remaining())).collect()
    }

    /// Test hook: builds a station with the given jobs already present.
    pub fn with_jobs(spec: &SystemSpec, jobs: Vec<Job>) -> Self {
        let mut s = Self::new(spec);
        s.jobs = jobs;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, profile: Vec<f64>, discipline: Discipline) -> SystemSpec {
        SystemSpec {
            n,
            rates: ArrivalRates::constant(n, 1.0).unwrap(),
            profile: ServiceRateProfile::new(profile).unwrap(),
            length_law: LengthDistribution::exponential(1.0).unwrap(),
            discipline,
            variant: Variant::Limited,
        }
    }

    fn job(id: u64, arrival: f64, remaining: f64) -> Job {
        Job::new(id, arrival, remaining)
    }

    #[test]
    fn completion_before_arrival() {
        let s = spec(2, vec![1.0, 0.5], Discipline::SrlLoss);
        let mut sys = PsSystem::with_jobs(&s, vec![job(1, 0.0, 0.4), job(2, 0.0, 1.0)]);
        let ev = sys.advance_to_next_event(2.0).unwrap();
        match ev {
            Event::Completion { time, job } => {
                assert!((time - 0.8).abs() < 1e-15);
                assert_eq!(job.id, 1);
                assert!((job.attained - job.total_length).abs() < 1e-15);
            }
            other => panic!("expected completion, got {other:?}"),
        }
        assert!((sys.jobs()[0].remaining() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn arrival_before_completion() {
        let s = spec(1, vec![1.0], Discipline::SrlLoss);
        let mut sys = PsSystem::with_jobs(&s, vec![job(1, 0.0, 1.0)]);
        let ev = sys.advance_to_next_event(0.3).unwrap();
        assert_eq!(ev, Event::Arrival { time: 0.3 });
        assert!((sys.jobs()[0].remaining() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn empty_system_waits_for_arrival() {
        let s = spec(2, vec![1.0, 0.5], Discipline::SrlLoss);
        let mut sys = PsSystem::new(&s);
        assert_eq!(
            sys.advance_to_next_event(4.0).unwrap(),
            Event::Arrival { time: 4.0 }
        );
        assert_eq!(sys.clock(), 4.0);
    }

    #[test]
    fn simultaneous_events_complete_first() {
        let s = spec(1, vec![1.0], Discipline::SrlLoss);
        let mut sys = PsSystem::with_jobs(&s, vec![job(1, 0.0, 1.0)]);
        assert!(matches!(
            sys.advance_to_next_event(1.0).unwrap(),
            Event::Completion { .. }
        ));
    }

    fn full_srl() -> PsSystem {
        let s = spec(2, vec![1.0, 0.5], Discipline::SrlLoss);
        PsSystem::with_jobs(&s, vec![job(1, 0.0, 2.0), job(2, 0.1, 0.5)])
    }

    #[test]
    fn srl_displaces_shortest() {
        let mut sys = full_srl();
        match sys.apply_arrival(job(3, 1.0, 1.0), Discipline::SrlLoss) {
            ArrivalOutcome::DisplacedLost(v) => assert_eq!(v.id, 2),
            other => panic!("{other:?}"),
        }
        assert_eq!(sys.level(), 2);
    }

    #[test]
    fn srl_loses_short_arrival() {
        let mut sys = full_srl();
        assert_eq!(
            sys.apply_arrival(job(3, 1.0, 0.3), Discipline::SrlLoss),
            ArrivalOutcome::ArrivingLost
        );
    }

    #[test]
    fn srl_tie_displaces() {
        let mut sys = full_srl();
        assert!(matches!(
            sys.apply_arrival(job(3, 1.0, 0.5), Discipline::SrlLoss),
            ArrivalOutcome::DisplacedLost(v) if v.id == 2
        ));
    }

    #[test]
    fn fcfd_displaces_oldest() {
        let mut sys = full_srl();
        assert!(matches!(
            sys.apply_arrival(job(3, 1.0, 0.1), Discipline::FcfdDisplace),
            ArrivalOutcome::DisplacedLost(v) if v.id == 1
        ));
    }

    #[test]
    fn block_loses_arrival() {
        let mut sys = full_srl();
        assert_eq!(
            sys.apply_arrival(job(3, 1.0, 9.0), Discipline::BlockArriving),
            ArrivalOutcome::ArrivingLost
        );
    }

    #[test]
    fn below_capacity_always_admits() {
        let s = spec(2, vec![1.0, 0.5], Discipline::BlockArriving);
        let mut sys = PsSystem::with_jobs(&s, vec![job(1, 0.0, 2.0)]);
        assert_eq!(
            sys.apply_arrival(job(2, 0.5, 0.1), Discipline::BlockArriving),
            ArrivalOutcome::Admitted
        );
    }

    #[test]
    fn zero_length_job_completes_immediately() {
        let s = spec(2, vec![1.0, 0.5], Discipline::SrlLoss);
        let mut sys = PsSystem::with_jobs(&s, vec![job(1, 0.0, 2.0)]);
        sys.apply_arrival(job(2, 0.0, 0.0), Discipline::SrlLoss);
        match sys.advance_to_next_event(1.0).unwrap() {
            Event::Completion { time, job } => {
                assert_eq!(time, 0.0);
                assert_eq!(job.id, 2);
            }
            other => panic!("{other:?}"),
        }
    }
}
