//! Event-driven simulation of limited and unlimited processor-sharing
//! stations.
//!
//! A run is strictly sequential. Independent replications use disjoint
//! random substreams and may run on separate threads.

mod coupled;
mod run;
pub mod stats;
mod system;

pub use coupled::{idle_periods, run_coupled, CouplingReport, IdleComparison, MIN_IDLE_SAMPLES};
pub use run::{
    run, run_replications, ArrivalSource, Batch, Candidate, Counts, RunOptions, SimEstimates,
    BATCHES, WORK_TOLERANCE,
};
pub use system::{
    ArrivalOutcome, Discipline, Event, Job, PsSystem, SystemSpec, Variant, REMAINING_SLACK,
};
