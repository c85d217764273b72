//! Limited processor-sharing loss systems.
//!
//! A limited processor-sharing station serves at most `n` jobs at once; when
//! `i` jobs are present each receives service at rate `c_i`. An arrival that
//! finds `n` jobs causes exactly one loss, chosen by a [`Discipline`]:
//!
//! * shortest remaining length (SRL): the job with the least remaining work
//!   is lost, whether it is the arrival or a job in service;
//! * first come, first displaced (FCFD): the oldest job in service is lost;
//! * blocking: the arrival is lost.
//!
//! The crate has three layers:
//!
//! * [`stochastic`]: job-length laws, arrival-rate profiles and seeded streams;
//! * [`analytic`]: closed-form stationary state and loss probabilities;
//! * [`simulator`]: an event-driven simulator, including a coupled run of a
//!   limited station against its unlimited twin.
//!
//! [`harness`] ties them together behind the `lps` command-line tool.
//!
//! [`Discipline`]: simulator::Discipline

pub mod analytic;
pub mod error;
pub mod harness;
pub mod simulator;
pub mod stochastic;

pub use error::{Error, Result};
