//! Optimal test case execution scheduling.
//!
//! Test cases run on machines they are eligible for; some of them hold global
//! resources (measurement devices, simulators) that no two running tests may
//! share. [`search::solve`] minimizes the makespan with constraint propagation
//! and a time-contracted branch-and-bound; [`baselines`] provides the random
//! and greedy comparison schedulers, [`generator`] the seeded benchmark
//! families, [`oracle`] an exhaustive optimum for tiny instances and [`bench`]
//! the experiment harness.

pub mod baselines;
pub mod bench;
pub mod engine;
pub mod generator;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod search;

/// Time in integer seconds.
pub type Time = i64;

pub use model::{
    parse_instance, parse_schedule, validate_schedule, write_instance, write_schedule,
    OtsInstance, Schedule, ScheduleEntry, TestCase, ValidationViolation,
};
pub use search::{solve, Outcome, SolveParams, SolveReport, Strategy};
