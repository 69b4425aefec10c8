//! Problem and schedule data model, file formats and the feasibility checker.

mod instance;
pub mod io;
mod schedule;
mod validate;

use thiserror::Error;

pub use instance::{example_instance, example_schedule, OtsInstance, TestCase};
pub use io::{parse_instance, parse_schedule, write_instance, write_schedule, ScheduleMeta};
pub use schedule::{Schedule, ScheduleEntry};
pub use validate::{validate_schedule, ValidationViolation};

use crate::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported file format version {0}")]
    UnsupportedFormat(u32),
    #[error("{kind} id {id} is not a positive integer")]
    NonPositiveId { kind: &'static str, id: i64 },
    #[error("duplicate {kind} id {id}")]
    DuplicateId { kind: &'static str, id: u32 },
    #[error("test {test} has non-positive duration {duration}")]
    NonPositiveDuration { test: u32, duration: Time },
    #[error("test {test} has no eligible machine")]
    EmptyEligibleSet { test: u32 },
    #[error("test {test} lists unknown machine {machine}")]
    UnknownMachine { test: u32, machine: u32 },
    #[error("test {test} lists unknown resource {resource}")]
    UnknownResource { test: u32, resource: u32 },
}
