//! JSON file formats for instances and schedules.
//!
//! Both formats carry a top-level `"format": 1` field. Output is
//! byte-deterministic: fields are written in a fixed order and schedule
//! entries are sorted by test id.

use serde::{Deserialize, Serialize};

use crate::model::{ModelError, OtsInstance, Schedule, ScheduleEntry, TestCase};
use crate::search::{SolveReport, StreamPoint};
use crate::Time;

pub const FORMAT_VERSION: u32 = 1;

fn default_format() -> u32 {
    FORMAT_VERSION
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    #[serde(default = "default_format")]
    format: u32,
    #[serde(default)]
    name: String,
    machines: Vec<i64>,
    resources: Vec<i64>,
    tests: Vec<TestRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TestRecord {
    id: i64,
    duration: i64,
    machines: Vec<i64>,
    #[serde(default)]
    resources: Vec<i64>,
}

fn to_id(raw: i64, kind: &'static str) -> Result<u32, ModelError> {
    u32::try_from(raw)
        .ok()
        .filter(|&id| id > 0)
        .ok_or(ModelError::NonPositiveId { kind, id: raw })
}

fn syntax(err: serde_json::Error) -> ModelError {
    ModelError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

pub fn parse_instance(input: &str) -> Result<OtsInstance, ModelError> {
    let file: InstanceFile = serde_json::from_str(input).map_err(syntax)?;
    if file.format != FORMAT_VERSION {
        return Err(ModelError::UnsupportedFormat(file.format));
    }
    let machines = file
        .machines
        .iter()
        .map(|&m| to_id(m, "machine"))
        .collect::<Result<Vec<_>, _>>()?;
    let resources = file
        .resources
        .iter()
        .map(|&r| to_id(r, "resource"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tests = Vec::with_capacity(file.tests.len());
    for t in &file.tests {
        let id = to_id(t.id, "test")?;
        let ms = t
            .machines
            .iter()
            .map(|&m| to_id(m, "machine"))
            .collect::<Result<Vec<_>, _>>()?;
        let rs = t
            .resources
            .iter()
            .map(|&r| to_id(r, "resource"))
            .collect::<Result<Vec<_>, _>>()?;
        tests.push(TestCase::new(id, t.duration, ms, rs));
    }
    OtsInstance::new(file.name, machines, resources, tests)
}

pub fn write_instance(instance: &OtsInstance) -> String {
    let file = InstanceFile {
        format: FORMAT_VERSION,
        name: instance.name().to_string(),
        machines: instance.machines().iter().map(|&m| m.into()).collect(),
        resources: instance.resources().iter().map(|&r| r.into()).collect(),
        tests: instance
            .tests()
            .iter()
            .map(|t| TestRecord {
                id: t.id.into(),
                duration: t.duration,
                machines: t.machines.iter().map(|&m| m.into()).collect(),
                resources: t.resources.iter().map(|&r| r.into()).collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("instance serializes");
    out.push('\n');
    out
}

/// Solver metadata written alongside a schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleMeta {
    pub status: String,
    pub solver_time_ms: u64,
    pub stream: Option<Vec<StreamPoint>>,
}

impl ScheduleMeta {
    pub fn new(status: impl Into<String>, solver_time_ms: u64) -> Self {
        Self {
            status: status.into(),
            solver_time_ms,
            stream: None,
        }
    }
}

impl From<&SolveReport> for ScheduleMeta {
    fn from(report: &SolveReport) -> Self {
        Self {
            status: report.outcome.as_str().to_string(),
            solver_time_ms: report.t_total_ms,
            stream: Some(report.stream.clone()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleFile {
    #[serde(default = "default_format")]
    format: u32,
    makespan: Time,
    #[serde(default)]
    status: String,
    #[serde(default)]
    solver_time_ms: u64,
    entries: Vec<ScheduleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stream: Option<Vec<StreamPoint>>,
}

pub fn write_schedule(schedule: &Schedule, meta: Option<&ScheduleMeta>) -> String {
    let file = ScheduleFile {
        format: FORMAT_VERSION,
        makespan: schedule.makespan(),
        status: meta.map_or_else(|| "unknown".to_string(), |m| m.status.clone()),
        solver_time_ms: meta.map_or(0, |m| m.solver_time_ms),
        entries: schedule.entries().to_vec(),
        stream: meta.and_then(|m| m.stream.clone()),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("schedule serializes");
    out.push('\n');
    out
}

/// Parses a schedule file. The makespan is taken verbatim from the file so
/// that a wrong value can be reported by the validator.
pub fn parse_schedule(input: &str) -> Result<(Schedule, ScheduleMeta), ModelError> {
    let file: ScheduleFile = serde_json::from_str(input).map_err(syntax)?;
    if file.format != FORMAT_VERSION {
        return Err(ModelError::UnsupportedFormat(file.format));
    }
    let meta = ScheduleMeta {
        status: file.status,
        solver_time_ms: file.solver_time_ms,
        stream: file.stream,
    };
    Ok((Schedule::from_raw_parts(file.entries, file.makespan), meta))
}
