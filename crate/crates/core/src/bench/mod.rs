//! Experiment harness: runs methods over a manifest of instances, records
//! first/last solutions and timings, and summarizes them into plot-ready
//! tables.

mod run;
mod summary;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use run::{read_records, record_from_report, run_bench, run_one, BenchOptions};
pub use summary::{quantiles, summarize, write_summary, ComparisonRow, Summary, ThresholdRow, TimeBox};

use crate::search::StreamPoint;
use crate::Time;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Manifest(#[from] crate::generator::GeneratorError),
    #[error("records mix time contracts {0:?}; summarize one contract at a time")]
    MixedContracts(Vec<u64>),
    #[error("no records to summarize")]
    NoRecords,
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("contract must be at least 1 ms")]
    BadContract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Tcsched,
    TcschedNaive,
    Greedy,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Tcsched, Method::TcschedNaive, Method::Greedy, Method::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tcsched => "tcsched",
            Method::TcschedNaive => "tcsched_naive",
            Method::Greedy => "greedy",
            Method::Random => "random",
        }
    }

    /// Parses a comma-separated list; `all` selects every method.
    pub fn parse_list(s: &str) -> Result<Vec<Method>, BenchError> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        s.split(',').map(|m| m.trim().parse()).collect()
    }
}

impl std::str::FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| BenchError::UnknownMethod(s.to_string()))
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub family: String,
    pub r: usize,
    pub method: String,
    pub outcome: String,
    pub makespan_first: Option<Time>,
    pub t_first_ms: Option<u64>,
    pub makespan_last: Option<Time>,
    pub t_last_ms: Option<u64>,
    pub t_total_ms: u64,
    pub t_opt_for_tt_ms: Option<u64>,
    pub seed: u64,
    pub error: String,
    #[serde(default)]
    pub contract_ms: u64,
}

impl BenchRecord {
    pub fn is_error(&self) -> bool {
        !self.error.is_empty()
    }

    pub fn key(&self) -> (String, String) {
        (self.instance.clone(), self.method.clone())
    }
}

/// Timestamp of the stream point minimizing makespan plus solving time, with
/// makespan seconds converted to milliseconds. Ties go to the earlier point.
pub fn t_opt_for_tt(stream: &[StreamPoint]) -> Option<u64> {
    stream
        .iter()
        .min_by_key(|p| (p.makespan * 1000 + p.t_ms as Time, p.t_ms))
        .map(|p| p.t_ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_time_argmin() {
        let stream = [
            StreamPoint { makespan: 20, t_ms: 1 },
            StreamPoint { makespan: 11, t_ms: 50 },
        ];
        // 20.001 s against 11.05 s
        assert_eq!(t_opt_for_tt(&stream), Some(50));
        let slow = [
            StreamPoint { makespan: 20, t_ms: 1 },
            StreamPoint { makespan: 19, t_ms: 5000 },
        ];
        assert_eq!(t_opt_for_tt(&slow), Some(1));
        assert_eq!(t_opt_for_tt(&[]), None);
    }

    #[test]
    fn method_lists() {
        assert_eq!(Method::parse_list("all").unwrap().len(), 4);
        assert_eq!(
            Method::parse_list("tcsched,greedy,random").unwrap(),
            vec![Method::Tcsched, Method::Greedy, Method::Random]
        );
        assert!(Method::parse_list("tcsched,fast").is_err());
    }
}
