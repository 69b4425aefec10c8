//! Exhaustive optimal makespan for tiny instances.
//!
//! The search enumerates machine assignments and placement sequences. Each
//! test is placed at the earliest start on its machine that avoids everything
//! already placed on that machine or on a shared resource, so every start is 0
//! or the end of a conflicting test. Sequences must be non-decreasing in
//! `(start, test position)`.
//!
//! Completeness: take an optimal schedule and re-place its tests in start
//! order, each at its earliest conflict-free start. No start moves later, so
//! the makespan does not grow. Repeating this strictly lowers the sum of
//! starts until nothing moves; the resulting schedule is optimal and is
//! generated by a sequence that satisfies the ordering rule.

use thiserror::Error;

use crate::model::{OtsInstance, Schedule};
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_tests: usize,
    pub max_machines: usize,
    pub max_duration: Time,
    pub node_cap: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_tests: 8,
            max_machines: 3,
            max_duration: 10,
            node_cap: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitExceeded(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub makespan: Time,
    pub witness: Schedule,
    pub nodes: u64,
}

struct Search<'a> {
    durations: Vec<Time>,
    eligible: Vec<&'a [u32]>,
    conflicts: Vec<Vec<bool>>,
    placed: Vec<Option<(u32, Time)>>,
    best: Time,
    best_placement: Vec<(u32, Time)>,
    nodes: u64,
    node_cap: u64,
}

impl Search<'_> {
    fn earliest(&self, task: usize, machine: u32) -> Time {
        let mut busy: Vec<(Time, Time)> = self
            .placed
            .iter()
            .enumerate()
            .filter_map(|(j, p)| {
                let (m, s) = (*p)?;
                (m == machine || self.conflicts[task][j]).then_some((s, s + self.durations[j]))
            })
            .collect();
        busy.sort_unstable();
        let d = self.durations[task];
        let mut t = 0;
        for (s, e) in busy {
            if s >= t + d {
                break;
            }
            if e > t {
                t = e;
            }
        }
        t
    }

    fn dfs(&mut self, depth: usize, last: (Time, usize), makespan: Time) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.node_cap {
            return Err(OracleError::LimitExceeded(format!(
                "node cap {} reached",
                self.node_cap
            )));
        }
        if depth == self.durations.len() {
            if makespan < self.best {
                self.best = makespan;
                self.best_placement = self.placed.iter().map(|p| p.expect("all placed")).collect();
            }
            return Ok(());
        }
        for task in 0..self.durations.len() {
            if self.placed[task].is_some() {
                continue;
            }
            for mi in 0..self.eligible[task].len() {
                let machine = self.eligible[task][mi];
                let start = self.earliest(task, machine);
                if (start, task) < last {
                    continue;
                }
                let end = start + self.durations[task];
                if end >= self.best {
                    continue;
                }
                self.placed[task] = Some((machine, start));
                let res = self.dfs(depth + 1, (start, task), makespan.max(end));
                self.placed[task] = None;
                res?;
            }
        }
        Ok(())
    }
}

/// Exact minimum makespan and one optimal schedule.
pub fn oracle_optimum(instance: &OtsInstance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    if instance.len() > limits.max_tests {
        return Err(OracleError::LimitExceeded(format!(
            "{} tests > {}",
            instance.len(),
            limits.max_tests
        )));
    }
    if instance.machines().len() > limits.max_machines {
        return Err(OracleError::LimitExceeded(format!(
            "{} machines > {}",
            instance.machines().len(),
            limits.max_machines
        )));
    }
    if let Some(t) = instance.tests().iter().find(|t| t.duration > limits.max_duration) {
        return Err(OracleError::LimitExceeded(format!(
            "test {} duration {} > {}",
            t.id, t.duration, limits.max_duration
        )));
    }
    let tests = instance.tests();
    let conflicts = tests
        .iter()
        .map(|a| tests.iter().map(|b| a.shares_resource_with(b)).collect())
        .collect();
    let mut search = Search {
        durations: tests.iter().map(|t| t.duration).collect(),
        eligible: tests.iter().map(|t| t.machines.as_slice()).collect(),
        conflicts,
        placed: vec![None; tests.len()],
        best: instance.total_duration() + 1,
        best_placement: Vec::new(),
        nodes: 0,
        node_cap: limits.node_cap,
    };
    search.dfs(0, (Time::MIN, 0), 0)?;
    let witness = Schedule::from_placements(
        instance,
        tests
            .iter()
            .zip(&search.best_placement)
            .map(|(t, &(m, s))| (t.id, m, s)),
    );
    Ok(OracleResult {
        makespan: witness.makespan(),
        witness,
        nodes: search.nodes,
    })
}
