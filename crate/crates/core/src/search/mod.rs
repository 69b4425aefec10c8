//! Time-contracted branch-and-bound over the propagation engine.
//!
//! The default strategy ("duration splitting") visits tests by decreasing
//! resource demand, then decreasing duration. For each test it first picks a
//! machine in round-robin order, then bisects the start domain until the test
//! has a compulsory part. Once every test is in that state the relative order
//! on each machine and resource is fixed, and the schedule is completed
//! without search by giving each start its minimal value.
//!
//! Every improving solution tightens the makespan bound to one less than its
//! makespan, so the solution stream is strictly decreasing.

mod branch;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use branch::{branch, phase1_order, phase2_complete, phase2_complete_ranked, Alternative};

use crate::engine::{Checkpoint, VarStore};
use crate::model::{OtsInstance, Schedule};
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    DurationSplitting,
    NaiveLeftmost,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::DurationSplitting => "duration_splitting",
            Strategy::NaiveLeftmost => "naive_leftmost",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "duration_splitting" => Ok(Strategy::DurationSplitting),
            "naive_leftmost" => Ok(Strategy::NaiveLeftmost),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveParams {
    /// Wall-clock budget in milliseconds, at least 1.
    pub time_contract_ms: u64,
    pub strategy: Strategy,
    /// Reserved; both strategies are deterministic.
    pub seed: u64,
    /// Keep every improving solution in the stream, not only the last one.
    pub record_stream: bool,
    /// Stop after this many search nodes (treated like contract expiry).
    pub node_limit: Option<u64>,
    /// Stop as soon as the first solution is found.
    pub stop_after_first: bool,
    /// Initial makespan bound; defaults to the sum of all durations, which
    /// is always achievable.
    pub makespan_cap: Option<Time>,
}

impl SolveParams {
    pub fn new(time_contract_ms: u64) -> Self {
        Self {
            time_contract_ms: time_contract_ms.max(1),
            strategy: Strategy::DurationSplitting,
            seed: 0,
            record_stream: true,
            node_limit: None,
            stop_after_first: false,
            makespan_cap: None,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

impl Default for SolveParams {
    fn default() -> Self {
        Self::new(300_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Search exhausted without any solution.
    InfeasibleProved,
    /// Contract expired before any solution was found.
    UnknownTimeout,
    /// A solution exists but its optimality is not proven.
    Feasible,
    OptimalProved,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::InfeasibleProved => "infeasible_proved",
            Outcome::UnknownTimeout => "unknown_timeout",
            Outcome::Feasible => "feasible",
            Outcome::OptimalProved => "optimal_proved",
        }
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Outcome::InfeasibleProved,
            Outcome::UnknownTimeout,
            Outcome::Feasible,
            Outcome::OptimalProved,
        ]
        .into_iter()
        .find(|o| o.as_str() == s)
        .ok_or_else(|| format!("unknown outcome `{s}`"))
    }
}

/// One improving solution: its makespan (seconds) and when it was found
/// (milliseconds since `solve` was entered).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamPoint {
    pub makespan: Time,
    pub t_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub best: Option<Schedule>,
    pub stream: Vec<StreamPoint>,
    pub nodes_explored: u64,
    pub t_total_ms: u64,
}

impl SolveReport {
    pub fn first(&self) -> Option<StreamPoint> {
        self.stream.first().copied()
    }

    pub fn last(&self) -> Option<StreamPoint> {
        self.stream.last().copied()
    }
}

struct Frame {
    checkpoint: Checkpoint,
    alternatives: Vec<Alternative>,
    next: usize,
}

/// Minimizes the makespan of `instance` within the time contract.
pub fn solve(instance: &OtsInstance, params: &SolveParams) -> SolveReport {
    let started = Instant::now();
    let deadline = started + Duration::from_millis(params.time_contract_ms.max(1));
    let lower_bound = instance.makespan_lower_bound();
    let cap = params.makespan_cap.unwrap_or_else(|| instance.total_duration());
    let elapsed_ms = || started.elapsed().as_millis() as u64;

    let mut report = SolveReport {
        outcome: Outcome::InfeasibleProved,
        best: None,
        stream: Vec::new(),
        nodes_explored: 0,
        t_total_ms: 0,
    };

    let Ok(mut store) = VarStore::post(instance, cap) else {
        report.t_total_ms = elapsed_ms();
        return report;
    };

    let order: Vec<usize> = match params.strategy {
        Strategy::DurationSplitting => phase1_order(instance)
            .into_iter()
            .map(|id| store.task_of(id).expect("order lists instance tests"))
            .collect(),
        Strategy::NaiveLeftmost => (0..instance.len()).collect(),
    };
    let mut rank = vec![0; order.len()];
    for (r, &task) in order.iter().enumerate() {
        rank[task] = r;
    }

    let mut stack: Vec<Frame> = Vec::new();
    let mut bound = cap;
    let mut expand = true;
    let mut exhausted = false;

    loop {
        if Instant::now() >= deadline
            || params
                .node_limit
                .is_some_and(|limit| report.nodes_explored >= limit)
        {
            break;
        }

        if expand {
            expand = false;
            report.nodes_explored += 1;
            let alternatives = next_alternatives(&store, &order, params.strategy);
            if alternatives.is_empty() {
                let checkpoint = store.checkpoint();
                match phase2_complete_ranked(&mut store, &rank) {
                    Ok(schedule) => {
                        debug_assert!(crate::model::validate_schedule(instance, &schedule).is_empty());
                        let point = StreamPoint {
                            makespan: schedule.makespan(),
                            t_ms: elapsed_ms(),
                        };
                        if !params.record_stream {
                            report.stream.clear();
                        }
                        report.stream.push(point);
                        bound = schedule.makespan() - 1;
                        report.best = Some(schedule);
                    }
                    Err(_) => {
                        debug_assert!(false, "completion failed after phase 1");
                    }
                }
                store.backtrack(checkpoint);
                if report.best.is_some() && (bound < lower_bound || params.stop_after_first) {
                    exhausted = bound < lower_bound;
                    break;
                }
            } else {
                stack.push(Frame {
                    checkpoint: store.checkpoint(),
                    alternatives,
                    next: 0,
                });
            }
        }

        let Some(frame) = stack.last_mut() else {
            exhausted = true;
            break;
        };
        if frame.next == frame.alternatives.len() {
            let checkpoint = frame.checkpoint;
            stack.pop();
            store.backtrack(checkpoint);
            continue;
        }
        let alternative = frame.alternatives[frame.next];
        frame.next += 1;
        store.backtrack(frame.checkpoint);
        if store.tighten_makespan(bound).is_err() {
            frame.next = frame.alternatives.len();
            continue;
        }
        if let Some(cursor) = alternative.cursor {
            store.set_cursor(cursor);
        }
        if store.decide(alternative.decision).is_ok() {
            expand = true;
        }
    }

    report.outcome = match (exhausted, report.best.is_some()) {
        (true, true) => Outcome::OptimalProved,
        (true, false) => Outcome::InfeasibleProved,
        (false, true) => Outcome::Feasible,
        (false, false) => Outcome::UnknownTimeout,
    };
    report.t_total_ms = elapsed_ms();
    report
}

/// [`solve`] with the leftmost-variable, ascending-machine, bisection
/// strategy.
pub fn solve_naive(instance: &OtsInstance, params: &SolveParams) -> SolveReport {
    solve(
        instance,
        &params.clone().with_strategy(Strategy::NaiveLeftmost),
    )
}

fn next_alternatives(store: &VarStore, order: &[usize], strategy: Strategy) -> Vec<Alternative> {
    match strategy {
        Strategy::DurationSplitting => order
            .iter()
            .map(|&i| branch(store, i))
            .find(|alts| !alts.is_empty())
            .unwrap_or_default(),
        Strategy::NaiveLeftmost => branch::naive_branch(store),
    }
}
