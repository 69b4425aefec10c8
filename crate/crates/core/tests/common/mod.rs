//! Helpers shared by the integration tests: a fuzzer for tiny instances and
//! a brute-force enumerator of feasible schedules.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ots_core::engine::{Decision, Side, VarStore};
use ots_core::rng::RngStream;
use ots_core::{OtsInstance, TestCase, Time};

#[derive(Debug, Clone, Copy)]
pub struct TinyShape {
    pub max_tests: usize,
    pub max_machines: usize,
    pub max_resources: usize,
    pub max_duration: Time,
}

/// Random instance within `shape`. Eligible sets are non-empty subsets of
/// the machines; each test holds each resource with probability 0.4.
pub fn tiny_instance(rng: &mut RngStream, shape: TinyShape) -> OtsInstance {
    let n = rng.range_inclusive(1, shape.max_tests as i64) as usize;
    let m = rng.range_inclusive(1, shape.max_machines as i64) as usize;
    let r = rng.range_inclusive(0, shape.max_resources as i64) as usize;
    let machines: Vec<u32> = (1..=m as u32).collect();
    let resources: Vec<u32> = (1..=r as u32).collect();
    let tests = (1..=n as u32)
        .map(|id| {
            let d = rng.range_inclusive(1, shape.max_duration);
            let count = rng.range_inclusive(1, m as i64) as usize;
            let eligible = rng
                .sample_indices(m, count)
                .into_iter()
                .map(|k| machines[k])
                .collect();
            let held = resources.iter().copied().filter(|_| rng.chance(0.4)).collect();
            TestCase::new(id, d, eligible, held)
        })
        .collect();
    OtsInstance::new(format!("tiny{}", rng.seed()), machines, resources, tests).unwrap()
}

/// Restrictions on starts and machines accumulated from search decisions.
#[derive(Debug, Clone)]
pub struct Window {
    pub lo: Vec<Time>,
    pub hi: Vec<Time>,
    pub machine: Vec<Option<u32>>,
}

impl Window {
    pub fn open(n: usize) -> Self {
        Self {
            lo: vec![0; n],
            hi: vec![Time::MAX; n],
            machine: vec![None; n],
        }
    }

    pub fn with(&self, decision: Decision) -> Self {
        let mut w = self.clone();
        match decision {
            Decision::FixMachine { task, machine } => w.machine[task] = Some(machine),
            Decision::RestrictStart { task, bound, side: Side::Upper } => w.hi[task] = w.hi[task].min(bound),
            Decision::RestrictStart { task, bound, side: Side::Lower } => w.lo[task] = w.lo[task].max(bound),
        }
        w
    }
}

/// Values that occur in at least one feasible schedule.
#[derive(Debug, Clone, Default)]
pub struct Supports {
    pub starts: Vec<BTreeSet<Time>>,
    pub machines: Vec<BTreeSet<u32>>,
    pub count: u64,
}

/// Enumerates every schedule with all tests ending by `ub` that respects
/// `window`, and collects the start and machine values used.
pub fn supports(instance: &OtsInstance, ub: Time, window: &Window) -> Supports {
    let n = instance.len();
    let mut acc = Supports {
        starts: vec![BTreeSet::new(); n],
        machines: vec![BTreeSet::new(); n],
        count: 0,
    };
    let mut placed: Vec<(u32, Time)> = Vec::with_capacity(n);
    enumerate(instance, ub, window, &mut placed, &mut acc);
    acc
}

fn enumerate(instance: &OtsInstance, ub: Time, window: &Window, placed: &mut Vec<(u32, Time)>, acc: &mut Supports) {
    let tests = instance.tests();
    let i = placed.len();
    if i == tests.len() {
        acc.count += 1;
        for (j, &(m, s)) in placed.iter().enumerate() {
            acc.starts[j].insert(s);
            acc.machines[j].insert(m);
        }
        return;
    }
    let t = &tests[i];
    let hi = window.hi[i].min(ub - t.duration);
    for &m in &t.machines {
        if window.machine[i].is_some_and(|w| w != m) {
            continue;
        }
        for s in window.lo[i]..=hi {
            let clash = placed.iter().enumerate().any(|(j, &(mj, sj))| {
                let other = &tests[j];
                let overlap = s < sj + other.duration && sj < s + t.duration;
                overlap && (mj == m || t.shares_resource_with(other))
            });
            if !clash {
                placed.push((m, s));
                enumerate(instance, ub, window, placed, acc);
                placed.pop();
            }
        }
    }
}

/// Smallest makespan over all schedules, by brute force.
pub fn brute_force_optimum(instance: &OtsInstance) -> Time {
    if instance.is_empty() {
        return 0;
    }
    let n = instance.len();
    let lb = instance.makespan_lower_bound();
    (lb..=instance.total_duration())
        .find(|&ub| supports(instance, ub, &Window::open(n)).count > 0)
        .expect("the sequential schedule is feasible")
}

/// Violations of propagation soundness: values used by some feasible
/// schedule that the store has pruned.
fn pruned_supports(store: &VarStore, sup: &Supports) -> Vec<String> {
    let mut out = Vec::new();
    for task in 0..store.len() {
        for &s in &sup.starts[task] {
            if s < store.est(task) || s > store.lst(task) {
                out.push(format!(
                    "task {task}: start {s} supported but domain is [{}, {}]",
                    store.est(task),
                    store.lst(task)
                ));
            }
        }
        let domain = store.machine_domain(task);
        for m in &sup.machines[task] {
            if !domain.contains(m) {
                out.push(format!("task {task}: machine {m} supported but domain is {domain:?}"));
            }
        }
    }
    out
}

fn random_decision(store: &VarStore, rng: &mut RngStream) -> Decision {
    let task = rng.index(store.len());
    if store.machine_count(task) > 1 && rng.chance(0.5) {
        let domain = store.machine_domain(task);
        return Decision::FixMachine {
            task,
            machine: domain[rng.index(domain.len())],
        };
    }
    let bound = rng.range_inclusive(store.est(task), store.lst(task));
    let side = if rng.chance(0.5) { Side::Upper } else { Side::Lower };
    Decision::RestrictStart { task, bound, side }
}

/// Posts `instance` under `ub`, then walks a random path of up to `steps`
/// decisions. At the root and after every decision, each value occurring in
/// a feasible completion must still be in its domain, and every reported
/// conflict must be confirmed by enumeration. Returns the violations found.
pub fn soundness_violations(instance: &OtsInstance, ub: Time, rng: &mut RngStream, steps: usize) -> Vec<String> {
    let mut window = Window::open(instance.len());
    let root = supports(instance, ub, &window);
    let mut store = match VarStore::post(instance, ub) {
        Ok(store) => store,
        Err(_) if root.count == 0 => return Vec::new(),
        Err(_) => return vec![format!("root conflict with {} feasible schedules", root.count)],
    };
    let mut violations = pruned_supports(&store, &root);
    for _ in 0..steps {
        if store.is_empty() {
            break;
        }
        let decision = random_decision(&store, rng);
        let next = window.with(decision);
        let sup = supports(instance, ub, &next);
        match store.decide(decision) {
            Ok(_) => {
                window = next;
                violations.extend(pruned_supports(&store, &sup));
            }
            Err((checkpoint, _)) => {
                if sup.count > 0 {
                    violations.push(format!(
                        "{decision:?} reported a conflict but {} schedules remain",
                        sup.count
                    ));
                }
                store.backtrack(checkpoint);
            }
        }
    }
    violations
}
