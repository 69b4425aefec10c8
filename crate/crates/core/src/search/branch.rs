use crate::engine::{Conflict, Decision, Side, VarStore};
use crate::model::{OtsInstance, Schedule, ScheduleEntry};

/// One branch of a choice point. `cursor` is the round-robin cursor to set
/// when this branch is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alternative {
    pub decision: Decision,
    pub cursor: Option<usize>,
}

/// Test ids by decreasing number of resources, then decreasing duration,
/// then increasing id.
pub fn phase1_order(instance: &OtsInstance) -> Vec<u32> {
    let mut tests: Vec<_> = instance.tests().iter().collect();
    tests.sort_by(|a, b| {
        b.resources
            .len()
            .cmp(&a.resources.len())
            .then(b.duration.cmp(&a.duration))
            .then(a.id.cmp(&b.id))
    });
    tests.into_iter().map(|t| t.id).collect()
}

/// Branching for one task under duration splitting.
///
/// A task whose start domain is at least its duration wide is bisected at the
/// midpoint, lower half first. Once the start is narrow enough, an unassigned
/// task branches over its remaining machines, rotated to begin at the first
/// machine position at or after the round-robin cursor. Returns no
/// alternatives once the task is assigned and has a compulsory part.
pub fn branch(store: &VarStore, task: usize) -> Vec<Alternative> {
    let (est, lst) = (store.est(task), store.lst(task));
    if lst - est >= store.duration(task) {
        return bisect(task, est, lst);
    }
    if store.machine_count(task) > 1 {
        let m = store.machine_ids().len();
        let cursor = store.cursor();
        let mut positions: Vec<usize> = store.machine_positions(task).collect();
        let pivot = positions.partition_point(|&k| k < cursor);
        positions.rotate_left(pivot);
        return positions
            .into_iter()
            .map(|k| Alternative {
                decision: Decision::FixMachine {
                    task,
                    machine: store.machine_ids()[k],
                },
                cursor: Some((k + 1) % m),
            })
            .collect();
    }
    Vec::new()
}

fn bisect(task: usize, est: crate::Time, lst: crate::Time) -> Vec<Alternative> {
    let mid = (est + lst).div_euclid(2);
    vec![
        Alternative {
            decision: Decision::RestrictStart {
                task,
                bound: mid,
                side: Side::Upper,
            },
            cursor: None,
        },
        Alternative {
            decision: Decision::RestrictStart {
                task,
                bound: mid + 1,
                side: Side::Lower,
            },
            cursor: None,
        },
    ]
}

/// Baseline branching: the leftmost unassigned machine variable with machines
/// in ascending order, then the leftmost unfixed start bisected lower half
/// first.
pub(crate) fn naive_branch(store: &VarStore) -> Vec<Alternative> {
    if let Some(task) = (0..store.len()).find(|&i| store.machine_count(i) > 1) {
        return store
            .machine_positions(task)
            .map(|k| Alternative {
                decision: Decision::FixMachine {
                    task,
                    machine: store.machine_ids()[k],
                },
                cursor: None,
            })
            .collect();
    }
    match (0..store.len()).find(|&i| store.est(i) < store.lst(i)) {
        Some(task) => bisect(task, store.est(task), store.lst(task)),
        None => Vec::new(),
    }
}

/// Completes a state in which every task has a machine: repeatedly fixes the
/// unfixed task with the smallest earliest start to that start and
/// propagates. Ties go to the lowest task index. The caller owns backtracking
/// of the changes made here.
pub fn phase2_complete(store: &mut VarStore) -> Result<Schedule, Conflict> {
    let rank: Vec<usize> = (0..store.len()).collect();
    phase2_complete_ranked(store, &rank)
}

/// [`phase2_complete`] with ties on earliest start broken by `rank[task]`.
pub fn phase2_complete_ranked(store: &mut VarStore, rank: &[usize]) -> Result<Schedule, Conflict> {
    loop {
        let next = (0..store.len())
            .filter(|&i| store.est(i) < store.lst(i))
            .min_by_key(|&i| (store.est(i), rank[i]));
        let Some(task) = next else {
            break;
        };
        store
            .decide(Decision::RestrictStart {
                task,
                bound: store.est(task),
                side: Side::Upper,
            })
            .map_err(|(_, c)| c)?;
    }
    let mut entries = Vec::with_capacity(store.len());
    for i in 0..store.len() {
        let k = store.fixed_machine(i).ok_or(Conflict)?;
        entries.push(ScheduleEntry {
            test: store.test_id(i),
            machine: store.machine_ids()[k],
            start: store.est(i),
            end: store.est(i) + store.duration(i),
        });
    }
    Ok(Schedule::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::post_model;
    use crate::model::{example_instance, example_schedule, validate_schedule, TestCase};

    #[test]
    fn example_order() {
        assert_eq!(
            phase1_order(&example_instance()),
            vec![10, 2, 4, 3, 5, 9, 1, 6, 8, 7]
        );
    }

    #[test]
    fn order_ties_fall_back_to_id() {
        let tests = (1..=4).rev().map(|id| TestCase::new(id, 5, vec![1], vec![])).collect();
        let inst = OtsInstance::new("t", vec![1], vec![], tests).unwrap();
        assert_eq!(phase1_order(&inst), vec![1, 2, 3, 4]);
        let one = OtsInstance::new("t", vec![1], vec![], vec![TestCase::new(9, 1, vec![1], vec![])]).unwrap();
        assert_eq!(phase1_order(&one), vec![9]);
    }

    fn one_test(d: crate::Time, machines: Vec<u32>, ub: crate::Time) -> VarStore {
        let all = machines.clone();
        let inst = OtsInstance::new("t", all, vec![], vec![TestCase::new(1, d, machines, vec![])]).unwrap();
        post_model(&inst, ub).unwrap()
    }

    #[test]
    fn bisects_until_compulsory_part() {
        let store = one_test(4, vec![1], 13);
        assert_eq!((store.est(0), store.lst(0)), (0, 9));
        let alts = branch(&store, 0);
        assert_eq!(
            alts.iter().map(|a| a.decision).collect::<Vec<_>>(),
            vec![
                Decision::RestrictStart { task: 0, bound: 4, side: Side::Upper },
                Decision::RestrictStart { task: 0, bound: 5, side: Side::Lower },
            ]
        );
        let narrow = one_test(4, vec![1], 7);
        assert_eq!((narrow.est(0), narrow.lst(0)), (0, 3));
        assert!(branch(&narrow, 0).is_empty());
    }

    #[test]
    fn splits_before_choosing_machine() {
        let store = one_test(2, vec![1, 2, 3], 10);
        assert!(matches!(
            branch(&store, 0)[0].decision,
            Decision::RestrictStart { bound: 4, side: Side::Upper, .. }
        ));
    }

    #[test]
    fn round_robin_rotation() {
        let mut store = one_test(2, vec![1, 2, 3], 3);
        store.set_cursor(1);
        let machines: Vec<_> = branch(&store, 0)
            .into_iter()
            .map(|a| match a.decision {
                Decision::FixMachine { machine, .. } => (machine, a.cursor),
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(machines, vec![(2, Some(2)), (3, Some(0)), (1, Some(1))]);
    }

    #[test]
    fn completion_takes_minimal_starts() {
        let mut store = one_test(3, vec![1], 10);
        let s = phase2_complete(&mut store).unwrap();
        assert_eq!(s.entries()[0].start, 0);

        let inst = OtsInstance::new(
            "chain",
            vec![1],
            vec![],
            vec![
                TestCase::new(1, 2, vec![1], vec![]),
                TestCase::new(2, 3, vec![1], vec![]),
            ],
        )
        .unwrap();
        let mut store = post_model(&inst, 10).unwrap();
        // A before B: give B a compulsory part after A's
        store
            .decide(Decision::RestrictStart { task: 1, bound: 2, side: Side::Lower })
            .unwrap();
        let s = phase2_complete(&mut store).unwrap();
        assert_eq!(s.entry(1).unwrap().start, 0);
        assert_eq!(s.entry(2).unwrap().start, 2);
    }

    #[test]
    fn completion_reproduces_optimal_example_order() {
        let inst = example_instance();
        let target = example_schedule();
        let mut store = post_model(&inst, 11).unwrap();
        // assign machines and pin each test's start window to its slot's
        // compulsory part, then let completion compact it
        for e in target.entries() {
            let task = store.task_of(e.test).unwrap();
            store
                .decide(Decision::FixMachine { task, machine: e.machine })
                .unwrap();
            store
                .decide(Decision::RestrictStart { task, bound: e.start, side: Side::Upper })
                .unwrap();
        }
        let s = phase2_complete(&mut store).unwrap();
        assert_eq!(s.makespan(), 11);
        assert!(validate_schedule(&inst, &s).is_empty());
        assert_eq!(s, target);
    }
}
