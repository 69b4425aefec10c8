use std::collections::BTreeSet;

use crate::model::{ModelError, Schedule};
use crate::Time;

/// A single test case: how long it runs, where it may run, and which global
/// resources it holds exclusively while running.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: u32,
    pub duration: Time,
    /// Eligible machine ids, sorted ascending, never empty.
    pub machines: Vec<u32>,
    /// Global resource ids, sorted ascending.
    pub resources: Vec<u32>,
}

impl TestCase {
    pub fn new(id: u32, duration: Time, machines: Vec<u32>, resources: Vec<u32>) -> Self {
        let mut machines = machines;
        let mut resources = resources;
        machines.sort_unstable();
        machines.dedup();
        resources.sort_unstable();
        resources.dedup();
        Self {
            id,
            duration,
            machines,
            resources,
        }
    }

    pub fn can_run_on(&self, machine: u32) -> bool {
        self.machines.binary_search(&machine).is_ok()
    }

    pub fn uses(&self, resource: u32) -> bool {
        self.resources.binary_search(&resource).is_ok()
    }

    pub fn shares_resource_with(&self, other: &TestCase) -> bool {
        self.resources.iter().any(|r| other.uses(*r))
    }
}

/// A validated scheduling problem: tests, machines and global resources.
///
/// Construction through [`OtsInstance::new`] is the only way to obtain one, so
/// every instance in circulation satisfies the id and subset invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtsInstance {
    name: String,
    tests: Vec<TestCase>,
    machines: Vec<u32>,
    resources: Vec<u32>,
}

impl OtsInstance {
    pub fn new(
        name: impl Into<String>,
        machines: Vec<u32>,
        resources: Vec<u32>,
        tests: Vec<TestCase>,
    ) -> Result<Self, ModelError> {
        let machines = unique_positive(machines, "machine")?;
        let resources = unique_positive(resources, "resource")?;
        let mut seen = BTreeSet::new();
        for test in &tests {
            if test.id == 0 {
                return Err(ModelError::NonPositiveId {
                    kind: "test",
                    id: 0,
                });
            }
            if !seen.insert(test.id) {
                return Err(ModelError::DuplicateId {
                    kind: "test",
                    id: test.id,
                });
            }
            if test.duration < 1 {
                return Err(ModelError::NonPositiveDuration {
                    test: test.id,
                    duration: test.duration,
                });
            }
            if test.machines.is_empty() {
                return Err(ModelError::EmptyEligibleSet { test: test.id });
            }
            if let Some(&m) = test
                .machines
                .iter()
                .find(|m| machines.binary_search(m).is_err())
            {
                return Err(ModelError::UnknownMachine {
                    test: test.id,
                    machine: m,
                });
            }
            if let Some(&r) = test
                .resources
                .iter()
                .find(|r| resources.binary_search(r).is_err())
            {
                return Err(ModelError::UnknownResource {
                    test: test.id,
                    resource: r,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            tests,
            machines,
            resources,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tests(&self) -> &[TestCase] {
        &self.tests
    }

    /// Machine ids, sorted ascending.
    pub fn machines(&self) -> &[u32] {
        &self.machines
    }

    /// Resource ids, sorted ascending.
    pub fn resources(&self) -> &[u32] {
        &self.resources
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn test(&self, id: u32) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.id == id)
    }

    pub fn total_duration(&self) -> Time {
        self.tests.iter().map(|t| t.duration).sum()
    }

    /// Largest of three valid makespan lower bounds: the longest test, the
    /// heaviest resource chain, and the average machine load rounded up.
    pub fn makespan_lower_bound(&self) -> Time {
        if self.tests.is_empty() {
            return 0;
        }
        let longest = self.tests.iter().map(|t| t.duration).max().unwrap_or(0);
        let chain = self
            .resources
            .iter()
            .map(|&r| {
                self.tests
                    .iter()
                    .filter(|t| t.uses(r))
                    .map(|t| t.duration)
                    .sum::<Time>()
            })
            .max()
            .unwrap_or(0);
        let m = self.machines.len() as Time;
        let load = (self.total_duration() + m - 1) / m;
        longest.max(chain).max(load)
    }
}

fn unique_positive(mut ids: Vec<u32>, kind: &'static str) -> Result<Vec<u32>, ModelError> {
    ids.sort_unstable();
    if ids.first() == Some(&0) {
        return Err(ModelError::NonPositiveId { kind, id: 0 });
    }
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(ModelError::DuplicateId { kind, id: w[0] });
    }
    Ok(ids)
}

/// The worked example used throughout the tests: ten tests, three machines and
/// two global resources, with an optimal makespan of 11.
pub fn example_instance() -> OtsInstance {
    let all = vec![1, 2, 3];
    let rows: [(u32, Time, Vec<u32>, Vec<u32>); 10] = [
        (1, 2, all.clone(), vec![]),
        (2, 4, all.clone(), vec![1]),
        (3, 3, all.clone(), vec![1]),
        (4, 4, all.clone(), vec![1]),
        (5, 3, all.clone(), vec![]),
        (6, 2, all.clone(), vec![]),
        (7, 1, vec![1], vec![]),
        (8, 2, vec![2], vec![]),
        (9, 3, vec![3], vec![]),
        (10, 5, vec![1, 3], vec![2]),
    ];
    let tests = rows
        .into_iter()
        .map(|(id, d, m, r)| TestCase::new(id, d, m, r))
        .collect();
    OtsInstance::new("example", all, vec![1, 2], tests).expect("example instance is valid")
}

/// An optimal schedule (makespan 11) for [`example_instance`].
pub fn example_schedule() -> Schedule {
    Schedule::from_placements(
        &example_instance(),
        [
            (1, 1, 0),
            (7, 1, 2),
            (2, 1, 4),
            (3, 1, 8),
            (4, 2, 0),
            (5, 2, 4),
            (6, 2, 7),
            (8, 2, 9),
            (9, 3, 0),
            (10, 3, 3),
        ],
    )
}
