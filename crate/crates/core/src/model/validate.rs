use std::collections::BTreeMap;
use std::fmt;

use crate::model::{OtsInstance, Schedule, ScheduleEntry};
use crate::Time;

/// One broken constraint found by [`validate_schedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationViolation {
    MachineOverlap {
        machine: u32,
        tests: (u32, u32),
        interval: (Time, Time),
    },
    ResourceOverlap {
        resource: u32,
        tests: (u32, u32),
        interval: (Time, Time),
    },
    IneligibleMachine {
        test: u32,
        machine: u32,
    },
    MissingTest {
        test: u32,
    },
    /// Either a test listed twice or an entry for a test the instance lacks.
    DuplicateTest {
        test: u32,
    },
    BadEndTime {
        test: u32,
        start: Time,
        end: Time,
        expected_end: Time,
    },
    BadMakespan {
        reported: Time,
        actual: Time,
    },
}

impl fmt::Display for ValidationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MachineOverlap {
                machine,
                tests,
                interval,
            } => write!(
                f,
                "tests {} and {} overlap on machine {machine} during [{}, {})",
                tests.0, tests.1, interval.0, interval.1
            ),
            Self::ResourceOverlap {
                resource,
                tests,
                interval,
            } => write!(
                f,
                "tests {} and {} both hold resource {resource} during [{}, {})",
                tests.0, tests.1, interval.0, interval.1
            ),
            Self::IneligibleMachine { test, machine } => {
                write!(f, "test {test} cannot run on machine {machine}")
            }
            Self::MissingTest { test } => write!(f, "test {test} is not scheduled"),
            Self::DuplicateTest { test } => {
                write!(f, "test {test} is scheduled more than once or is unknown")
            }
            Self::BadEndTime {
                test,
                start,
                end,
                expected_end,
            } => write!(
                f,
                "test {test} runs [{start}, {end}) but should end at {expected_end}"
            ),
            Self::BadMakespan { reported, actual } => {
                write!(f, "makespan {reported} reported, entries end at {actual}")
            }
        }
    }
}

/// Checks a schedule against every constraint of the instance.
///
/// Intervals are half-open, so a test may start exactly when another ends on
/// the same machine or resource. Accepts arbitrary schedules; an empty result
/// means the schedule is feasible.
pub fn validate_schedule(instance: &OtsInstance, schedule: &Schedule) -> Vec<ValidationViolation> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    for e in schedule.entries() {
        *seen.entry(e.test).or_default() += 1;
    }
    for (&test, &count) in &seen {
        if count > 1 || instance.test(test).is_none() {
            out.push(ValidationViolation::DuplicateTest { test });
        }
    }
    for t in instance.tests() {
        if !seen.contains_key(&t.id) {
            out.push(ValidationViolation::MissingTest { test: t.id });
        }
    }

    for e in schedule.entries() {
        let Some(t) = instance.test(e.test) else {
            continue;
        };
        if !t.can_run_on(e.machine) {
            out.push(ValidationViolation::IneligibleMachine {
                test: e.test,
                machine: e.machine,
            });
        }
        if e.end != e.start + t.duration || e.start < 0 {
            out.push(ValidationViolation::BadEndTime {
                test: e.test,
                start: e.start,
                end: e.end,
                expected_end: e.start + t.duration,
            });
        }
    }

    let mut by_machine: BTreeMap<u32, Vec<&ScheduleEntry>> = BTreeMap::new();
    for e in schedule.entries() {
        by_machine.entry(e.machine).or_default().push(e);
    }
    for (&machine, group) in &by_machine {
        for (a, b, interval) in overlapping_pairs(group) {
            out.push(ValidationViolation::MachineOverlap {
                machine,
                tests: (a, b),
                interval,
            });
        }
    }

    for &resource in instance.resources() {
        let group: Vec<&ScheduleEntry> = schedule
            .entries()
            .iter()
            .filter(|e| instance.test(e.test).is_some_and(|t| t.uses(resource)))
            .collect();
        for (a, b, interval) in overlapping_pairs(&group) {
            out.push(ValidationViolation::ResourceOverlap {
                resource,
                tests: (a, b),
                interval,
            });
        }
    }

    let actual = schedule.entries().iter().map(|e| e.end).max().unwrap_or(0);
    if schedule.makespan() != actual {
        out.push(ValidationViolation::BadMakespan {
            reported: schedule.makespan(),
            actual,
        });
    }
    out
}

fn overlapping_pairs(group: &[&ScheduleEntry]) -> Vec<(u32, u32, (Time, Time))> {
    let mut pairs = Vec::new();
    for (i, a) in group.iter().enumerate() {
        for b in &group[i + 1..] {
            let lo = a.start.max(b.start);
            let hi = a.end.min(b.end);
            if lo < hi {
                let (x, y) = if a.test <= b.test {
                    (a.test, b.test)
                } else {
                    (b.test, a.test)
                };
                pairs.push((x, y, (lo, hi)));
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{example_instance, example_schedule};

    #[test]
    fn optimal_example_schedule_is_clean() {
        let inst = example_instance();
        let s = example_schedule();
        assert_eq!(s.makespan(), 11);
        assert_eq!(validate_schedule(&inst, &s), vec![]);
    }

    #[test]
    fn resource_overlap_detected() {
        let inst = example_instance();
        let s = Schedule::from_placements(
            &inst,
            [
                (1, 3, 20),
                (2, 1, 0),
                (3, 1, 30),
                (4, 2, 0),
                (5, 3, 40),
                (6, 3, 50),
                (7, 1, 60),
                (8, 2, 60),
                (9, 3, 60),
                (10, 1, 70),
            ],
        );
        let v = validate_schedule(&inst, &s);
        assert!(v.contains(&ValidationViolation::ResourceOverlap {
            resource: 1,
            tests: (2, 4),
            interval: (0, 4),
        }));
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn ineligible_machine_detected() {
        let inst = example_instance();
        let mut entries = example_schedule().entries().to_vec();
        let e8 = entries.iter_mut().find(|e| e.test == 8).unwrap();
        e8.machine = 1;
        e8.start = 20;
        e8.end = 22;
        let v = validate_schedule(&inst, &Schedule::from_entries(entries));
        assert!(v.contains(&ValidationViolation::IneligibleMachine { test: 8, machine: 1 }));
    }

    #[test]
    fn structural_violations() {
        let inst = example_instance();
        let mut entries = example_schedule().entries().to_vec();
        entries.retain(|e| e.test != 5);
        entries.push(entries[0]);
        entries[1].end += 1;
        let s = Schedule::from_raw_parts(entries, 3);
        let v = validate_schedule(&inst, &s);
        assert!(v.contains(&ValidationViolation::MissingTest { test: 5 }));
        assert!(v.contains(&ValidationViolation::DuplicateTest { test: 1 }));
        assert!(v.iter().any(|x| matches!(x, ValidationViolation::BadEndTime { .. })));
        assert!(v.iter().any(|x| matches!(x, ValidationViolation::BadMakespan { reported: 3, .. })));
        assert!(v.iter().any(|x| matches!(x, ValidationViolation::MachineOverlap { machine: 1, .. })));
    }

    #[test]
    fn back_to_back_is_not_an_overlap() {
        let inst = example_instance();
        let s = example_schedule();
        // tests 4 then 2 on resource 1 meet at t = 4
        assert_eq!(s.entry(4).unwrap().end, s.entry(2).unwrap().start);
        assert!(validate_schedule(&inst, &s).is_empty());
    }
}
