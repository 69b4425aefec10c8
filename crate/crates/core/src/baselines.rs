//! Non-backtracking comparison schedulers.
//!
//! Both place one test at a time at the earliest start that avoids every
//! interval already booked on the chosen machine and on each resource the test
//! holds. Interior idle gaps may be filled.

use crate::model::{OtsInstance, Schedule, ScheduleEntry, TestCase};
use crate::rng::RngStream;
use crate::search::phase1_order;
use crate::Time;

/// Booked intervals per machine and per resource.
struct Bookings {
    machine_ids: Vec<u32>,
    resource_ids: Vec<u32>,
    machines: Vec<Vec<(Time, Time)>>,
    resources: Vec<Vec<(Time, Time)>>,
}

impl Bookings {
    fn new(instance: &OtsInstance) -> Self {
        Self {
            machine_ids: instance.machines().to_vec(),
            resource_ids: instance.resources().to_vec(),
            machines: vec![Vec::new(); instance.machines().len()],
            resources: vec![Vec::new(); instance.resources().len()],
        }
    }

    fn machine_index(&self, id: u32) -> usize {
        self.machine_ids.binary_search(&id).expect("validated instance")
    }

    fn resource_index(&self, id: u32) -> usize {
        self.resource_ids.binary_search(&id).expect("validated instance")
    }

    fn earliest_start(&self, test: &TestCase, machine: u32) -> Time {
        let mut lanes = vec![&self.machines[self.machine_index(machine)]];
        lanes.extend(test.resources.iter().map(|&r| &self.resources[self.resource_index(r)]));
        let d = test.duration;
        let mut t = 0;
        loop {
            let blocker = lanes
                .iter()
                .flat_map(|lane| lane.iter())
                .filter(|&&(s, e)| s < t + d && e > t)
                .map(|&(_, e)| e)
                .max();
            match blocker {
                Some(e) => t = e,
                None => return t,
            }
        }
    }

    fn book(&mut self, test: &TestCase, machine: u32, start: Time) {
        let interval = (start, start + test.duration);
        let k = self.machine_index(machine);
        self.machines[k].push(interval);
        for &r in &test.resources {
            let j = self.resource_index(r);
            self.resources[j].push(interval);
        }
    }
}

/// Places tests by decreasing resource demand (then duration, then id), each
/// on the eligible machine with the earliest feasible start; ties go to the
/// lowest machine id.
pub fn greedy_schedule(instance: &OtsInstance) -> Schedule {
    let mut bookings = Bookings::new(instance);
    let mut entries = Vec::with_capacity(instance.len());
    for id in phase1_order(instance) {
        let test = instance.test(id).expect("order lists instance tests");
        let (start, machine) = test
            .machines
            .iter()
            .map(|&m| (bookings.earliest_start(test, m), m))
            .min()
            .expect("eligible set is non-empty");
        bookings.book(test, machine, start);
        entries.push(ScheduleEntry {
            test: id,
            machine,
            start,
            end: start + test.duration,
        });
    }
    Schedule::from_entries(entries)
}

/// Draws an unplaced test uniformly, then one of its eligible machines
/// uniformly, and places it at the earliest feasible start on that machine.
pub fn random_schedule(instance: &OtsInstance, rng: &mut RngStream) -> Schedule {
    let mut bookings = Bookings::new(instance);
    let mut remaining: Vec<&TestCase> = instance.tests().iter().collect();
    let mut entries = Vec::with_capacity(instance.len());
    while !remaining.is_empty() {
        let test = remaining.remove(rng.index(remaining.len()));
        let machine = test.machines[rng.index(test.machines.len())];
        let start = bookings.earliest_start(test, machine);
        bookings.book(test, machine, start);
        entries.push(ScheduleEntry {
            test: test.id,
            machine,
            start,
            end: start + test.duration,
        });
    }
    Schedule::from_entries(entries)
}
