use serde::{Deserialize, Serialize};

use crate::model::OtsInstance;
use crate::Time;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub test: u32,
    pub machine: u32,
    pub start: Time,
    pub end: Time,
}

/// A complete assignment of tests to machines and start times.
///
/// Entries are kept sorted by test id; `makespan` is the latest end time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
    makespan: Time,
}

impl Schedule {
    /// Builds a schedule from raw entries, sorting them by test id and
    /// recomputing the makespan.
    pub fn from_entries(mut entries: Vec<ScheduleEntry>) -> Self {
        entries.sort_by_key(|e| (e.test, e.machine, e.start));
        let makespan = entries.iter().map(|e| e.end).max().unwrap_or(0);
        Self { entries, makespan }
    }

    /// Builds a schedule from `(test, machine, start)` placements, taking end
    /// times from the instance durations.
    pub fn from_placements(
        instance: &OtsInstance,
        placements: impl IntoIterator<Item = (u32, u32, Time)>,
    ) -> Self {
        let entries = placements
            .into_iter()
            .map(|(test, machine, start)| {
                let d = instance.test(test).map(|t| t.duration).unwrap_or(0);
                ScheduleEntry {
                    test,
                    machine,
                    start,
                    end: start + d,
                }
            })
            .collect();
        Self::from_entries(entries)
    }

    /// Keeps entries and makespan exactly as given. Only the validator should
    /// ever see a schedule whose makespan disagrees with its entries.
    pub fn from_raw_parts(mut entries: Vec<ScheduleEntry>, makespan: Time) -> Self {
        entries.sort_by_key(|e| (e.test, e.machine, e.start));
        Self { entries, makespan }
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn makespan(&self) -> Time {
        self.makespan
    }

    pub fn entry(&self, test: u32) -> Option<&ScheduleEntry> {
        self.entries
            .binary_search_by_key(&test, |e| e.test)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
