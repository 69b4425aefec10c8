use crate::Time;

/// A compulsory part `[start, end)` owned by task `owner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Part {
    pub start: Time,
    pub end: Time,
    pub owner: usize,
}

/// Unit-capacity timetable: compulsory parts sorted by start time.
///
/// Once [`Profile::check`] succeeds the parts are pairwise disjoint, so their
/// end times are sorted as well. The fit queries rely on that.
#[derive(Debug, Clone, Default)]
pub struct Profile {
    parts: Vec<Part>,
}

impl Profile {
    pub fn clear(&mut self) {
        self.parts.clear();
    }

    pub fn push(&mut self, part: Part) {
        self.parts.push(part);
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Sorts the parts and reports the first pair that overlaps, if any.
    pub fn check(&mut self) -> Result<(), (Part, Part)> {
        self.parts.sort_unstable_by_key(|p| (p.start, p.owner));
        match self.parts.windows(2).find(|w| w[1].start < w[0].end) {
            Some(w) => Err((w[0], w[1])),
            None => Ok(()),
        }
    }

    /// Smallest start in `[from, latest]` at which a task of length `duration`
    /// avoids every part not owned by `skip`.
    pub fn earliest_fit(&self, skip: usize, from: Time, latest: Time, duration: Time) -> Option<Time> {
        let mut s = from;
        let mut idx = self.parts.partition_point(|p| p.end <= s);
        while let Some(p) = self.parts.get(idx) {
            idx += 1;
            if p.owner == skip {
                continue;
            }
            if p.start >= s + duration {
                break;
            }
            s = p.end;
            if s > latest {
                return None;
            }
        }
        (s <= latest).then_some(s)
    }

    /// Largest start in `[earliest, to]` at which a task of length `duration`
    /// avoids every part not owned by `skip`.
    pub fn latest_fit(&self, skip: usize, earliest: Time, to: Time, duration: Time) -> Option<Time> {
        let mut s = to;
        let mut idx = self.parts.partition_point(|p| p.start < s + duration);
        while idx > 0 {
            idx -= 1;
            let p = self.parts[idx];
            if p.owner == skip {
                continue;
            }
            if p.end <= s {
                break;
            }
            s = p.start - duration;
            if s < earliest {
                return None;
            }
        }
        (s >= earliest).then_some(s)
    }
}
