use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::profile::{Part, Profile};
use crate::model::OtsInstance;
use crate::Time;

/// Returned when propagation proves that the current domains admit no
/// feasible completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("propagation failed")]
pub struct Conflict;

/// Trail position. Backtracking to it restores every domain exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Checkpoint(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `S <= bound`
    Upper,
    /// `S >= bound`
    Lower,
}

/// A search decision. Tasks are addressed by their position in the
/// instance's test list, machines by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    FixMachine { task: usize, machine: u32 },
    RestrictStart { task: usize, bound: Time, side: Side },
}

/// Indexed, immutable view of an instance.
#[derive(Debug, Clone)]
struct Tasks {
    ids: Vec<u32>,
    durations: Vec<Time>,
    machine_ids: Vec<u32>,
    resource_ids: Vec<u32>,
    /// Per task: indices of the resources it holds.
    resources: Vec<Vec<usize>>,
    /// Per resource: indices of the tasks holding it.
    holders: Vec<Vec<usize>>,
    words: usize,
}

#[derive(Debug, Clone, Copy)]
enum Undo {
    Est(usize, Time),
    Lst(usize, Time),
    Word(usize, u64),
    Ub(Time),
    Cursor(usize),
}

const MAKESPAN: usize = 0;
const MACHINES: usize = 1;
const FIRST_RESOURCE: usize = 2;

/// Domains for every start and machine variable plus the makespan bound,
/// backed by an undo trail.
///
/// Start domains are intervals `[est, lst]`; end times are implicit as
/// `start + duration`. Machine domains are bitsets over machine positions.
#[derive(Debug, Clone)]
pub struct VarStore {
    tasks: Tasks,
    est: Vec<Time>,
    lst: Vec<Time>,
    machines: Vec<u64>,
    ub: Time,
    cursor: usize,
    trail: Vec<Undo>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
    running: Option<usize>,
    profiles: Vec<Profile>,
    scratch: Profile,
    propagations: u64,
}

/// Plain copy of all domains, for exact before/after comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSnapshot {
    pub est: Vec<Time>,
    pub lst: Vec<Time>,
    pub machines: Vec<u64>,
    pub makespan_ub: Time,
    pub cursor: usize,
}

impl VarStore {
    /// Posts the scheduling model with makespan bound `makespan_ub` and runs
    /// the initial fixpoint.
    pub fn post(instance: &OtsInstance, makespan_ub: Time) -> Result<Self, Conflict> {
        let n = instance.len();
        let machine_ids = instance.machines().to_vec();
        let resource_ids = instance.resources().to_vec();
        let words = machine_ids.len().div_ceil(64).max(1);
        let mut machines = vec![0u64; n * words];
        let mut resources = Vec::with_capacity(n);
        let mut holders = vec![Vec::new(); resource_ids.len()];
        for (i, t) in instance.tests().iter().enumerate() {
            for m in &t.machines {
                let k = machine_ids.binary_search(m).expect("validated instance");
                machines[i * words + k / 64] |= 1 << (k % 64);
            }
            let rs: Vec<usize> = t
                .resources
                .iter()
                .map(|r| resource_ids.binary_search(r).expect("validated instance"))
                .collect();
            for &r in &rs {
                holders[r].push(i);
            }
            resources.push(rs);
        }
        let tasks = Tasks {
            ids: instance.tests().iter().map(|t| t.id).collect(),
            durations: instance.tests().iter().map(|t| t.duration).collect(),
            machine_ids,
            resource_ids,
            resources,
            holders,
            words,
        };
        let n_props = FIRST_RESOURCE + tasks.resource_ids.len();
        let mut store = Self {
            est: vec![0; n],
            lst: tasks.durations.iter().map(|d| makespan_ub - d).collect(),
            machines,
            ub: makespan_ub,
            cursor: 0,
            trail: Vec::new(),
            queue: VecDeque::new(),
            queued: vec![false; n_props],
            running: None,
            profiles: vec![Profile::default(); tasks.machine_ids.len()],
            scratch: Profile::default(),
            propagations: 0,
            tasks,
        };
        if (0..n).any(|i| store.lst[i] < 0) {
            return Err(Conflict);
        }
        for p in 0..n_props {
            store.enqueue(p);
        }
        store.propagate()?;
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.est.len()
    }

    pub fn is_empty(&self) -> bool {
        self.est.is_empty()
    }

    pub fn test_id(&self, task: usize) -> u32 {
        self.tasks.ids[task]
    }

    pub fn task_of(&self, test_id: u32) -> Option<usize> {
        self.tasks.ids.iter().position(|&id| id == test_id)
    }

    pub fn duration(&self, task: usize) -> Time {
        self.tasks.durations[task]
    }

    pub fn est(&self, task: usize) -> Time {
        self.est[task]
    }

    pub fn lst(&self, task: usize) -> Time {
        self.lst[task]
    }

    pub fn makespan_ub(&self) -> Time {
        self.ub
    }

    /// Machine ids of the whole instance, ascending.
    pub fn machine_ids(&self) -> &[u32] {
        &self.tasks.machine_ids
    }

    pub fn resource_count(&self, task: usize) -> usize {
        self.tasks.resources[task].len()
    }

    /// Round-robin cursor: a position in [`Self::machine_ids`].
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn set_cursor(&mut self, position: usize) {
        if position != self.cursor {
            self.trail.push(Undo::Cursor(self.cursor));
            self.cursor = position;
        }
    }

    pub fn propagations(&self) -> u64 {
        self.propagations
    }

    fn domain_words(&self, task: usize) -> &[u64] {
        let w = self.tasks.words;
        &self.machines[task * w..(task + 1) * w]
    }

    /// Machine positions (indices into [`Self::machine_ids`]) in the domain.
    pub fn machine_positions(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        self.domain_words(task)
            .iter()
            .enumerate()
            .flat_map(|(w, &word)| BitIter(word).map(move |b| w * 64 + b))
    }

    pub fn machine_domain(&self, task: usize) -> Vec<u32> {
        self.machine_positions(task)
            .map(|k| self.tasks.machine_ids[k])
            .collect()
    }

    pub fn machine_count(&self, task: usize) -> usize {
        self.domain_words(task)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn has_machine(&self, task: usize, position: usize) -> bool {
        self.machines[task * self.tasks.words + position / 64] & (1 << (position % 64)) != 0
    }

    /// Position of the assigned machine once the domain is a singleton.
    pub fn fixed_machine(&self, task: usize) -> Option<usize> {
        let mut it = self.machine_positions(task);
        match (it.next(), it.next()) {
            (Some(k), None) => Some(k),
            _ => None,
        }
    }

    /// `[lst, est + d)` when non-empty.
    pub fn compulsory_part(&self, task: usize) -> Option<(Time, Time)> {
        let end = self.est[task] + self.tasks.durations[task];
        (self.lst[task] < end).then_some((self.lst[task], end))
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint(self.trail.len())
    }

    pub fn backtrack(&mut self, to: Checkpoint) {
        while self.trail.len() > to.0 {
            match self.trail.pop().expect("trail is long enough") {
                Undo::Est(i, v) => self.est[i] = v,
                Undo::Lst(i, v) => self.lst[i] = v,
                Undo::Word(w, v) => self.machines[w] = v,
                Undo::Ub(v) => self.ub = v,
                Undo::Cursor(v) => self.cursor = v,
            }
        }
        self.clear_queue();
    }

    pub fn snapshot(&self) -> DomainSnapshot {
        DomainSnapshot {
            est: self.est.clone(),
            lst: self.lst.clone(),
            machines: self.machines.clone(),
            makespan_ub: self.ub,
            cursor: self.cursor,
        }
    }

    /// Applies a decision and propagates. The returned checkpoint (also
    /// carried by the error) restores the state from before the decision.
    pub fn decide(&mut self, decision: Decision) -> Result<Checkpoint, (Checkpoint, Conflict)> {
        let cp = self.checkpoint();
        match self.apply(decision).and_then(|_| self.propagate()) {
            Ok(()) => Ok(cp),
            Err(c) => Err((cp, c)),
        }
    }

    /// Applies a decision without propagating it.
    pub fn apply(&mut self, decision: Decision) -> Result<(), Conflict> {
        match decision {
            Decision::FixMachine { task, machine } => {
                let k = self
                    .tasks
                    .machine_ids
                    .binary_search(&machine)
                    .map_err(|_| Conflict)?;
                self.fix_machine(task, k)
            }
            Decision::RestrictStart { task, bound, side } => match side {
                Side::Upper => self.set_lst(task, bound).map(drop),
                Side::Lower => self.set_est(task, bound).map(drop),
            },
        }
    }

    /// Tightens the makespan bound and propagates it.
    pub fn tighten_makespan(&mut self, ub: Time) -> Result<(), Conflict> {
        if ub < self.ub {
            self.trail.push(Undo::Ub(self.ub));
            self.ub = ub;
            self.enqueue(MAKESPAN);
        }
        self.propagate()
    }

    /// Runs queued propagators until no domain changes.
    pub fn propagate(&mut self) -> Result<(), Conflict> {
        while let Some(p) = self.queue.pop_front() {
            self.queued[p] = false;
            self.running = Some(p);
            self.propagations += 1;
            let res = match p {
                MAKESPAN => self.propagate_makespan(),
                MACHINES => self.propagate_machines(),
                r => self.propagate_resource(r - FIRST_RESOURCE),
            };
            self.running = None;
            if let Err(c) = res {
                self.clear_queue();
                return Err(c);
            }
        }
        Ok(())
    }

    /// Queues every propagator, then runs to fixpoint.
    pub fn propagate_all(&mut self) -> Result<(), Conflict> {
        for p in 0..self.queued.len() {
            self.enqueue(p);
        }
        self.propagate()
    }

    fn clear_queue(&mut self) {
        for p in self.queue.drain(..) {
            self.queued[p] = false;
        }
        self.running = None;
    }

    fn enqueue(&mut self, p: usize) {
        if !self.queued[p] && self.running != Some(p) {
            self.queued[p] = true;
            self.queue.push_back(p);
        }
    }

    fn notify_bounds(&mut self, task: usize) {
        self.enqueue(MACHINES);
        for j in 0..self.tasks.resources[task].len() {
            let r = self.tasks.resources[task][j];
            self.enqueue(FIRST_RESOURCE + r);
        }
    }

    fn set_est(&mut self, task: usize, v: Time) -> Result<bool, Conflict> {
        if v <= self.est[task] {
            return Ok(false);
        }
        if v > self.lst[task] {
            return Err(Conflict);
        }
        self.trail.push(Undo::Est(task, self.est[task]));
        self.est[task] = v;
        self.notify_bounds(task);
        Ok(true)
    }

    fn set_lst(&mut self, task: usize, v: Time) -> Result<bool, Conflict> {
        if v >= self.lst[task] {
            return Ok(false);
        }
        if v < self.est[task] {
            return Err(Conflict);
        }
        self.trail.push(Undo::Lst(task, self.lst[task]));
        self.lst[task] = v;
        self.notify_bounds(task);
        Ok(true)
    }

    fn set_word(&mut self, index: usize, v: u64) {
        if self.machines[index] != v {
            self.trail.push(Undo::Word(index, self.machines[index]));
            self.machines[index] = v;
        }
    }

    fn fix_machine(&mut self, task: usize, position: usize) -> Result<(), Conflict> {
        if !self.has_machine(task, position) {
            return Err(Conflict);
        }
        if self.machine_count(task) == 1 {
            return Ok(());
        }
        let w = self.tasks.words;
        for j in 0..w {
            let keep = if j == position / 64 {
                1u64 << (position % 64)
            } else {
                0
            };
            self.set_word(task * w + j, keep);
        }
        self.enqueue(MACHINES);
        Ok(())
    }

    fn remove_machine(&mut self, task: usize, position: usize) -> Result<(), Conflict> {
        let index = task * self.tasks.words + position / 64;
        let word = self.machines[index] & !(1u64 << (position % 64));
        self.set_word(index, word);
        self.enqueue(MACHINES);
        if self.machine_count(task) == 0 {
            return Err(Conflict);
        }
        Ok(())
    }

    fn propagate_makespan(&mut self) -> Result<(), Conflict> {
        for i in 0..self.len() {
            self.set_lst(i, self.ub - self.tasks.durations[i])?;
        }
        Ok(())
    }

    /// Unit-capacity timetable over all machines at once: builds the
    /// compulsory-part profile of every machine from tasks assigned to it,
    /// then narrows each task's start bounds and drops machines it no longer
    /// fits on.
    fn propagate_machines(&mut self) -> Result<(), Conflict> {
        let mut profiles = std::mem::take(&mut self.profiles);
        let res = self.machines_pass(&mut profiles);
        self.profiles = profiles;
        res
    }

    fn machines_pass(&mut self, profiles: &mut [Profile]) -> Result<(), Conflict> {
        loop {
            for p in profiles.iter_mut() {
                p.clear();
            }
            for i in 0..self.len() {
                if let (Some(k), Some((start, end))) = (self.fixed_machine(i), self.compulsory_part(i)) {
                    profiles[k].push(Part { start, end, owner: i });
                }
            }
            for p in profiles.iter_mut() {
                p.check().map_err(|_| Conflict)?;
            }

            let mut changed = false;
            let mut positions = Vec::new();
            for i in 0..self.len() {
                let d = self.tasks.durations[i];
                let (est, lst) = (self.est[i], self.lst[i]);
                positions.clear();
                positions.extend(self.machine_positions(i));
                let mut new_est = Time::MAX;
                let mut new_lst = Time::MIN;
                let mut removed = false;
                for &k in &positions {
                    let profile = &profiles[k];
                    if profile.is_empty() {
                        new_est = new_est.min(est);
                        new_lst = new_lst.max(lst);
                        continue;
                    }
                    match profile.earliest_fit(i, est, lst, d) {
                        Some(e) => {
                            let l = profile
                                .latest_fit(i, est, lst, d)
                                .expect("a fit exists once the earliest one does");
                            new_est = new_est.min(e);
                            new_lst = new_lst.max(l);
                        }
                        None => {
                            self.remove_machine(i, k)?;
                            removed = true;
                        }
                    }
                }
                let before = self.compulsory_part(i);
                let tightened = self.set_est(i, new_est)? | self.set_lst(i, new_lst)?;
                if removed && self.machine_count(i) == 1 {
                    changed = true;
                }
                if tightened && self.fixed_machine(i).is_some() && self.compulsory_part(i) != before {
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Disjunctive timetable over the holders of one resource, regardless of
    /// the machines they run on.
    fn propagate_resource(&mut self, r: usize) -> Result<(), Conflict> {
        let mut profile = std::mem::take(&mut self.scratch);
        let res = self.resource_pass(r, &mut profile);
        self.scratch = profile;
        res
    }

    fn resource_pass(&mut self, r: usize, profile: &mut Profile) -> Result<(), Conflict> {
        loop {
            profile.clear();
            for &i in &self.tasks.holders[r] {
                if let Some((start, end)) = self.compulsory_part(i) {
                    profile.push(Part { start, end, owner: i });
                }
            }
            profile.check().map_err(|_| Conflict)?;
            if profile.is_empty() {
                return Ok(());
            }
            let mut changed = false;
            for h in 0..self.tasks.holders[r].len() {
                let i = self.tasks.holders[r][h];
                let d = self.tasks.durations[i];
                let (est, lst) = (self.est[i], self.lst[i]);
                let e = profile.earliest_fit(i, est, lst, d).ok_or(Conflict)?;
                let l = profile.latest_fit(i, est, lst, d).ok_or(Conflict)?;
                let before = self.compulsory_part(i);
                if self.set_est(i, e)? | self.set_lst(i, l)? && self.compulsory_part(i) != before {
                    changed = true;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    /// Text dump of the compulsory parts per machine and per resource.
    pub fn dump_profiles(&self) -> String {
        let mut out = String::new();
        for (k, &m) in self.tasks.machine_ids.iter().enumerate() {
            let _ = write!(out, "machine {m}:");
            let mut parts: Vec<_> = (0..self.len())
                .filter(|&i| self.fixed_machine(i) == Some(k))
                .filter_map(|i| self.compulsory_part(i).map(|p| (p, self.tasks.ids[i])))
                .collect();
            parts.sort_unstable();
            for ((a, b), id) in parts {
                let _ = write!(out, " {id}@[{a},{b})");
            }
            out.push('\n');
        }
        for (r, &id) in self.tasks.resource_ids.iter().enumerate() {
            let _ = write!(out, "resource {id}:");
            let mut parts: Vec<_> = self.tasks.holders[r]
                .iter()
                .filter_map(|&i| self.compulsory_part(i).map(|p| (p, self.tasks.ids[i])))
                .collect();
            parts.sort_unstable();
            for ((a, b), t) in parts {
                let _ = write!(out, " {t}@[{a},{b})");
            }
            out.push('\n');
        }
        out
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}
