//! Backtrackable finite-domain store with timetable propagation.
//!
//! Three kinds of propagator run over a [`VarStore`]:
//!
//! * a makespan propagator keeping every task inside `[0, makespan_ub)`;
//! * one unit-capacity machine propagator covering all machines, which uses
//!   the compulsory parts of tasks already assigned to a machine;
//! * one disjunctive propagator per global resource over the tasks holding it.
//!
//! Propagators are scheduled from a de-duplicated FIFO queue and run until no
//! domain changes.

mod profile;
mod store;

pub use profile::{Part, Profile};
pub use store::{Checkpoint, Conflict, Decision, DomainSnapshot, Side, VarStore};

use crate::model::OtsInstance;
use crate::Time;

/// Builds the store for `instance` under makespan bound `makespan_ub`.
pub fn post_model(instance: &OtsInstance, makespan_ub: Time) -> Result<VarStore, Conflict> {
    VarStore::post(instance, makespan_ub)
}

/// Re-runs every propagator to fixpoint.
pub fn propagate_fixpoint(store: &mut VarStore) -> Result<(), Conflict> {
    store.propagate_all()
}
