//! Parallel machinery shared by every kernel: a persistent thread team, the
//! deferred-update ledger, the atomic-capture worklist and the work-stealing
//! loop scheduler.

mod ledger;
mod steal;
mod team;
mod worklist;

pub use ledger::{CommitStats, DeferredLedger};
pub use steal::LoopStats;
pub use team::{RuntimeStats, ThreadTeam, Worker};
pub use worklist::{CapacityPolicy, SharedWorklist, WorklistOverflow};
