use std::marker::PhantomData;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{AdaptError, Result};

static NEXT_TEAM_ID: AtomicU64 = AtomicU64::new(1);

/// A fixed-size team of worker threads, the analogue of an OpenMP parallel
/// region. Every [`ThreadTeam::broadcast`] runs its closure exactly once on
/// each worker and returns when all of them have finished, so consecutive
/// broadcasts are separated by a barrier.
pub struct ThreadTeam {
    pool: rayon::ThreadPool,
    threads: usize,
    id: u64,
    pub(crate) counters: Counters,
}

#[derive(Default)]
pub(crate) struct Counters {
    pub steals: AtomicU64,
    pub worklist_overflows: AtomicU64,
    pub edits_committed: AtomicU64,
    pub edits_dropped: AtomicU64,
    pub parallel_regions: AtomicU64,
}

/// Snapshot of the team's instrumentation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuntimeStats {
    pub steals: u64,
    pub worklist_overflows: u64,
    pub edits_committed: u64,
    pub edits_dropped: u64,
    pub parallel_regions: u64,
}

impl RuntimeStats {
    pub fn since(&self, earlier: &RuntimeStats) -> RuntimeStats {
        RuntimeStats {
            steals: self.steals - earlier.steals,
            worklist_overflows: self.worklist_overflows - earlier.worklist_overflows,
            edits_committed: self.edits_committed - earlier.edits_committed,
            edits_dropped: self.edits_dropped - earlier.edits_dropped,
            parallel_regions: self.parallel_regions - earlier.parallel_regions,
        }
    }
}

/// Identity of the worker thread executing a parallel region.
///
/// Only the team creates workers, and a worker never leaves the thread it was
/// created on (it is neither `Send` nor `Sync`), so for a given team each
/// thread id is held by exactly one OS thread.
pub struct Worker {
    tid: usize,
    team_id: u64,
    _pinned: PhantomData<*const ()>,
}

impl Worker {
    #[inline]
    pub fn tid(&self) -> usize {
        self.tid
    }

    #[inline]
    pub(crate) fn team_id(&self) -> u64 {
        self.team_id
    }
}

impl ThreadTeam {
    pub fn new(threads: usize) -> Result<Self> {
        if threads == 0 {
            return Err(AdaptError::Config("thread count must be at least 1".into()));
        }
        let id = NEXT_TEAM_ID.fetch_add(1, Ordering::Relaxed);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .thread_name(move |i| format!("adaptix-{id}-{i}"))
            .build()
            .map_err(|e| AdaptError::ThreadPool(e.to_string()))?;
        Ok(ThreadTeam {
            pool,
            threads,
            id,
            counters: Counters::default(),
        })
    }

    #[inline]
    pub fn threads(&self) -> usize {
        self.threads
    }

    #[inline]
    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    /// Runs `f` once on every worker; results are ordered by thread id.
    pub fn broadcast<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&Worker) -> R + Sync,
    {
        self.counters.parallel_regions.fetch_add(1, Ordering::Relaxed);
        let team_id = self.id;
        self.pool.broadcast(|ctx| {
            let worker = Worker {
                tid: ctx.index(),
                team_id,
                _pinned: PhantomData,
            };
            f(&worker)
        })
    }

    pub fn stats(&self) -> RuntimeStats {
        let c = &self.counters;
        RuntimeStats {
            steals: c.steals.load(Ordering::Relaxed),
            worklist_overflows: c.worklist_overflows.load(Ordering::Relaxed),
            edits_committed: c.edits_committed.load(Ordering::Relaxed),
            edits_dropped: c.edits_dropped.load(Ordering::Relaxed),
            parallel_regions: c.parallel_regions.load(Ordering::Relaxed),
        }
    }
}

impl std::fmt::Debug for ThreadTeam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThreadTeam")
            .field("threads", &self.threads)
            .field("id", &self.id)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    #[test]
    fn broadcast_runs_once_per_thread() {
        let team = ThreadTeam::new(4).unwrap();
        let seen = Mutex::new(Vec::new());
        let out = team.broadcast(|w| {
            seen.lock().unwrap().push(w.tid());
            w.tid() * 10
        });
        assert_eq!(out, vec![0, 10, 20, 30]);
        let mut seen = seen.into_inner().unwrap();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(ThreadTeam::new(0).is_err());
    }
}
