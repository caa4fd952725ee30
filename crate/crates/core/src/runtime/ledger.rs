//! Deferred adjacency updates.
//!
//! With `N` threads the ledger is an `N x N` grid of edit lists. A kernel
//! running on thread `p` that needs to change the lists of vertex `v` does
//! not touch them; it appends the edit to cell `[p][v mod N]`. After the
//! independent set is done, thread `t` applies column `t` (producers in
//! order `0..N`), so each vertex's lists are written by exactly one thread.

use std::cell::UnsafeCell;
use std::sync::atomic::Ordering;

use super::team::{ThreadTeam, Worker};
use crate::mesh::view::MeshView;
use crate::mesh::{apply_edit, AdjacencyEdit, Mesh};

pub struct DeferredLedger {
    threads: usize,
    team_id: u64,
    cells: Box<[UnsafeCell<Vec<AdjacencyEdit>>]>,
}

// Cell [p][*] is only pushed to from the worker with tid p (a `Worker` never
// leaves its thread), and commits need `&mut self`.
unsafe impl Sync for DeferredLedger {}

/// Result of one commit phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommitStats {
    pub applied: u64,
    pub dropped: u64,
    /// Edits applied by a thread other than `target mod N`. Always zero
    /// unless the ownership rule is broken.
    pub ownership_violations: u64,
}

impl DeferredLedger {
    pub fn new(team: &ThreadTeam) -> Self {
        let n = team.threads();
        DeferredLedger {
            threads: n,
            team_id: team.id(),
            cells: (0..n * n).map(|_| UnsafeCell::new(Vec::new())).collect(),
        }
    }

    #[inline]
    pub fn threads(&self) -> usize {
        self.threads
    }

    /// Thread responsible for committing edits to vertex `v`.
    #[inline]
    pub fn owner_of(&self, v: u32) -> usize {
        v as usize % self.threads
    }

    #[inline]
    fn cell(&self, producer: usize, owner: usize) -> usize {
        producer * self.threads + owner
    }

    /// Pushes from inside a parallel region of the ledger's team.
    #[inline]
    pub fn push(&self, worker: &Worker, edit: AdjacencyEdit) {
        assert_eq!(worker.team_id(), self.team_id, "ledger used with a foreign thread team");
        let idx = self.cell(worker.tid(), self.owner_of(edit.target));
        // SAFETY: row `worker.tid()` belongs to this OS thread, see above.
        unsafe { (*self.cells[idx].get()).push(edit) };
    }

    /// Pushes on behalf of `producer` outside any parallel region.
    pub fn push_serial(&mut self, producer: usize, edit: AdjacencyEdit) {
        assert!(producer < self.threads);
        let idx = self.cell(producer, self.owner_of(edit.target));
        self.cells[idx].get_mut().push(edit);
    }

    /// Pending edits produced by `producer` for thread `owner`.
    pub fn list(&mut self, producer: usize, owner: usize) -> &[AdjacencyEdit] {
        let idx = self.cell(producer, owner);
        self.cells[idx].get_mut()
    }

    pub fn pending(&mut self) -> usize {
        self.cells.iter_mut().map(|c| c.get_mut().len()).sum()
    }

    pub fn is_empty(&mut self) -> bool {
        self.pending() == 0
    }

    /// Commits every pending edit in parallel and empties the ledger.
    pub fn commit(&mut self, team: &ThreadTeam, mesh: &mut Mesh) -> CommitStats {
        self.commit_inner(team, mesh, None)
    }

    /// Like [`DeferredLedger::commit`], also recording `(committing thread,
    /// vertex)` for every applied edit.
    pub fn commit_audited(&mut self, team: &ThreadTeam, mesh: &mut Mesh) -> (CommitStats, Vec<(usize, u32)>) {
        let mut audit = Vec::new();
        let stats = self.commit_inner(team, mesh, Some(&mut audit));
        (stats, audit)
    }

    fn cell_ptr(&self, producer: usize, owner: usize) -> *mut Vec<AdjacencyEdit> {
        self.cells[self.cell(producer, owner)].get()
    }

    fn commit_inner(
        &mut self,
        team: &ThreadTeam,
        mesh: &mut Mesh,
        audit: Option<&mut Vec<(usize, u32)>>,
    ) -> CommitStats {
        assert_eq!(team.id(), self.team_id, "ledger committed with a foreign thread team");
        if self.pending() == 0 {
            return CommitStats::default();
        }
        let record = audit.is_some();
        let n = self.threads;
        let ledger: &DeferredLedger = self;
        // SAFETY: thread t only writes the lists of vertices with id % n == t.
        let view = unsafe { MeshView::new(mesh) };
        let per_thread = team.broadcast(|w| {
            let t = w.tid();
            let mut stats = CommitStats::default();
            let mut log = Vec::new();
            for p in 0..n {
                // SAFETY: column t is only touched by thread t during commit,
                // and no pushes can run while we hold `&mut self`.
                let list = unsafe { &mut *ledger.cell_ptr(p, t) };
                for edit in list.drain(..) {
                    let v = edit.target;
                    if v as usize % n != t {
                        stats.ownership_violations += 1;
                    }
                    if !view.vertex_alive(v) {
                        stats.dropped += 1;
                        continue;
                    }
                    apply_edit(view.nn.get_mut(v as usize), view.ne.get_mut(v as usize), edit.kind);
                    stats.applied += 1;
                    if record {
                        log.push((t, v));
                    }
                }
            }
            (stats, log)
        });

        let mut total = CommitStats::default();
        let mut merged = Vec::new();
        for (s, log) in per_thread {
            total.applied += s.applied;
            total.dropped += s.dropped;
            total.ownership_violations += s.ownership_violations;
            merged.extend(log);
        }
        if let Some(a) = audit {
            *a = merged;
        }
        team.counters.edits_committed.fetch_add(total.applied, Ordering::Relaxed);
        team.counters.edits_dropped.fetch_add(total.dropped, Ordering::Relaxed);
        total
    }
}
