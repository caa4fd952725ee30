//! The adaptive kernels and the driver loop.
//!
//! Every kernel works in rounds over one colour class at a time: propose in
//! parallel against a frozen mesh, apply the accepted proposals in parallel,
//! then commit the deferred adjacency edits. Topological kernels (coarsen,
//! swap) additionally arbitrate proposals by claiming the vertices they
//! touch, because a colouring computed at the start of a sweep stops being a
//! distance-1 colouring once earlier classes have changed the graph.

mod adapt;
mod coarsen;
mod refine;
mod smooth;
mod swap;

pub use adapt::{adapt, AdaptReport, PhaseReport};
pub use coarsen::coarsen;
pub use refine::refine;
pub use smooth::smooth;
pub use swap::swap;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{AdaptError, Result};
use crate::mesh::{verify, Mesh};
use crate::runtime::{CapacityPolicy, SharedWorklist, ThreadTeam, Worker};
use crate::VertexId;

/// How often the mesh is checked for conformity while adapting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Checks {
    None,
    /// After every kernel phase.
    Phases,
    /// After every colour-round commit, and after every phase.
    Rounds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    /// Edges shorter than this (metric length) are collapsed.
    pub l_low: f64,
    /// Edges longer than this are split.
    pub l_up: f64,
    /// Sweep limit for coarsening and swapping per call.
    pub max_sweeps: usize,
    /// Smoothing sweeps after the main loop.
    pub smooth_sweeps: usize,
    /// Main loop iterations (coarsen, swap, refine).
    pub max_iterations: usize,
    /// Collapses that would leave an element below this quality are
    /// rejected; 0 disables the test.
    pub collapse_quality_floor: f64,
    /// Loop scheduler chunk size.
    pub grain: usize,
    pub checks: Checks,
}

impl Default for KernelParams {
    fn default() -> Self {
        KernelParams {
            l_low: std::f64::consts::FRAC_1_SQRT_2,
            l_up: std::f64::consts::SQRT_2,
            max_sweeps: 50,
            smooth_sweeps: 10,
            max_iterations: 20,
            collapse_quality_floor: 0.0,
            grain: 32,
            checks: if cfg!(debug_assertions) { Checks::Phases } else { Checks::None },
        }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l_low > 0.0 && self.l_low < 1.0 && self.l_up > 1.0 && self.l_up.is_finite()) {
            return Err(AdaptError::Config(format!(
                "length band must satisfy 0 < l_low < 1 < l_up, got [{}, {}]",
                self.l_low, self.l_up
            )));
        }
        if self.max_sweeps == 0 || self.max_iterations == 0 || self.grain == 0 {
            return Err(AdaptError::Config("sweep, iteration and grain limits must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.collapse_quality_floor) {
            return Err(AdaptError::Config("collapse quality floor must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// What a kernel call did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChangeCount {
    /// Successful operations (collapses, created elements, flips, moves).
    pub applied: u64,
    /// Proposals that failed a validity or quality test.
    pub rejected: u64,
    /// Proposals that lost arbitration and were retried later.
    pub deferred: u64,
    pub sweeps: usize,
    pub rounds: usize,
    /// Direct writes to the same vertex by two threads within one round,
    /// plus ledger edits committed by a non-owner. Zero unless the round
    /// contract is broken. Only counted when checks are enabled.
    pub ownership_violations: u64,
}

impl std::ops::AddAssign for ChangeCount {
    fn add_assign(&mut self, o: Self) {
        self.applied += o.applied;
        self.rejected += o.rejected;
        self.deferred += o.deferred;
        self.sweeps += o.sweeps;
        self.rounds += o.rounds;
        self.ownership_violations += o.ownership_violations;
    }
}

pub(crate) fn check(mesh: &Mesh, checks: Checks, at_round: bool, phase: &'static str) -> Result<()> {
    let wanted = match checks {
        Checks::None => false,
        Checks::Phases => !at_round,
        Checks::Rounds => true,
    };
    if wanted {
        let report = verify(mesh);
        if !report.is_empty() {
            return Err(AdaptError::NonConforming { phase, report });
        }
    }
    Ok(())
}

/// Parallel scan over `0..len` whose output is assembled by atomic capture.
/// `produce` must be a pure function of its index: on overflow the scan is
/// rerun with a doubled buffer.
pub(crate) fn gather<T, F>(team: &ThreadTeam, policy: &mut CapacityPolicy, len: usize, grain: usize, produce: F) -> Vec<T>
where
    T: Copy + Send,
    F: Fn(usize, &mut Vec<T>) + Sync,
{
    const FLUSH: usize = 512;
    let mut capacity = policy.capacity();
    loop {
        let list = SharedWorklist::with_capacity(capacity);
        team.parallel_for_stealing_with(
            len,
            grain,
            |_| Vec::new(),
            |_, local: &mut Vec<T>, i| {
                produce(i, local);
                if local.len() >= FLUSH {
                    let _ = list.append(local);
                    local.clear();
                }
            },
            |_, local| {
                let _ = list.append(&local);
            },
        );
        match list.into_vec() {
            Ok(items) => {
                policy.record(items.len());
                return items;
            }
            Err(_) => {
                team.counters.worklist_overflows.fetch_add(1, Ordering::Relaxed);
                capacity = CapacityPolicy::grow(capacity);
            }
        }
    }
}

/// Appends per-thread batches whose total is known in advance.
pub(crate) fn concat<T: Copy + Send>(parts: Vec<Vec<T>>) -> Vec<T> {
    let total = parts.iter().map(Vec::len).sum();
    let list = SharedWorklist::with_capacity(total);
    for p in &parts {
        list.append(p).expect("capacity is the exact total");
    }
    list.into_vec().expect("capacity is the exact total")
}

/// Per-vertex claim stamps for arbitrating overlapping proposals.
///
/// A proposal owned by vertex `u` in round `r` writes `(r, !u)` into every
/// vertex it needs with `fetch_max`; after a barrier it wins if all of them
/// still carry its stamp. Lower owner ids therefore win ties, and winners
/// have pairwise disjoint claim sets.
pub(crate) struct Claims {
    stamps: Vec<AtomicU64>,
    round: u64,
}

impl Claims {
    pub fn new(vertices: usize) -> Self {
        Claims {
            stamps: (0..vertices).map(|_| AtomicU64::new(0)).collect(),
            round: 0,
        }
    }

    pub fn next_round(&mut self) -> u64 {
        self.round += 1;
        self.round
    }

    #[inline]
    pub fn stamp(round: u64, owner: VertexId) -> u64 {
        (round << 32) | u64::from(u32::MAX - owner)
    }

    #[inline]
    pub fn claim(&self, vertices: impl IntoIterator<Item = VertexId>, stamp: u64) {
        for v in vertices {
            self.stamps[v as usize].fetch_max(stamp, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn holds(&self, vertices: impl IntoIterator<Item = VertexId>, stamp: u64) -> bool {
        vertices
            .into_iter()
            .all(|v| self.stamps[v as usize].load(Ordering::Relaxed) == stamp)
    }
}

/// Records which thread writes each vertex directly within a round.
pub(crate) struct WriteAudit {
    enabled: bool,
    writer: Vec<AtomicU64>,
    violations: AtomicU64,
}

impl WriteAudit {
    pub fn new(vertices: usize, enabled: bool) -> Self {
        WriteAudit {
            enabled,
            writer: if enabled { (0..vertices).map(|_| AtomicU64::new(0)).collect() } else { Vec::new() },
            violations: AtomicU64::new(0),
        }
    }

    #[inline]
    pub fn record(&self, round: u64, w: &Worker, v: VertexId) {
        if !self.enabled {
            return;
        }
        let mark = (round << 32) | (w.tid() as u64 + 1);
        let prev = self.writer[v as usize].swap(mark, Ordering::Relaxed);
        if prev >> 32 == round && prev != mark {
            self.violations.fetch_add(1, Ordering::Relaxed);
        }
    }

    pub fn violations(&self) -> u64 {
        self.violations.load(Ordering::Relaxed)
    }
}
