//! Loop scheduler with range-splitting work stealing.
//!
//! Each worker starts with a contiguous block of the iteration space stored in
//! a single packed atomic `(start, end)`. The owner pops `grain`-sized chunks
//! from the front with a CAS. An idle worker picks the victim with the largest
//! remaining range and splits it: the victim keeps the lower half and the
//! thief installs the upper half as its new block. Both sides move a range
//! only through a successful CAS on the slot holding it, so every index is
//! executed exactly once.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

use super::team::{ThreadTeam, Worker};

#[repr(align(128))]
struct Slot(AtomicU64);

#[inline]
fn pack(start: u32, end: u32) -> u64 {
    (u64::from(start) << 32) | u64::from(end)
}

#[inline]
fn unpack(v: u64) -> (u32, u32) {
    ((v >> 32) as u32, v as u32)
}

/// Per-loop instrumentation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoopStats {
    pub steals: u64,
    /// Iterations executed by each worker, indexed by thread id.
    pub executed: Vec<u64>,
}

struct Ranges {
    slots: Vec<Slot>,
}

impl Ranges {
    fn new(len: u32, threads: usize) -> Self {
        let n = threads as u64;
        let slots = (0..threads as u64)
            .map(|t| {
                let start = (u64::from(len) * t / n) as u32;
                let end = (u64::from(len) * (t + 1) / n) as u32;
                Slot(AtomicU64::new(pack(start, end)))
            })
            .collect();
        Ranges { slots }
    }

    /// Pops up to `grain` indices from the front of the worker's own block.
    fn pop(&self, tid: usize, grain: u32) -> Option<Range<u32>> {
        let slot = &self.slots[tid].0;
        let mut cur = slot.load(Ordering::Acquire);
        loop {
            let (s, e) = unpack(cur);
            if s >= e {
                return None;
            }
            let take = grain.min(e - s);
            match slot.compare_exchange_weak(
                cur,
                pack(s + take, e),
                Ordering::AcqRel,
                Ordering::Acquire,
            ) {
                Ok(_) => return Some(s..s + take),
                Err(actual) => cur = actual,
            }
        }
    }

    /// Steals the upper half of the fullest other block into the thief's slot.
    fn steal(&self, thief: usize) -> bool {
        loop {
            let mut best = None;
            let mut best_rem = 1u32;
            for (t, slot) in self.slots.iter().enumerate() {
                if t == thief {
                    continue;
                }
                let cur = slot.0.load(Ordering::Acquire);
                let (s, e) = unpack(cur);
                let rem = e.saturating_sub(s);
                if rem > best_rem {
                    best_rem = rem;
                    best = Some((t, cur));
                }
            }
            let Some((victim, cur)) = best else {
                return false;
            };
            let (s, e) = unpack(cur);
            let mid = s + (e - s).div_ceil(2);
            if self.slots[victim]
                .0
                .compare_exchange(cur, pack(s, mid), Ordering::AcqRel, Ordering::Acquire)
                .is_ok()
            {
                // The thief's own block is empty, so nobody else touches it.
                self.slots[thief].0.store(pack(mid, e), Ordering::Release);
                return true;
            }
        }
    }
}

impl ThreadTeam {
    /// Executes `body(worker, i)` exactly once for every `i` in `0..len`,
    /// balancing load by work stealing.
    pub fn parallel_for_stealing<F>(&self, len: usize, grain: usize, body: F) -> LoopStats
    where
        F: Fn(&Worker, usize) + Sync,
    {
        let (stats, _) = self.parallel_for_stealing_with(len, grain, |_| (), |w, _, i| body(w, i), |_, _| ());
        stats
    }

    /// Like [`ThreadTeam::parallel_for_stealing`], with per-thread state.
    ///
    /// `init` runs on each worker before its first iteration, `body` receives
    /// that worker's state mutably, and `finish` consumes it after the worker
    /// runs out of work. The finished values are returned in thread-id order.
    pub fn parallel_for_stealing_with<S, R, I, B, Fin>(
        &self,
        len: usize,
        grain: usize,
        init: I,
        body: B,
        finish: Fin,
    ) -> (LoopStats, Vec<R>)
    where
        R: Send,
        I: Fn(&Worker) -> S + Sync,
        B: Fn(&Worker, &mut S, usize) + Sync,
        Fin: Fn(&Worker, S) -> R + Sync,
    {
        let len = u32::try_from(len).expect("iteration space exceeds u32::MAX");
        let grain = u32::try_from(grain.max(1)).unwrap_or(u32::MAX);
        let ranges = Ranges::new(len, self.threads());
        let per_thread = self.broadcast(|w| {
            let tid = w.tid();
            let mut state = init(w);
            let mut executed = 0u64;
            let mut steals = 0u64;
            loop {
                while let Some(chunk) = ranges.pop(tid, grain) {
                    executed += u64::from(chunk.end - chunk.start);
                    for i in chunk {
                        body(w, &mut state, i as usize);
                    }
                }
                if !ranges.steal(tid) {
                    break;
                }
                steals += 1;
            }
            (executed, steals, finish(w, state))
        });

        let mut stats = LoopStats::default();
        let mut results = Vec::with_capacity(per_thread.len());
        for (executed, steals, r) in per_thread {
            stats.executed.push(executed);
            stats.steals += steals;
            results.push(r);
        }
        self.counters.steals.fetch_add(stats.steals, Ordering::Relaxed);
        (stats, results)
    }
}
