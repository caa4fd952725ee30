use std::cell::UnsafeCell;
use std::mem::MaybeUninit;
use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

/// The cursor ran past the preallocated capacity. `required` is the size the
/// worklist would have needed, as far as it was known at the time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("worklist overflow: {required} items produced, capacity {capacity}")]
pub struct WorklistOverflow {
    pub required: usize,
    pub capacity: usize,
}

/// Global worklist filled concurrently by atomic capture.
///
/// A producer reserves `[idx, idx + len)` with one fetch-and-add on the size
/// cursor and copies its private batch into that range; producers never wait
/// for each other.
pub struct SharedWorklist<T> {
    items: Box<[UnsafeCell<MaybeUninit<T>>]>,
    size: AtomicUsize,
}

// Reserved ranges are disjoint, and items are only read once the worklist is
// owned again (`into_vec`).
unsafe impl<T: Send> Sync for SharedWorklist<T> {}

impl<T: Copy> SharedWorklist<T> {
    pub fn with_capacity(capacity: usize) -> Self {
        let items = (0..capacity)
            .map(|_| UnsafeCell::new(MaybeUninit::uninit()))
            .collect();
        SharedWorklist {
            items,
            size: AtomicUsize::new(0),
        }
    }

    pub fn capacity(&self) -> usize {
        self.items.len()
    }

    /// Current value of the size cursor. May exceed the capacity after an
    /// overflow.
    pub fn cursor(&self) -> usize {
        self.size.load(Ordering::Acquire)
    }

    /// Appends a private batch. Never truncates: a batch that does not fit is
    /// rejected whole and the overflow is visible to every later caller.
    pub fn append(&self, batch: &[T]) -> Result<Range<usize>, WorklistOverflow> {
        if batch.is_empty() {
            let at = self.cursor().min(self.capacity());
            return Ok(at..at);
        }
        let idx = self.size.fetch_add(batch.len(), Ordering::AcqRel);
        let end = idx + batch.len();
        if end > self.items.len() {
            return Err(WorklistOverflow {
                required: end,
                capacity: self.items.len(),
            });
        }
        for (cell, item) in self.items[idx..end].iter().zip(batch) {
            // SAFETY: [idx, end) was reserved by this call alone.
            unsafe { (*cell.get()).write(*item) };
        }
        Ok(idx..end)
    }

    pub fn overflowed(&self) -> bool {
        self.cursor() > self.capacity()
    }

    pub fn into_vec(self) -> Result<Vec<T>, WorklistOverflow> {
        let size = self.size.into_inner();
        if size > self.items.len() {
            return Err(WorklistOverflow {
                required: size,
                capacity: self.items.len(),
            });
        }
        Ok(self.items[..size]
            .iter()
            // SAFETY: every index below the cursor belongs to a successful
            // append, which wrote its whole range before returning.
            .map(|cell| unsafe { (*cell.get()).assume_init() })
            .collect())
    }
}

/// Preallocation policy: 1.5x the previous round's output, doubled on
/// overflow until the round fits.
#[derive(Debug, Clone, Copy)]
pub struct CapacityPolicy {
    last_output: usize,
    floor: usize,
}

impl CapacityPolicy {
    pub fn new(initial_guess: usize) -> Self {
        CapacityPolicy {
            last_output: initial_guess,
            floor: 64,
        }
    }

    pub fn capacity(&self) -> usize {
        (self.last_output + self.last_output / 2).max(self.floor)
    }

    pub fn grow(capacity: usize) -> usize {
        capacity.saturating_mul(2).max(1)
    }

    pub fn record(&mut self, output: usize) {
        self.last_output = output;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    #[test]
    fn two_producers_disjoint_ranges() {
        let wl = SharedWorklist::<u32>::with_capacity(16);
        let (a, b) = thread::scope(|s| {
            let a = s.spawn(|| wl.append(&[1, 2, 3]).unwrap());
            let b = s.spawn(|| wl.append(&[4, 5, 6, 7, 8]).unwrap());
            (a.join().unwrap(), b.join().unwrap())
        });
        assert_eq!(a.len() + b.len(), 8);
        assert!(a.end <= b.start || b.end <= a.start);
        let mut items = wl.into_vec().unwrap();
        items.sort_unstable();
        assert_eq!(items, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn zero_items_is_noop() {
        let wl = SharedWorklist::<u32>::with_capacity(4);
        let r = wl.append(&[]).unwrap();
        assert!(r.is_empty());
        assert_eq!(wl.cursor(), 0);
        assert!(wl.into_vec().unwrap().is_empty());
    }

    #[test]
    fn overflow_is_reported_not_truncated() {
        let wl = SharedWorklist::<u32>::with_capacity(4);
        wl.append(&[1, 2, 3]).unwrap();
        let err = wl.append(&[4, 5]).unwrap_err();
        assert_eq!(err, WorklistOverflow { required: 5, capacity: 4 });
        assert!(wl.overflowed());
        // later small batches still fail: the cursor already passed capacity
        assert!(wl.append(&[9]).is_err());
        assert!(wl.into_vec().is_err());
    }

    #[test]
    fn capacity_policy() {
        let mut p = CapacityPolicy::new(100);
        assert_eq!(p.capacity(), 150);
        p.record(10);
        assert_eq!(p.capacity(), 64);
        assert_eq!(CapacityPolicy::grow(64), 128);
    }
}
