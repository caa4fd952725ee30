use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Mutex;

use adaptix::mesh::{commit_edits, structured_square_mesh, AdjacencyEdit, EditKind};
use adaptix::runtime::{DeferredLedger, SharedWorklist, ThreadTeam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn every_index_runs_exactly_once() {
    for threads in [1, 3, 8] {
        let team = ThreadTeam::new(threads).unwrap();
        for (len, grain) in [(0, 1), (1, 1), (1000, 1), (100_003, 64), (200_000, 5000)] {
            let hits: Vec<AtomicU32> = (0..len).map(|_| AtomicU32::new(0)).collect();
            let stats = team.parallel_for_stealing(len, grain, |_, i| {
                hits[i].fetch_add(1, Ordering::Relaxed);
            });
            assert!(hits.iter().all(|h| h.load(Ordering::Relaxed) == 1), "threads {threads} len {len}");
            assert_eq!(stats.executed.iter().sum::<u64>(), len as u64);
            assert_eq!(stats.executed.len(), threads);
        }
    }
}

#[test]
fn imbalanced_load_is_stolen() {
    let team = ThreadTeam::new(4).unwrap();
    let len = 20_000;
    let heavy = len / 100;
    let sink = AtomicU64::new(0);
    let stats = team.parallel_for_stealing(len, 4, |_, i| {
        // the first 1% of indices carry about 99% of the work
        let spins = if i < heavy { 20_000 } else { 2 };
        let mut x = i as u64;
        for _ in 0..spins {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        }
        sink.fetch_add(x & 1, Ordering::Relaxed);
    });
    assert!(stats.steals > 0);
    assert_eq!(stats.executed.iter().sum::<u64>(), len as u64);
    // the heavy block starts in thread 0's range; others must have taken part
    assert!(stats.executed.iter().filter(|&&n| n > 0).count() > 1);
}

#[test]
fn worklist_preserves_the_multiset_under_64_producers() {
    let team = ThreadTeam::new(64).unwrap();
    let produced = Mutex::new(Vec::new());
    let list = SharedWorklist::with_capacity(64 * 1000 * 16);
    team.broadcast(|w| {
        let mut rng = ChaCha8Rng::seed_from_u64(w.tid() as u64);
        let mut mine = Vec::new();
        for b in 0..1000u64 {
            let batch: Vec<u64> = (0..rng.gen_range(0..16u64))
                .map(|k| ((w.tid() as u64) << 40) | (b << 8) | k)
                .collect();
            list.append(&batch).unwrap();
            mine.extend(batch);
        }
        produced.lock().unwrap().extend(mine);
    });
    let mut got = list.into_vec().unwrap();
    let mut want = produced.into_inner().unwrap();
    got.sort_unstable();
    want.sort_unstable();
    assert_eq!(got, want);
}

#[test]
fn worklist_overflow_is_reported_not_silent() {
    let list = SharedWorklist::with_capacity(10);
    list.append(&[1u32; 8]).unwrap();
    assert!(list.append(&[2u32; 8]).is_err());
    assert!(list.overflowed());
    assert!(list.into_vec().is_err());
}

fn random_edits(seed: u64, count: usize, nv: u32) -> Vec<AdjacencyEdit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let target = rng.gen_range(0..nv);
            let other = rng.gen_range(0..nv);
            let kind = match rng.gen_range(0..4) {
                0 => EditKind::AddNeighbour(other),
                1 => EditKind::RemoveNeighbour(other),
                2 => EditKind::AddElement(other),
                _ => EditKind::RemoveElement(other),
            };
            AdjacencyEdit::new(target, kind)
        })
        .collect()
}

#[test]
fn ledger_commit_matches_serial_replay_in_producer_order() {
    for threads in [1, 2, 5, 8] {
        let team = ThreadTeam::new(threads).unwrap();
        let base = structured_square_mesh(10);
        let nv = base.vertex_count() as u32;
        let per_producer: Vec<Vec<AdjacencyEdit>> =
            (0..threads).map(|p| random_edits(p as u64 + 100, 2000, nv)).collect();

        let mut ledger = DeferredLedger::new(&team);
        for (p, edits) in per_producer.iter().enumerate() {
            for &e in edits {
                ledger.push_serial(p, e);
            }
        }
        let mut parallel = base.clone();
        let (stats, audit) = ledger.commit_audited(&team, &mut parallel);
        assert_eq!(stats.ownership_violations, 0);
        assert!(audit.iter().all(|&(t, v)| t == v as usize % threads));
        assert!(ledger.is_empty());

        let mut serial = base.clone();
        let all: Vec<AdjacencyEdit> = per_producer.concat();
        commit_edits(&mut serial, &all);
        assert_eq!(parallel.nn_adj(), serial.nn_adj(), "threads {threads}");
        assert_eq!(parallel.ne_adj(), serial.ne_adj(), "threads {threads}");
    }
}

#[test]
fn ledger_pushes_from_workers_land_with_their_owner() {
    let team = ThreadTeam::new(6).unwrap();
    let mut mesh = structured_square_mesh(12);
    let nv = mesh.vertex_count();
    let ledger = DeferredLedger::new(&team);
    // every worker adds a self-named neighbour to a spread of vertices
    team.broadcast(|w| {
        for v in (w.tid()..nv).step_by(7) {
            ledger.push(w, AdjacencyEdit::new(v as u32, EditKind::AddNeighbour(10_000 + w.tid() as u32)));
        }
    });
    let mut ledger = ledger;
    let (stats, audit) = ledger.commit_audited(&team, &mut mesh);
    assert_eq!(stats.ownership_violations, 0);
    let mut by_vertex: HashMap<u32, usize> = HashMap::new();
    for (t, v) in audit {
        assert_eq!(t, v as usize % 6);
        *by_vertex.entry(v).or_default() += 1;
    }
    let expected: usize = (0..6).map(|t| (t..nv).step_by(7).count()).sum();
    assert_eq!(by_vertex.values().sum::<usize>(), expected);
}
