//! Parallel speculative greedy colouring of the vertex graph.
//!
//! Every uncoloured vertex picks the smallest colour not used by its
//! neighbours, reading their current (possibly tentative) colours. A
//! detection pass then finds adjacent pairs that ended up equal; the higher
//! id of each pair is recoloured in the next round. The lowest id in every
//! round keeps its colour, so the conflict set shrinks strictly.

use std::sync::atomic::{AtomicI32, Ordering};

use crate::error::{AdaptError, Result};
use crate::runtime::{SharedWorklist, ThreadTeam};
use crate::VertexId;

/// Upper bound on conflict-resolution rounds before giving up.
pub const MAX_ROUNDS: usize = 100;

const GRAIN: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colouring {
    /// Colour per vertex; `-1` for inactive vertices.
    pub colour: Vec<i32>,
    pub num_colours: usize,
    /// Vertices of each colour, ascending.
    pub classes: Vec<Vec<VertexId>>,
    /// Speculation rounds used.
    pub rounds: usize,
}

impl Colouring {
    pub fn class(&self, c: usize) -> &[VertexId] {
        &self.classes[c]
    }

    fn from_colours(colour: Vec<i32>, rounds: usize) -> Colouring {
        let num_colours = colour.iter().map(|&c| c + 1).max().unwrap_or(0).max(0) as usize;
        let mut classes = vec![Vec::new(); num_colours];
        for (v, &c) in colour.iter().enumerate() {
            if c >= 0 {
                classes[c as usize].push(v as VertexId);
            }
        }
        Colouring {
            colour,
            num_colours,
            classes,
            rounds,
        }
    }
}

fn first_fit(neighbours: &[VertexId], colour: &[AtomicI32]) -> i32 {
    let mut used: u128 = 0;
    let mut overflow = Vec::new();
    for &u in neighbours {
        let c = colour[u as usize].load(Ordering::Relaxed);
        if c < 0 {
            continue;
        }
        if c < 128 {
            used |= 1 << c;
        } else {
            overflow.push(c);
        }
    }
    let c = (!used).trailing_zeros() as i32;
    if c < 128 {
        return c;
    }
    overflow.sort_unstable();
    let mut c = 128;
    for o in overflow {
        if o == c {
            c += 1;
        } else if o > c {
            break;
        }
    }
    c
}

/// Colours the subgraph of `nn_adj` induced by `active`.
pub fn colour_graph(team: &ThreadTeam, nn_adj: &[Vec<VertexId>], active: &[VertexId]) -> Result<Colouring> {
    let colour: Vec<AtomicI32> = (0..nn_adj.len()).map(|_| AtomicI32::new(-1)).collect();
    let mut active_mask = vec![false; nn_adj.len()];
    for &v in active {
        active_mask[v as usize] = true;
    }
    let mut work: Vec<VertexId> = active.to_vec();
    let mut rounds = 0;

    while !work.is_empty() {
        if rounds == MAX_ROUNDS {
            return Err(AdaptError::ColouringDiverged { rounds });
        }
        rounds += 1;

        team.parallel_for_stealing(work.len(), GRAIN, |_, i| {
            let v = work[i] as usize;
            let c = first_fit(&nn_adj[v], &colour);
            colour[v].store(c, Ordering::Relaxed);
        });

        let conflicts = SharedWorklist::with_capacity(work.len());
        team.parallel_for_stealing_with(
            work.len(),
            GRAIN,
            |_| Vec::new(),
            |_, local: &mut Vec<VertexId>, i| {
                let v = work[i];
                let c = colour[v as usize].load(Ordering::Relaxed);
                let clash = nn_adj[v as usize].iter().any(|&u| {
                    u < v && active_mask[u as usize] && colour[u as usize].load(Ordering::Relaxed) == c
                });
                if clash {
                    local.push(v);
                }
            },
            |_, local| {
                conflicts
                    .append(&local)
                    .expect("conflict set cannot exceed the round's work set");
            },
        );
        work = conflicts.into_vec().expect("capacity equals work size");
        work.sort_unstable();
        // Losers start the next round uncoloured so their stale value does
        // not block first-fit for their neighbours.
        for &v in &work {
            colour[v as usize].store(-1, Ordering::Relaxed);
        }
    }

    let colour = colour.into_iter().map(AtomicI32::into_inner).collect();
    Ok(Colouring::from_colours(colour, rounds))
}

/// Checks that adjacent active vertices differ and that the classes partition
/// the active vertices consistently with `colour`.
pub fn verify_colouring(nn_adj: &[Vec<VertexId>], colouring: &Colouring) -> bool {
    if colouring.colour.len() != nn_adj.len() || colouring.classes.len() != colouring.num_colours {
        return false;
    }
    for (v, neighbours) in nn_adj.iter().enumerate() {
        let c = colouring.colour[v];
        if c < -1 || c >= colouring.num_colours as i32 {
            return false;
        }
        if c >= 0 && neighbours.iter().any(|&u| colouring.colour[u as usize] == c) {
            return false;
        }
    }
    let mut listed = 0;
    for (c, class) in colouring.classes.iter().enumerate() {
        for &v in class {
            if colouring.colour.get(v as usize) != Some(&(c as i32)) {
                return false;
            }
        }
        listed += class.len();
    }
    listed == colouring.colour.iter().filter(|&&c| c >= 0).count()
}
