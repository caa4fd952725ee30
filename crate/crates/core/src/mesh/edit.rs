use super::Mesh;
use crate::{ElementId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    AddNeighbour(VertexId),
    RemoveNeighbour(VertexId),
    AddElement(ElementId),
    RemoveElement(ElementId),
}

/// A pending change to the adjacency lists of `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AdjacencyEdit {
    pub target: VertexId,
    pub kind: EditKind,
}

impl AdjacencyEdit {
    pub fn new(target: VertexId, kind: EditKind) -> Self {
        AdjacencyEdit { target, kind }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CommitOutcome {
    pub applied: u64,
    /// Edits whose target died earlier in the same round.
    pub dropped: u64,
}

impl std::ops::AddAssign for CommitOutcome {
    fn add_assign(&mut self, rhs: Self) {
        self.applied += rhs.applied;
        self.dropped += rhs.dropped;
    }
}

fn insert_sorted(list: &mut Vec<u32>, x: u32) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}

fn remove_sorted(list: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = list.binary_search(&x) {
        list.remove(pos);
    }
}

/// Applies one edit to the lists of its target. Lists stay sorted and
/// duplicate-free.
#[inline]
pub(crate) fn apply_edit(nn: &mut Vec<VertexId>, ne: &mut Vec<ElementId>, kind: EditKind) {
    match kind {
        EditKind::AddNeighbour(w) => insert_sorted(nn, w),
        EditKind::RemoveNeighbour(w) => remove_sorted(nn, w),
        EditKind::AddElement(e) => insert_sorted(ne, e),
        EditKind::RemoveElement(e) => remove_sorted(ne, e),
    }
}

/// Applies `edits` in order. Edits aimed at dead vertices are dropped and
/// counted.
pub fn commit_edits(mesh: &mut Mesh, edits: &[AdjacencyEdit]) -> CommitOutcome {
    let mut out = CommitOutcome::default();
    for edit in edits {
        let v = edit.target as usize;
        if !mesh.vertex_alive[v] {
            out.dropped += 1;
            continue;
        }
        apply_edit(&mut mesh.nn_adj[v], &mut mesh.ne_adj[v], edit.kind);
        out.applied += 1;
    }
    out
}
