//! Edge collapse: vertex `u` is merged into its neighbour `t`.
//!
//! The check is read-only; the apply step writes only `u`'s own lists, the
//! elements around `u`, and pushes every other adjacency change (including
//! those of `t`) as an edit.

use super::view::MeshView;
use super::{orient, AdjacencyEdit, EditKind, Mesh};
use crate::metric::{metric_edge_length, MetricField, MetricTensor};
use crate::quality::quality_unchecked;
use crate::runtime::DeferredLedger;
use crate::{ElementId, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOutcome {
    Applied,
    /// Some surviving element would invert or become flat.
    WouldInvertElement,
    /// The collapse breaks the boundary policy: corners never collapse and
    /// boundary vertices only slide along their own boundary edge.
    BoundaryViolation,
    /// A new edge would exceed the upper metric length bound.
    EdgeTooLong,
    /// A surviving element would fall below the quality floor.
    QualityTooLow,
    /// The link condition fails; the result would be non-manifold.
    TopologyViolation,
    /// The two vertices are not alive neighbours.
    NotAnEdge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseLimits {
    /// Reject if any new edge is longer than this in metric space.
    pub l_up: f64,
    /// Reject if any re-pointed element scores below this; 0 disables.
    pub quality_floor: f64,
}

/// Everything the apply step needs, computed by the check.
#[derive(Debug, Clone)]
pub(crate) struct CollapsePlan {
    pub remove: VertexId,
    pub target: VertexId,
    /// Elements containing the edge, with their third vertex.
    pub removed: Vec<(ElementId, VertexId)>,
    pub repointed: Vec<ElementId>,
}

fn sorted_intersection(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub(crate) fn check_collapse(
    mesh: &MeshView<'_>,
    metric: &[MetricTensor],
    u: VertexId,
    t: VertexId,
    limits: &CollapseLimits,
) -> Result<CollapsePlan, KernelOutcome> {
    if u == t || !mesh.vertex_alive(u) || !mesh.vertex_alive(t) || mesh.neighbours(u).binary_search(&t).is_err() {
        return Err(KernelOutcome::NotAnEdge);
    }
    let (bu, bt) = (mesh.boundary(u), mesh.boundary(t));
    if bu.is_corner() {
        return Err(KernelOutcome::BoundaryViolation);
    }

    let mut removed = Vec::with_capacity(2);
    let mut repointed = Vec::with_capacity(mesh.incident(u).len());
    for &e in mesh.incident(u) {
        let tri = mesh.element(e);
        if tri.contains(&t) {
            let third = tri.into_iter().find(|&x| x != u && x != t).expect("element has three vertices");
            removed.push((e, third));
        } else {
            repointed.push(e);
        }
    }

    if bu.is_interior() {
        if removed.len() != 2 {
            return Err(KernelOutcome::TopologyViolation);
        }
    } else if removed.len() != 1 || !bt.contains(bu) {
        // a boundary vertex may only slide along its own boundary edge
        return Err(KernelOutcome::BoundaryViolation);
    }

    // link condition: the common neighbours are exactly the opposite vertices
    let mut common = Vec::new();
    sorted_intersection(mesh.neighbours(u), mesh.neighbours(t), &mut common);
    let mut opposite: Vec<VertexId> = removed.iter().map(|&(_, o)| o).collect();
    opposite.sort_unstable();
    opposite.dedup();
    if common != opposite || opposite.len() != removed.len() {
        return Err(KernelOutcome::TopologyViolation);
    }

    let pt = mesh.coord(t);
    let mt = &metric[t as usize];
    for &x in mesh.neighbours(u) {
        if x == t || common.binary_search(&x).is_ok() {
            continue;
        }
        if metric_edge_length(pt, mesh.coord(x), mt, &metric[x as usize]) > limits.l_up {
            return Err(KernelOutcome::EdgeTooLong);
        }
    }

    for &e in &repointed {
        let tri = mesh.element(e);
        let old = tri.map(|v| mesh.coord(v));
        let new_tri = tri.map(|v| if v == u { t } else { v });
        let new = new_tri.map(|v| mesh.coord(v));
        let new_area2 = orient(new[0], new[1], new[2]);
        let old_area2 = orient(old[0], old[1], old[2]);
        if !(new_area2 > 1e-12 * old_area2.abs()) {
            return Err(KernelOutcome::WouldInvertElement);
        }
        if limits.quality_floor > 0.0 {
            let m = new_tri.map(|v| &metric[v as usize]);
            if quality_unchecked(new, m, 0.5 * new_area2) < limits.quality_floor {
                return Err(KernelOutcome::QualityTooLow);
            }
        }
    }

    Ok(CollapsePlan {
        remove: u,
        target: t,
        removed,
        repointed,
    })
}

/// Performs a checked collapse. `u`'s lists are cleared directly; all other
/// adjacency changes go to `push`.
pub(crate) fn apply_collapse(mesh: &MeshView<'_>, plan: &CollapsePlan, mut push: impl FnMut(AdjacencyEdit)) {
    let (u, t) = (plan.remove, plan.target);
    for &(e, o) in &plan.removed {
        mesh.element_alive.write(e as usize, false);
        push(AdjacencyEdit::new(o, EditKind::RemoveElement(e)));
        push(AdjacencyEdit::new(t, EditKind::RemoveElement(e)));
    }
    for &e in &plan.repointed {
        let tri = mesh.element(e).map(|v| if v == u { t } else { v });
        mesh.elements.write(e as usize, tri);
        push(AdjacencyEdit::new(t, EditKind::AddElement(e)));
    }
    let opposite = |x: VertexId| plan.removed.iter().any(|&(_, o)| o == x);
    for &x in mesh.neighbours(u) {
        if x == t {
            continue;
        }
        push(AdjacencyEdit::new(x, EditKind::RemoveNeighbour(u)));
        if !opposite(x) {
            push(AdjacencyEdit::new(x, EditKind::AddNeighbour(t)));
            push(AdjacencyEdit::new(t, EditKind::AddNeighbour(x)));
        }
    }
    push(AdjacencyEdit::new(t, EditKind::RemoveNeighbour(u)));
    mesh.vertex_alive.write(u as usize, false);
    mesh.nn.get_mut(u as usize).clear();
    mesh.ne.get_mut(u as usize).clear();
}

/// Collapses `v_remove` onto `v_target` if that is valid. Adjacency edits for
/// every surviving vertex are pushed into `ledger` (as producer 0) and take
/// effect on the next commit; on rejection the mesh is untouched.
pub fn collapse_edge(
    mesh: &mut Mesh,
    metric: &MetricField,
    v_remove: VertexId,
    v_target: VertexId,
    limits: &CollapseLimits,
    ledger: &mut DeferredLedger,
) -> KernelOutcome {
    // SAFETY: single-threaded use of the view.
    let view = unsafe { MeshView::new(mesh) };
    match check_collapse(&view, &metric.tensors, v_remove, v_target, limits) {
        Ok(plan) => {
            apply_collapse(&view, &plan, |edit| ledger.push_serial(0, edit));
            KernelOutcome::Applied
        }
        Err(reason) => reason,
    }
}
