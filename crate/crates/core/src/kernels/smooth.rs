//! Quality-constrained Laplacian smoothing.

use crate::colouring::colour_graph;
use crate::error::Result;
use crate::mesh::view::MeshView;
use crate::mesh::{orient, Mesh};
use crate::metric::{metric_edge_length, MetricField, MetricTensor};
use crate::quality::quality_unchecked;
use crate::runtime::ThreadTeam;
use crate::{Point, VertexId};

use super::{check, ChangeCount, KernelParams, WriteAudit};

/// Neighbours that drive the proposal: all of them for interior vertices,
/// the two boundary-edge neighbours on the same segment otherwise.
fn anchors(view: &MeshView<'_>, u: VertexId) -> Vec<VertexId> {
    let bu = view.boundary(u);
    if bu.is_interior() {
        return view.neighbours(u).to_vec();
    }
    view.neighbours(u)
        .iter()
        .copied()
        .filter(|&x| view.boundary(x).contains(bu) && view.edge_elements(u, x).count() == 1)
        .collect()
}

/// Metric-length weighted average of the anchor positions.
pub(crate) fn proposal(view: &MeshView<'_>, m: &[MetricTensor], u: VertexId) -> Option<Point> {
    let bu = view.boundary(u);
    if bu.is_corner() {
        return None;
    }
    let a = anchors(view, u);
    if a.len() < 2 || (!bu.is_interior() && a.len() != 2) {
        return None;
    }
    let p = view.coord(u);
    let mu = &m[u as usize];
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for &x in &a {
        let px = view.coord(x);
        let w = metric_edge_length(p, px, mu, &m[x as usize]);
        sx += w * px[0];
        sy += w * px[1];
        sw += w;
    }
    (sw > 0.0).then(|| [sx / sw, sy / sw])
}

/// Minimum quality of `u`'s cavity with `u` placed at `at`; `None` if any
/// element inverts.
fn cavity_min(view: &MeshView<'_>, m: &[MetricTensor], u: VertexId, at: Point) -> Option<f64> {
    let mut min = f64::INFINITY;
    for &e in view.incident(u) {
        let t = view.element(e);
        let p = t.map(|v| if v == u { at } else { view.coord(v) });
        let area2 = orient(p[0], p[1], p[2]);
        if area2 <= 0.0 {
            return None;
        }
        min = min.min(quality_unchecked(p, t.map(|v| &m[v as usize]), 0.5 * area2));
    }
    Some(min)
}

/// Moves `u` to its proposal if that keeps every element valid and does not
/// lower the cavity minimum.
fn relocate(view: &MeshView<'_>, m: &[MetricTensor], u: VertexId) -> bool {
    let Some(target) = proposal(view, m, u) else {
        return false;
    };
    let p = view.coord(u);
    let moved = (target[0] - p[0]).abs().max((target[1] - p[1]).abs());
    if moved <= 1e-14 {
        return false;
    }
    let (Some(before), Some(after)) = (cavity_min(view, m, u, p), cavity_min(view, m, u, target)) else {
        return false;
    };
    if after < before {
        return false;
    }
    view.coords.write(u as usize, target);
    true
}

/// Colour-batched Gauss-Seidel sweeps; later classes see earlier moves.
/// Stops early once a sweep moves nothing.
pub fn smooth(team: &ThreadTeam, mesh: &mut Mesh, metric: &MetricField, params: &KernelParams) -> Result<ChangeCount> {
    params.validate()?;
    let nv = mesh.vertex_count();
    assert_eq!(metric.len(), nv, "metric field does not match the mesh");
    let m = metric.tensors.as_slice();
    let movable: Vec<VertexId> = mesh.alive_vertices().filter(|&v| !mesh.boundary(v).is_corner()).collect();
    let colouring = colour_graph(team, mesh.nn_adj(), &movable)?;
    let audit = WriteAudit::new(nv, params.checks != super::Checks::None);
    let mut count = ChangeCount::default();
    let mut round = 0u64;

    for _ in 0..params.smooth_sweeps {
        count.sweeps += 1;
        let mut moved_this_sweep = 0;
        for class in &colouring.classes {
            round += 1;
            count.rounds += 1;
            // SAFETY: topology is frozen, so a class stays independent; each
            // iteration writes only its own vertex's coordinates and reads
            // those of its neighbours, which belong to other classes.
            let view = unsafe { MeshView::new(mesh) };
            let (_, moved) = team.parallel_for_stealing_with(
                class.len(),
                params.grain,
                |_| (0u64, 0u64),
                |w, (moved, rejected), i| {
                    let u = class[i];
                    audit.record(round, w, u);
                    if relocate(&view, m, u) {
                        *moved += 1;
                    } else {
                        *rejected += 1;
                    }
                },
                |_, s| s,
            );
            let moved_n: u64 = moved.iter().map(|s| s.0).sum();
            count.applied += moved_n;
            count.rejected += moved.iter().map(|s| s.1).sum::<u64>();
            moved_this_sweep += moved_n;
        }
        check(mesh, params.checks, true, "smooth round")?;
        if moved_this_sweep == 0 {
            break;
        }
    }
    count.ownership_violations += audit.violations();
    check(mesh, params.checks, false, "smooth")?;
    Ok(count)
}
