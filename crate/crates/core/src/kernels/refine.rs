//! Refinement by edge splitting with conforming templates.

use crate::error::Result;
use crate::mesh::view::{MeshView, SharedSlice};
use crate::mesh::{orient, AdjacencyEdit, BoundaryTag, EditKind, Mesh};
use crate::metric::{interpolate_metric, metric_edge_length, MetricField, MetricTensor};
use crate::quality::quality_unchecked;
use crate::runtime::{CapacityPolicy, DeferredLedger, ThreadTeam};
use crate::{ElementId, Point, VertexId};

use super::{check, gather, ChangeCount, KernelParams};

type Edge = (VertexId, VertexId);

#[inline]
fn key(a: VertexId, b: VertexId) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn tri_quality(coords: &SharedSlice<'_, Point>, m: &[MetricTensor], t: [VertexId; 3]) -> f64 {
    let p = t.map(|v| coords.read(v as usize));
    let area2 = orient(p[0], p[1], p[2]);
    if area2 <= 0.0 {
        return 0.0;
    }
    quality_unchecked(p, t.map(|v| &m[v as usize]), 0.5 * area2)
}

/// Children of `tri` given the midpoints `mid[i]` of the edge opposite
/// vertex `i`. The first child reuses the parent's slot.
fn split(
    tri: [VertexId; 3],
    mid: [Option<VertexId>; 3],
    coords: &SharedSlice<'_, Point>,
    m: &[MetricTensor],
) -> Vec<[VertexId; 3]> {
    let marks = mid.iter().filter(|x| x.is_some()).count();
    match marks {
        1 => {
            let i = mid.iter().position(Option::is_some).unwrap();
            let (a, b, c) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let mm = mid[i].unwrap();
            vec![[a, b, mm], [a, mm, c]]
        }
        2 => {
            let i = mid.iter().position(Option::is_none).unwrap();
            let (a, b, c) = (tri[i], tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let m_ab = mid[(i + 2) % 3].unwrap();
            let m_ca = mid[(i + 1) % 3].unwrap();
            let corner = [a, m_ab, m_ca];
            let first = [[m_ab, b, c], [m_ab, c, m_ca]];
            let second = [[m_ab, b, m_ca], [b, c, m_ca]];
            let score = |pair: &[[VertexId; 3]; 2]| {
                tri_quality(coords, m, pair[0]).min(tri_quality(coords, m, pair[1]))
            };
            let pick = if score(&second) > score(&first) { second } else { first };
            vec![corner, pick[0], pick[1]]
        }
        3 => {
            let [a, b, c] = tri;
            let (m_bc, m_ca, m_ab) = (mid[0].unwrap(), mid[1].unwrap(), mid[2].unwrap());
            vec![[a, m_ab, m_ca], [m_ab, b, m_bc], [m_ca, m_bc, c], [m_ab, m_bc, m_ca]]
        }
        _ => vec![tri],
    }
}

/// One sweep: splits every edge longer than `l_up` at its midpoint and
/// re-triangulates each element by its number of split edges. Returns the
/// number of elements created.
pub fn refine(team: &ThreadTeam, mesh: &mut Mesh, metric: &mut MetricField, params: &KernelParams) -> Result<ChangeCount> {
    params.validate()?;
    let nv = mesh.vertex_count();
    assert_eq!(metric.len(), nv, "metric field does not match the mesh");
    let mut count = ChangeCount {
        sweeps: 1,
        rounds: 1,
        ..ChangeCount::default()
    };

    let mut policy = CapacityPolicy::new(nv / 4);
    let mut marked: Vec<Edge> = {
        let mesh = &*mesh;
        let m = &metric.tensors;
        gather(team, &mut policy, nv, params.grain * 8, |v, out| {
            let v = v as VertexId;
            if !mesh.is_vertex_alive(v) {
                return;
            }
            let p = mesh.coord(v);
            for &w in mesh.neighbours(v) {
                if w > v && metric_edge_length(p, mesh.coord(w), &m[v as usize], &m[w as usize]) > params.l_up {
                    out.push((v, w));
                }
            }
        })
    };
    if marked.is_empty() {
        return Ok(count);
    }
    marked.sort_unstable();

    let nm = marked.len();
    let mut new_coords = vec![[0.0; 2]; nm];
    let mut new_tags = vec![BoundaryTag::INTERIOR; nm];
    let mut new_metric = vec![MetricTensor::IDENTITY; nm];
    {
        // SAFETY: index i is written by iteration i only.
        let (c, t, mm) = unsafe {
            (
                SharedSlice::new(&mut new_coords),
                SharedSlice::new(&mut new_tags),
                SharedSlice::new(&mut new_metric),
            )
        };
        let mesh = &*mesh;
        let m = &metric.tensors;
        team.parallel_for_stealing(nm, params.grain * 4, |_, i| {
            let (a, b) = marked[i];
            let (pa, pb) = (mesh.coord(a), mesh.coord(b));
            c.write(i, [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            if mesh.edge_elements(a, b).count() == 1 {
                t.write(i, mesh.boundary(a).shared(mesh.boundary(b)));
            }
            mm.write(i, interpolate_metric(&m[a as usize], &m[b as usize], 0.5));
        });
    }
    let first_new = mesh.reserve_vertices(&new_coords, &new_tags);
    metric.tensors.extend_from_slice(&new_metric);
    let midpoint = |a: VertexId, b: VertexId| marked.binary_search(&key(a, b)).ok().map(|i| first_new + i as VertexId);

    let ne = mesh.element_count();
    let mut extra = vec![0u32; ne];
    {
        // SAFETY: index e is written by iteration e only.
        let x = unsafe { SharedSlice::new(&mut extra) };
        let mesh = &*mesh;
        team.parallel_for_stealing(ne, params.grain * 8, |_, e| {
            if !mesh.is_element_alive(e as ElementId) {
                return;
            }
            let t = mesh.element(e as ElementId);
            let k = (0..3).filter(|&i| midpoint(t[(i + 1) % 3], t[(i + 2) % 3]).is_some()).count();
            x.write(e, k as u32);
        });
    }
    let mut offset = Vec::with_capacity(ne);
    let mut total = 0u32;
    for &k in &extra {
        offset.push(total);
        total += k;
    }
    let first_child = mesh.reserve_elements(total as usize);

    let mut ledger = DeferredLedger::new(team);
    {
        // SAFETY: each iteration writes its parent slot and its own
        // preallocated child slots; adjacency changes go through the ledger.
        let view = unsafe { MeshView::new(mesh) };
        let m = &metric.tensors;
        let ledger_ref = &ledger;
        team.parallel_for_stealing(ne, params.grain, |w, e| {
            if extra[e] == 0 {
                return;
            }
            let parent = e as ElementId;
            let tri = view.element(parent);
            let mid: [Option<VertexId>; 3] = std::array::from_fn(|i| midpoint(tri[(i + 1) % 3], tri[(i + 2) % 3]));
            let children = split(tri, mid, &view.coords, m);
            debug_assert_eq!(children.len(), extra[e] as usize + 1);
            let ids: Vec<ElementId> = std::iter::once(parent)
                .chain((0..extra[e]).map(|k| first_child + offset[e] + k))
                .collect();

            let push = |target: VertexId, kind: EditKind| ledger_ref.push(w, AdjacencyEdit::new(target, kind));
            for &v in &tri {
                if !children[0].contains(&v) {
                    push(v, EditKind::RemoveElement(parent));
                }
            }
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                if mid[i].is_some() {
                    push(a, EditKind::RemoveNeighbour(b));
                    push(b, EditKind::RemoveNeighbour(a));
                }
            }
            for (child, &id) in children.iter().zip(&ids) {
                view.elements.write(id as usize, *child);
                view.element_alive.write(id as usize, true);
                for k in 0..3 {
                    let (p, q) = (child[k], child[(k + 1) % 3]);
                    push(p, EditKind::AddNeighbour(q));
                    push(q, EditKind::AddNeighbour(p));
                    if id != parent || !tri.contains(&p) {
                        push(p, EditKind::AddElement(id));
                    }
                }
            }
        });
    }
    ledger.commit(team, mesh);
    count.applied = u64::from(total);
    check(mesh, params.checks, false, "refine")?;
    Ok(count)
}
