//! Edge flips that raise the minimum quality of the two-element patch.

use crate::colouring::colour_graph;
use crate::error::Result;
use crate::mesh::view::MeshView;
use crate::mesh::{orient, AdjacencyEdit, EditKind, Mesh};
use crate::metric::{metric_edge_length, MetricField, MetricTensor};
use crate::quality::quality_unchecked;
use crate::runtime::{DeferredLedger, ThreadTeam};
use crate::{ElementId, VertexId};

use super::{check, concat, ChangeCount, Claims, KernelParams};

/// Required quality gain for a flip.
pub const SWAP_TOLERANCE: f64 = 1e-12;

/// Flip of edge `u-b` (elements `e1 = (u, b, c)` and `e2 = (b, u, d)`, both
/// counter-clockwise) to `c-d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Flip {
    pub u: VertexId,
    pub b: VertexId,
    pub c: VertexId,
    pub d: VertexId,
    pub e1: ElementId,
    pub e2: ElementId,
    pub gain: f64,
}

impl Flip {
    fn vertices(&self) -> [VertexId; 4] {
        [self.u, self.b, self.c, self.d]
    }
}

fn quality(view: &MeshView<'_>, m: &[MetricTensor], t: [VertexId; 3]) -> Option<f64> {
    let p = t.map(|v| view.coord(v));
    let area2 = orient(p[0], p[1], p[2]);
    (area2 > 0.0).then(|| quality_unchecked(p, t.map(|v| &m[v as usize]), 0.5 * area2))
}

/// Evaluates flipping `u-b`. `None` for boundary edges, non-convex quads,
/// flips that do not improve by more than the tolerance, and flips whose new
/// edge is longer than `l_up` and than the old one (refinement would split
/// it again and coarsening would restore the old edge).
pub(crate) fn evaluate_flip(
    view: &MeshView<'_>,
    m: &[MetricTensor],
    u: VertexId,
    b: VertexId,
    l_up: f64,
) -> Option<Flip> {
    let mut e1 = None;
    let mut e2 = None;
    for e in view.edge_elements(u, b) {
        let t = view.element(e);
        let i = t.iter().position(|&x| x == u)?;
        if t[(i + 1) % 3] == b {
            e1 = Some((e, t[(i + 2) % 3]));
        } else {
            e2 = Some((e, t[(i + 1) % 3]));
        }
    }
    let ((e1, c), (e2, d)) = (e1?, e2?);
    if c == d || view.neighbours(c).binary_search(&d).is_ok() {
        return None;
    }
    let old = quality(view, m, [u, b, c])?.min(quality(view, m, [b, u, d])?);
    let (t1, t2) = ([c, u, d], [d, b, c]);
    let p = [u, b, c, d].map(|v| view.coord(v));
    let quad_area2 = orient(p[0], p[1], p[2]) + orient(p[1], p[0], p[3]);
    for t in [t1, t2] {
        let q = t.map(|v| view.coord(v));
        if orient(q[0], q[1], q[2]) <= 1e-12 * quad_area2 {
            return None;
        }
    }
    let new_len = metric_edge_length(p[2], p[3], &m[c as usize], &m[d as usize]);
    if new_len > l_up && new_len > metric_edge_length(p[0], p[1], &m[u as usize], &m[b as usize]) {
        return None;
    }
    let new = quality(view, m, t1)?.min(quality(view, m, t2)?);
    (new > old + SWAP_TOLERANCE).then_some(Flip {
        u,
        b,
        c,
        d,
        e1,
        e2,
        gain: new - old,
    })
}

/// Best flip among the edges owned by `u` (those to higher ids).
fn propose(view: &MeshView<'_>, m: &[MetricTensor], u: VertexId, l_up: f64) -> Option<Flip> {
    if !view.vertex_alive(u) {
        return None;
    }
    view.neighbours(u)
        .iter()
        .filter(|&&b| b > u)
        .filter_map(|&b| evaluate_flip(view, m, u, b, l_up))
        .max_by(|x, y| x.gain.total_cmp(&y.gain).then(y.b.cmp(&x.b)))
}

fn apply(view: &MeshView<'_>, f: &Flip, mut push: impl FnMut(AdjacencyEdit)) {
    view.elements.write(f.e1 as usize, [f.c, f.u, f.d]);
    view.elements.write(f.e2 as usize, [f.d, f.b, f.c]);
    for (target, kind) in [
        (f.u, EditKind::RemoveNeighbour(f.b)),
        (f.b, EditKind::RemoveNeighbour(f.u)),
        (f.c, EditKind::AddNeighbour(f.d)),
        (f.d, EditKind::AddNeighbour(f.c)),
        (f.u, EditKind::RemoveElement(f.e2)),
        (f.b, EditKind::RemoveElement(f.e1)),
        (f.c, EditKind::AddElement(f.e2)),
        (f.d, EditKind::AddElement(f.e1)),
    ] {
        push(AdjacencyEdit::new(target, kind));
    }
}

/// Flips interior edges while the patch minimum quality strictly improves.
pub fn swap(team: &ThreadTeam, mesh: &mut Mesh, metric: &MetricField, params: &KernelParams) -> Result<ChangeCount> {
    params.validate()?;
    let nv = mesh.vertex_count();
    assert_eq!(metric.len(), nv, "metric field does not match the mesh");
    let m = metric.tensors.as_slice();
    let mut work: Vec<VertexId> = mesh.alive_vertices().collect();
    let mut claims = Claims::new(nv);
    let mut ledger = DeferredLedger::new(team);
    let mut count = ChangeCount::default();

    while !work.is_empty() && count.sweeps < params.max_sweeps {
        count.sweeps += 1;
        let colouring = colour_graph(team, mesh.nn_adj(), &work)?;
        let mut touched = Vec::new();
        for class in &colouring.classes {
            let round = claims.next_round();
            count.rounds += 1;
            let claims_ref = &claims;
            let flips: Vec<Flip> = {
                // SAFETY: proposals only read.
                let view = unsafe { MeshView::new(mesh) };
                let (_, parts) = team.parallel_for_stealing_with(
                    class.len(),
                    params.grain,
                    |_| Vec::new(),
                    |_, out: &mut Vec<Flip>, i| {
                        if let Some(f) = propose(&view, m, class[i], params.l_up) {
                            claims_ref.claim(f.vertices(), Claims::stamp(round, f.u));
                            out.push(f);
                        }
                    },
                    |_, out| out,
                );
                concat(parts)
            };
            if flips.is_empty() {
                continue;
            }
            let applied = {
                // SAFETY: winning flips have disjoint vertex sets, hence
                // disjoint element pairs; adjacency goes through the ledger.
                let view = unsafe { MeshView::new(mesh) };
                let ledger_ref = &ledger;
                let (_, parts) = team.parallel_for_stealing_with(
                    flips.len(),
                    params.grain,
                    |_| Vec::new(),
                    |w, out: &mut Vec<(VertexId, bool)>, i| {
                        let f = &flips[i];
                        let won = claims_ref.holds(f.vertices(), Claims::stamp(round, f.u));
                        if won {
                            apply(&view, f, |e| ledger_ref.push(w, e));
                            out.extend(f.vertices().map(|v| (v, true)));
                        } else {
                            out.push((f.u, false));
                        }
                    },
                    |_, out| out,
                );
                concat(parts)
            };
            let won = applied.iter().filter(|x| x.1).count() as u64 / 4;
            count.applied += won;
            count.deferred += flips.len() as u64 - won;
            touched.extend(applied.into_iter().map(|x| x.0));
            let stats = ledger.commit(team, mesh);
            count.ownership_violations += stats.ownership_violations;
            check(mesh, params.checks, true, "swap round")?;
        }
        touched.sort_unstable();
        touched.dedup();
        work = touched;
    }
    check(mesh, params.checks, false, "swap")?;
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Checks;
    use crate::mesh::{structured_square_mesh, verify, BoundaryTag};
    use crate::quality::min_patch_quality;

    fn params() -> KernelParams {
        KernelParams {
            checks: Checks::Rounds,
            ..KernelParams::default()
        }
    }

    fn quad(coords: Vec<[f64; 2]>, diagonal_02: bool) -> Mesh {
        let elements = if diagonal_02 {
            vec![[0, 1, 2], [0, 2, 3]]
        } else {
            vec![[0, 1, 3], [1, 2, 3]]
        };
        Mesh::new(coords, elements, vec![BoundaryTag(0b11); 4]).unwrap()
    }

    #[test]
    fn anisotropic_metric_flips_bad_diagonal() {
        let team = ThreadTeam::new(1).unwrap();
        // unit square, metric diag(1, 100): stretched in y, the diagonal
        // choice matters only through the mixed term, so rotate the square
        let coords = vec![[0.0, 0.0], [1.0, -0.1], [1.0, 0.9], [0.0, 1.0]];
        for diagonal in [true, false] {
            let mut mesh = quad(coords.clone(), diagonal);
            let field = MetricField::new(vec![MetricTensor::diag(1.0, 100.0); 4], 1.0, 1e-3, 1.0);
            let all: Vec<_> = mesh.alive_elements().collect();
            let before = min_patch_quality(&mesh, &field, &all).value();
            let other = min_patch_quality(&quad(coords.clone(), !diagonal), &field, &[0, 1]).value();
            let c = swap(&team, &mut mesh, &field, &params()).unwrap();
            let after = min_patch_quality(&mesh, &field, &all).value();
            assert_eq!(c.applied == 1, other > before + SWAP_TOLERANCE);
            assert!((after - before.max(other)).abs() < 1e-12);
            assert!(verify(&mesh).is_empty());
        }
    }

    #[test]
    fn reentrant_quad_is_not_flipped() {
        // vertex 1 pushed inside: the diagonal 0-2 would leave the quad
        let mut mesh = quad(vec![[0.0, 0.0], [0.3, 0.3], [1.0, 0.0], [0.3, 1.0]], false);
        assert!(verify(&mesh).is_empty());
        let field = MetricField::new(vec![MetricTensor::IDENTITY; 4], 1.0, 1e-3, 1.0);
        let view = unsafe { MeshView::new(&mut mesh) };
        assert!(evaluate_flip(&view, &field.tensors, 1, 3, f64::INFINITY).is_none());
    }

    #[test]
    fn flip_to_an_overlong_diagonal_is_refused() {
        // vertex 1 sits just below 0-2, so the 1-3 diagonal (length 1.1) is
        // better shaped than 0-2 (length 1)
        let field = MetricField::new(vec![MetricTensor::IDENTITY; 4], 1.0, 1e-3, 1.0);
        let mut mesh = quad(vec![[0.0, 0.0], [0.5, -0.1], [1.0, 0.0], [0.5, 1.0]], true);
        let view = unsafe { MeshView::new(&mut mesh) };
        assert!(evaluate_flip(&view, &field.tensors, 0, 2, f64::INFINITY).is_some());
        assert!(evaluate_flip(&view, &field.tensors, 0, 2, 1.05).is_none());
        // a flip that shortens the edge stays allowed whatever the bound
        let mut rhombus = quad(vec![[0.0, 0.0], [0.5, -0.3], [1.0, 0.0], [0.5, 0.3]], true);
        let view = unsafe { MeshView::new(&mut rhombus) };
        assert!(evaluate_flip(&view, &field.tensors, 0, 2, 0.1).is_some());
    }

    #[test]
    fn delaunay_pair_is_left_alone() {
        let team = ThreadTeam::new(2).unwrap();
        let h = 3f64.sqrt() / 2.0;
        // two equilateral triangles sharing the short diagonal
        let mut mesh = quad(vec![[0.0, 0.0], [0.5, -h], [1.0, 0.0], [0.5, h]], true);
        let field = MetricField::new(vec![MetricTensor::IDENTITY; 4], 1.0, 1e-3, 1.0);
        let c = swap(&team, &mut mesh, &field, &params()).unwrap();
        assert_eq!(c.applied, 0);
    }

    #[test]
    fn swap_on_structured_mesh_is_monotone_and_conforming() {
        for threads in [1, 4] {
            let team = ThreadTeam::new(threads).unwrap();
            let mut mesh = structured_square_mesh(12);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            // wants elements stretched along the falling diagonal
            let t = MetricTensor::from_eigen([1.0, 400.0], [[s, -s], [s, s]]);
            let field = MetricField::new(vec![t; mesh.vertex_count()], 1.0, 1e-3, 1.0);
            let before = crate::quality::QualityStats::of(&mesh, &field);
            let c = swap(&team, &mut mesh, &field, &params()).unwrap();
            let after = crate::quality::QualityStats::of(&mesh, &field);
            assert!(c.applied > 0);
            assert!(after.min >= before.min - 1e-12);
            assert!(verify(&mesh).is_empty());
            assert_eq!(c.ownership_violations, 0);
        }
    }
}
