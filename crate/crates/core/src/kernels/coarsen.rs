//! Coarsening by edge collapse.

use crate::colouring::colour_graph;
use crate::error::Result;
use crate::mesh::view::MeshView;
use crate::mesh::{apply_collapse, check_collapse, CollapseLimits, CollapsePlan, KernelOutcome, Mesh};
use crate::metric::{metric_edge_length, MetricField, MetricTensor};
use crate::runtime::{CapacityPolicy, DeferredLedger, ThreadTeam};
use crate::VertexId;

use super::{check, concat, gather, ChangeCount, Claims, KernelParams, WriteAudit};

fn has_short_edge(mesh: &Mesh, m: &[MetricTensor], v: VertexId, l_low: f64) -> bool {
    let p = mesh.coord(v);
    mesh.neighbours(v)
        .iter()
        .any(|&w| metric_edge_length(p, mesh.coord(w), &m[v as usize], &m[w as usize]) < l_low)
}

/// Tries the sub-`l_low` edges of `u` shortest first, ties to the lower id.
/// `None` if `u` has no short edge.
fn propose(
    view: &MeshView<'_>,
    m: &[MetricTensor],
    u: VertexId,
    params: &KernelParams,
    limits: &CollapseLimits,
) -> Option<Result<CollapsePlan, KernelOutcome>> {
    if !view.vertex_alive(u) {
        return None;
    }
    let p = view.coord(u);
    let mut short: Vec<(f64, VertexId)> = view
        .neighbours(u)
        .iter()
        .map(|&t| (metric_edge_length(p, view.coord(t), &m[u as usize], &m[t as usize]), t))
        .filter(|&(l, _)| l < params.l_low)
        .collect();
    if short.is_empty() {
        return None;
    }
    short.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut last = KernelOutcome::NotAnEdge;
    for (_, t) in short {
        match check_collapse(view, m, u, t, limits) {
            Ok(plan) => return Some(Ok(plan)),
            Err(reason) => last = reason,
        }
    }
    Some(Err(last))
}

/// Collapses edges shorter than `l_low` until none is left that can be
/// collapsed or the sweep limit is hit. Dead vertices and elements are left
/// in place; callers compact afterwards.
pub fn coarsen(team: &ThreadTeam, mesh: &mut Mesh, metric: &MetricField, params: &KernelParams) -> Result<ChangeCount> {
    params.validate()?;
    let nv = mesh.vertex_count();
    assert_eq!(metric.len(), nv, "metric field does not match the mesh");
    let m = metric.tensors.as_slice();
    let limits = CollapseLimits {
        l_up: params.l_up,
        quality_floor: params.collapse_quality_floor,
    };
    let mut policy = CapacityPolicy::new(nv / 8);
    let mut work: Vec<VertexId> = {
        let mesh = &*mesh;
        gather(team, &mut policy, nv, params.grain * 8, |v, out| {
            let v = v as VertexId;
            if mesh.is_vertex_alive(v) && has_short_edge(mesh, m, v, params.l_low) {
                out.push(v);
            }
        })
    };
    work.sort_unstable();

    let mut claims = Claims::new(nv);
    let audit = WriteAudit::new(nv, params.checks != super::Checks::None);
    let mut ledger = DeferredLedger::new(team);
    let mut count = ChangeCount::default();

    while !work.is_empty() && count.sweeps < params.max_sweeps {
        count.sweeps += 1;
        let colouring = colour_graph(team, mesh.nn_adj(), &work)?;
        let mut touched: Vec<VertexId> = Vec::new();

        for class in &colouring.classes {
            let round = claims.next_round();
            count.rounds += 1;
            let claims_ref = &claims;
            let (plans, rejected) = {
                // SAFETY: proposals only read.
                let view = unsafe { MeshView::new(mesh) };
                let (_, parts) = team.parallel_for_stealing_with(
                    class.len(),
                    params.grain,
                    |_| (Vec::new(), 0u64),
                    |_, (plans, rejected), i| match propose(&view, m, class[i], params, &limits) {
                        Some(Ok(plan)) => {
                            let u = plan.remove;
                            let stamp = Claims::stamp(round, u);
                            claims_ref.claim(std::iter::once(u).chain(view.neighbours(u).iter().copied()), stamp);
                            plans.push(plan);
                        }
                        Some(Err(_)) => *rejected += 1,
                        None => {}
                    },
                    |_, s| s,
                );
                let rejected: u64 = parts.iter().map(|p| p.1).sum();
                let plans: Vec<_> = parts.into_iter().flat_map(|p| p.0).collect();
                (plans, rejected)
            };
            count.rejected += rejected;
            if plans.is_empty() {
                continue;
            }

            let bound: usize = plans.iter().map(|p| mesh.neighbours(p.remove).len() + 2).sum();
            let (applied, next) = {
                // SAFETY: winners have pairwise disjoint closed neighbourhoods,
                // so each writes only its own vertex lists and the elements
                // around it; every other change goes through the ledger.
                let view = unsafe { MeshView::new(mesh) };
                let ledger_ref = &ledger;
                let (_, parts) = team.parallel_for_stealing_with(
                    plans.len(),
                    params.grain,
                    |_| (Vec::new(), 0u64),
                    |w, (next, applied): &mut (Vec<VertexId>, u64), i| {
                        let plan = &plans[i];
                        let u = plan.remove;
                        let stamp = Claims::stamp(round, u);
                        let nbrs = view.neighbours(u);
                        if claims_ref.holds(std::iter::once(u).chain(nbrs.iter().copied()), stamp) {
                            next.extend(nbrs.iter().copied().filter(|&x| x != plan.target));
                            next.push(plan.target);
                            audit.record(round, w, u);
                            apply_collapse(&view, plan, |edit| ledger_ref.push(w, edit));
                            *applied += 1;
                        } else {
                            next.push(u);
                        }
                    },
                    |_, s| s,
                );
                let applied: u64 = parts.iter().map(|p| p.1).sum();
                let next = concat(parts.into_iter().map(|p| p.0).collect());
                debug_assert!(next.len() <= bound);
                (applied, next)
            };
            count.applied += applied;
            count.deferred += plans.len() as u64 - applied;
            touched.extend(next);

            let stats = ledger.commit(team, mesh);
            count.ownership_violations += stats.ownership_violations;
            check(mesh, params.checks, true, "coarsen round")?;
        }

        touched.sort_unstable();
        touched.dedup();
        let mesh_ref = &*mesh;
        work = gather(team, &mut policy, touched.len(), params.grain * 8, |i, out| {
            let v = touched[i];
            if mesh_ref.is_vertex_alive(v) && has_short_edge(mesh_ref, m, v, params.l_low) {
                out.push(v);
            }
        });
        work.sort_unstable();
    }
    count.ownership_violations += audit.violations();
    check(mesh, params.checks, false, "coarsen")?;
    Ok(count)
}
