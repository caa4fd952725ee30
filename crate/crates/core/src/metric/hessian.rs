//! Hessian recovery by local least-squares fitting of a full quadratic.

use std::sync::atomic::{AtomicUsize, Ordering};

use super::MetricTensor;
use crate::mesh::view::SharedSlice;
use crate::mesh::Mesh;
use crate::runtime::ThreadTeam;
use crate::VertexId;

/// Per-vertex Hessians, stored as symmetric 2x2 tensors, with fit
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianRecovery {
    pub hessians: Vec<MetricTensor>,
    /// Vertices whose 2-ring was rank-deficient and needed the 3-ring.
    pub widened: usize,
    /// Vertices where even the 3-ring failed; their Hessian is zero.
    pub deficient: usize,
}

enum Fit {
    TwoRing(MetricTensor),
    ThreeRing(MetricTensor),
    Failed,
}

/// Serial recovery over every alive vertex.
pub fn recover_hessian(mesh: &Mesh, values: &[f64]) -> HessianRecovery {
    let mut out = HessianRecovery {
        hessians: vec![MetricTensor::new(0.0, 0.0, 0.0); mesh.vertex_count()],
        widened: 0,
        deficient: 0,
    };
    let mut scratch = Scratch::default();
    for v in mesh.alive_vertices() {
        out.hessians[v as usize] = match fit_vertex(mesh, values, v, &mut scratch) {
            Fit::TwoRing(h) => h,
            Fit::ThreeRing(h) => {
                out.widened += 1;
                h
            }
            Fit::Failed => {
                out.deficient += 1;
                MetricTensor::new(0.0, 0.0, 0.0)
            }
        };
    }
    out
}

/// Parallel recovery; identical results to [`recover_hessian`].
pub fn recover_hessian_par(team: &ThreadTeam, mesh: &Mesh, values: &[f64]) -> HessianRecovery {
    let mut hessians = vec![MetricTensor::new(0.0, 0.0, 0.0); mesh.vertex_count()];
    let widened = AtomicUsize::new(0);
    let deficient = AtomicUsize::new(0);
    {
        // SAFETY: every index is written by the single iteration that owns it.
        let out = unsafe { SharedSlice::new(&mut hessians) };
        team.parallel_for_stealing_with(
            mesh.vertex_count(),
            256,
            |_| Scratch::default(),
            |_, scratch, i| {
                let v = i as VertexId;
                if !mesh.is_vertex_alive(v) {
                    return;
                }
                let h = match fit_vertex(mesh, values, v, scratch) {
                    Fit::TwoRing(h) => h,
                    Fit::ThreeRing(h) => {
                        widened.fetch_add(1, Ordering::Relaxed);
                        h
                    }
                    Fit::Failed => {
                        deficient.fetch_add(1, Ordering::Relaxed);
                        return;
                    }
                };
                out.write(i, h);
            },
            |_, _| (),
        );
    }
    HessianRecovery {
        hessians,
        widened: widened.into_inner(),
        deficient: deficient.into_inner(),
    }
}

#[derive(Default)]
struct Scratch {
    ring: Vec<VertexId>,
    frontier: Vec<VertexId>,
}

fn fit_vertex(mesh: &Mesh, values: &[f64], v: VertexId, s: &mut Scratch) -> Fit {
    s.ring.clear();
    s.ring.push(v);
    s.ring.extend_from_slice(mesh.neighbours(v));
    for depth in 2..=3 {
        s.frontier.clear();
        for &w in &s.ring {
            s.frontier.extend_from_slice(mesh.neighbours(w));
        }
        s.ring.append(&mut s.frontier);
        s.ring.sort_unstable();
        s.ring.dedup();
        if let Some(h) = fit_quadratic(mesh, values, v, &s.ring) {
            return if depth == 2 { Fit::TwoRing(h) } else { Fit::ThreeRing(h) };
        }
    }
    Fit::Failed
}

/// Least-squares fit of `c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2` in
/// coordinates centred on `v` and scaled to the patch radius.
fn fit_quadratic(mesh: &Mesh, values: &[f64], v: VertexId, patch: &[VertexId]) -> Option<MetricTensor> {
    if patch.len() < 6 {
        return None;
    }
    let c = mesh.coord(v);
    let scale = patch
        .iter()
        .map(|&w| {
            let p = mesh.coord(w);
            (p[0] - c[0]).abs().max((p[1] - c[1]).abs())
        })
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut a = [[0.0f64; 6]; 6];
    let mut b = [0.0f64; 6];
    for &w in patch {
        let p = mesh.coord(w);
        let (x, y) = ((p[0] - c[0]) / scale, (p[1] - c[1]) / scale);
        let phi = [1.0, x, y, x * x, x * y, y * y];
        let f = values[w as usize];
        for i in 0..6 {
            b[i] += phi[i] * f;
            for j in 0..6 {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    let coef = solve6(a, b)?;
    let s2 = scale * scale;
    Some(MetricTensor::new(2.0 * coef[3] / s2, coef[4] / s2, 2.0 * coef[5] / s2))
}

/// Gaussian elimination with partial pivoting; `None` when the system is
/// numerically singular.
fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    let norm = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-11 * norm;
    for col in 0..6 {
        let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= tol {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..6 {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..6 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..6).rev() {
        let mut s = b[row];
        for k in row + 1..6 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}
