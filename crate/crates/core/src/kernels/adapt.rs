//! The adaptation driver: coarsen, swap, refine until nothing changes, then
//! smooth.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::mesh::Mesh;
use crate::metric::MetricField;
use crate::quality::QualityStats;
use crate::runtime::{RuntimeStats, ThreadTeam};

use super::{check, coarsen, refine, smooth, swap, ChangeCount, KernelParams};

/// Accumulated time and counts of one kernel over an adapt call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseReport {
    pub time: Duration,
    pub changes: ChangeCount,
}

impl PhaseReport {
    fn add(&mut self, time: Duration, changes: ChangeCount) {
        self.time += time;
        self.changes += changes;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptReport {
    pub iterations: usize,
    /// The last iteration changed nothing.
    pub converged: bool,
    pub coarsen: PhaseReport,
    pub swap: PhaseReport,
    pub refine: PhaseReport,
    pub smooth: PhaseReport,
    /// Compaction after coarsening.
    pub compact: Duration,
    pub total: Duration,
    pub quality: QualityStats,
    pub elements: usize,
    pub vertices: usize,
    pub runtime: RuntimeStats,
}

impl AdaptReport {
    pub fn ownership_violations(&self) -> u64 {
        [&self.coarsen, &self.swap, &self.refine, &self.smooth]
            .iter()
            .map(|p| p.changes.ownership_violations)
            .sum()
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(Duration, T)> {
    let start = Instant::now();
    let out = f()?;
    Ok((start.elapsed(), out))
}

/// Adapts `mesh` to `metric`. The metric travels with the vertices: new
/// vertices get interpolated tensors and compaction drops those of removed
/// vertices, so on return `metric.len() == mesh.vertex_count()`.
///
/// With checks enabled every phase is followed by a conformity check, and a
/// failure is reported as [`crate::AdaptError::NonConforming`] naming the phase.
pub fn adapt(team: &ThreadTeam, mesh: &mut Mesh, metric: &mut MetricField, params: &KernelParams) -> Result<AdaptReport> {
    params.validate()?;
    assert_eq!(metric.len(), mesh.vertex_count(), "metric field does not match the mesh");
    let start = Instant::now();
    let stats_before = team.stats();
    check(mesh, params.checks, false, "input")?;

    let mut report = AdaptReport {
        iterations: 0,
        converged: false,
        coarsen: PhaseReport::default(),
        swap: PhaseReport::default(),
        refine: PhaseReport::default(),
        smooth: PhaseReport::default(),
        compact: Duration::ZERO,
        total: Duration::ZERO,
        quality: QualityStats::of(mesh, metric),
        elements: 0,
        vertices: 0,
        runtime: RuntimeStats::default(),
    };

    while report.iterations < params.max_iterations {
        report.iterations += 1;

        let (t, c) = timed(|| coarsen(team, mesh, metric, params))?;
        report.coarsen.add(t, c);
        if c.applied > 0 {
            let t0 = Instant::now();
            let map = mesh.compact();
            metric.tensors = map.compact_vertex_data(&metric.tensors);
            report.compact += t0.elapsed();
            check(mesh, params.checks, false, "compaction")?;
        }

        let (t, s) = timed(|| swap(team, mesh, metric, params))?;
        report.swap.add(t, s);

        let (t, r) = timed(|| refine(team, mesh, metric, params))?;
        report.refine.add(t, r);

        if c.applied + s.applied + r.applied == 0 {
            report.converged = true;
            break;
        }
    }

    let (t, sm) = timed(|| smooth(team, mesh, metric, params))?;
    report.smooth.add(t, sm);

    report.total = start.elapsed();
    report.quality = QualityStats::of(mesh, metric);
    report.elements = mesh.alive_element_count();
    report.vertices = mesh.alive_vertex_count();
    report.runtime = team.stats().since(&stats_before);
    Ok(report)
}
