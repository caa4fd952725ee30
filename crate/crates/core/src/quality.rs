//! Metric-space triangle quality (Vasilevskii-Lipnikov functional).
//!
//! With `M` the vertex-averaged element metric, `|T|_M = sqrt(det M) |T|`
//! and `p_M` the metric perimeter,
//!
//! `q = 12 sqrt(3) |T|_M / p_M^2 * F(p_M / 3)`,
//! `F(x) = (min(x, 1/x) (2 - min(x, 1/x)))^3`.
//!
//! `q` is 1 exactly for the equilateral triangle with unit metric edges and
//! decays towards 0 as the shape degenerates or the size drifts from unit.

use std::path::Path;

use crate::error::Result;
use crate::mesh::{signed_area, Mesh};
use crate::metric::{metric_edge_length, MetricField, MetricTensor};
use crate::{ElementId, Point};

/// Quality score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QualityScore(pub f64);

impl QualityScore {
    pub const IDEAL: QualityScore = QualityScore(1.0);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The triangle is inverted or flat; callers must reject such configurations
/// before asking for a quality.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("cannot score an inverted element (area {area:e})")]
pub struct InvertedElement {
    pub area: f64,
}

#[inline]
fn size_penalty(x: f64) -> f64 {
    let m = x.min(1.0 / x);
    let f = m * (2.0 - m);
    f * f * f
}

pub fn triangle_quality(
    p: [Point; 3],
    m: [&MetricTensor; 3],
) -> std::result::Result<QualityScore, InvertedElement> {
    let area = signed_area(p[0], p[1], p[2]);
    if !(area > 0.0) {
        return Err(InvertedElement { area });
    }
    Ok(QualityScore(quality_unchecked(p, m, area)))
}

#[inline]
pub(crate) fn quality_unchecked(p: [Point; 3], m: [&MetricTensor; 3], area: f64) -> f64 {
    let avg = m[0].add(m[1]).add(m[2]).scaled(1.0 / 3.0);
    let metric_area = avg.det().max(0.0).sqrt() * area;
    let perimeter = metric_edge_length(p[0], p[1], m[0], m[1])
        + metric_edge_length(p[1], p[2], m[1], m[2])
        + metric_edge_length(p[2], p[0], m[2], m[0]);
    if perimeter <= 0.0 || !perimeter.is_finite() {
        return 0.0;
    }
    let q = 12.0 * 3f64.sqrt() * metric_area / (perimeter * perimeter) * size_penalty(perimeter / 3.0);
    q.clamp(0.0, 1.0)
}

/// Quality of an alive mesh element; inverted elements score 0.
pub fn element_quality(mesh: &Mesh, metric: &MetricField, e: ElementId) -> f64 {
    let [a, b, c] = mesh.element(e);
    let p = [mesh.coord(a), mesh.coord(b), mesh.coord(c)];
    let m = [metric.tensor(a), metric.tensor(b), metric.tensor(c)];
    triangle_quality(p, m).map_or(0.0, QualityScore::value)
}

/// Minimum quality over `elements`; the empty set scores 1.
pub fn min_patch_quality(mesh: &Mesh, metric: &MetricField, elements: &[ElementId]) -> QualityScore {
    QualityScore(
        elements
            .iter()
            .map(|&e| element_quality(mesh, metric, e))
            .fold(1.0, f64::min),
    )
}

/// Summary statistics of element quality over the alive elements.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityStats {
    pub min: f64,
    pub mean: f64,
    /// 20 equal-width bins over `[0, 1]`; 1.0 falls into the last bin.
    pub histogram: [u64; 20],
}

impl QualityStats {
    pub const BINS: usize = 20;

    pub fn of(mesh: &Mesh, metric: &MetricField) -> Self {
        let mut histogram = [0u64; Self::BINS];
        let mut min = 1.0f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        for e in mesh.alive_elements() {
            let q = element_quality(mesh, metric, e);
            min = min.min(q);
            sum += q;
            count += 1;
            histogram[((q * Self::BINS as f64) as usize).min(Self::BINS - 1)] += 1;
        }
        QualityStats {
            min: if count == 0 { 1.0 } else { min },
            mean: if count == 0 { 1.0 } else { sum / count as f64 },
            histogram,
        }
    }

    /// `bin_lo,bin_hi,count` per bin with a header.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.histogram.iter().enumerate() {
            let lo = i as f64 / Self::BINS as f64;
            let hi = (i + 1) as f64 / Self::BINS as f64;
            s.push_str(&format!("{lo:.2},{hi:.2},{c}\n"));
        }
        s
    }

    pub fn write_histogram(&self, path: &Path) -> Result<()> {
        crate::mesh::io::write_atomic(path, self.histogram_csv().as_bytes())
    }
}
