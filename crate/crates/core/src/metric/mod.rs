//! Node-wise metric tensor field and metric-space geometry.

mod hessian;
mod psi;

pub use hessian::{recover_hessian, recover_hessian_par, HessianRecovery};
pub use psi::{eval_psi, SyntheticField};

use std::path::Path;

use crate::error::{AdaptError, Result};
use crate::Point;

/// Symmetric 2x2 tensor `[[m00, m01], [m01, m11]]`, units of 1/length^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub m00: f64,
    pub m01: f64,
    pub m11: f64,
}

/// Eigen-decomposition of a symmetric 2x2 matrix: `values[i]` belongs to the
/// unit eigenvector `vectors[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub values: [f64; 2],
    pub vectors: [[f64; 2]; 2],
}

impl MetricTensor {
    pub const IDENTITY: MetricTensor = MetricTensor::new(1.0, 0.0, 1.0);

    pub const fn new(m00: f64, m01: f64, m11: f64) -> Self {
        MetricTensor { m00, m01, m11 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        MetricTensor::new(a, 0.0, b)
    }

    /// Isotropic metric asking for edges of length `h`.
    pub fn isotropic(h: f64) -> Self {
        let s = 1.0 / (h * h);
        MetricTensor::diag(s, s)
    }

    pub fn from_eigen(values: [f64; 2], vectors: [[f64; 2]; 2]) -> Self {
        let [l0, l1] = values;
        let [q0, q1] = vectors;
        MetricTensor::new(
            l0 * q0[0] * q0[0] + l1 * q1[0] * q1[0],
            l0 * q0[0] * q0[1] + l1 * q1[0] * q1[1],
            l0 * q0[1] * q0[1] + l1 * q1[1] * q1[1],
        )
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.m00 * self.m11 - self.m01 * self.m01
    }

    /// `e^T M e`.
    #[inline]
    pub fn quad_form(&self, e: [f64; 2]) -> f64 {
        self.m00 * e[0] * e[0] + 2.0 * self.m01 * e[0] * e[1] + self.m11 * e[1] * e[1]
    }

    /// Closed-form symmetric eigensolver; eigenvalues in ascending order.
    pub fn eigen(&self) -> SymEigen {
        let half_tr = 0.5 * (self.m00 + self.m11);
        let half_diff = 0.5 * (self.m00 - self.m11);
        let r = half_diff.hypot(self.m01);
        let values = [half_tr - r, half_tr + r];
        // Eigenvector of the larger eigenvalue, computed from whichever row is
        // better conditioned.
        let v1 = if r == 0.0 {
            [1.0, 0.0]
        } else if half_diff >= 0.0 {
            let (x, y) = (half_diff + r, self.m01);
            let n = x.hypot(y);
            [x / n, y / n]
        } else {
            let (x, y) = (self.m01, r - half_diff);
            let n = x.hypot(y);
            [x / n, y / n]
        };
        let v0 = [-v1[1], v1[0]];
        SymEigen {
            values,
            vectors: [v0, v1],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        MetricTensor::new(self.m00 * s, self.m01 * s, self.m11 * s)
    }

    pub fn add(&self, o: &MetricTensor) -> Self {
        MetricTensor::new(self.m00 + o.m00, self.m01 + o.m01, self.m11 + o.m11)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m00 > 0.0 && self.det() > 0.0
    }
}

/// Builds a metric from a Hessian: eigenvalues `|lambda| / eta` clamped to
/// `[1/h_max^2, 1/h_min^2]`, eigenvectors kept.
pub fn hessian_to_metric(h: &MetricTensor, eta: f64, h_min: f64, h_max: f64) -> MetricTensor {
    let lo = 1.0 / (h_max * h_max);
    let hi = 1.0 / (h_min * h_min);
    let eig = h.eigen();
    let values = eig.values.map(|l| (l.abs() / eta).clamp(lo, hi));
    MetricTensor::from_eigen(values, eig.vectors)
}

/// Length of `p0 -> p1` measured in the average of the endpoint metrics.
#[inline]
pub fn metric_edge_length(p0: Point, p1: Point, m0: &MetricTensor, m1: &MetricTensor) -> f64 {
    let e = [p1[0] - p0[0], p1[1] - p0[1]];
    (0.5 * (m0.quad_form(e) + m1.quad_form(e))).max(0.0).sqrt()
}

/// Component-wise `(1 - s) M0 + s M1`.
pub fn interpolate_metric(m0: &MetricTensor, m1: &MetricTensor, s: f64) -> MetricTensor {
    m0.scaled(1.0 - s).add(&m1.scaled(s))
}

/// One tensor per vertex plus the bounds that were used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    pub tensors: Vec<MetricTensor>,
    pub h_min: f64,
    pub h_max: f64,
    pub eta: f64,
}

impl MetricField {
    pub fn new(tensors: Vec<MetricTensor>, eta: f64, h_min: f64, h_max: f64) -> Self {
        MetricField {
            tensors,
            h_min,
            h_max,
            eta,
        }
    }

    /// Same isotropic size `h` everywhere.
    pub fn uniform(vertices: usize, h: f64, h_min: f64, h_max: f64, eta: f64) -> Self {
        MetricField::new(vec![MetricTensor::isotropic(h); vertices], eta, h_min, h_max)
    }

    pub fn from_hessians(hessians: &[MetricTensor], eta: f64, h_min: f64, h_max: f64) -> Self {
        let tensors = hessians
            .iter()
            .map(|h| hessian_to_metric(h, eta, h_min, h_max))
            .collect();
        MetricField::new(tensors, eta, h_min, h_max)
    }

    #[inline]
    pub fn tensor(&self, v: u32) -> &MetricTensor {
        &self.tensors[v as usize]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Writes `m00,m01,m11` per vertex with a header line.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.tensors.len() * 48);
        out.push_str("m00,m01,m11\n");
        for m in &self.tensors {
            out.push_str(&format!("{:e},{:e},{:e}\n", m.m00, m.m01, m.m11));
        }
        crate::mesh::io::write_atomic(path, out.as_bytes())
    }

    /// Reads a tensor CSV as written by [`MetricField::write_csv`].
    pub fn read_csv(path: &Path, eta: f64, h_min: f64, h_max: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AdaptError::io(path, e))?;
        let parse_err = |line: usize, message: String| AdaptError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut tensors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("m00")) {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(i + 1, e.to_string()))?;
            let [m00, m01, m11] = vals[..] else {
                return Err(parse_err(i + 1, format!("expected 3 values, found {}", vals.len())));
            };
            let m = MetricTensor::new(m00, m01, m11);
            if !m.is_positive_definite() {
                return Err(parse_err(i + 1, "tensor is not positive-definite".into()));
            }
            tensors.push(m);
        }
        Ok(MetricField::new(tensors, eta, h_min, h_max))
    }
}
