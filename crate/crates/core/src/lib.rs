//! Metric-driven anisotropic adaptation of 2D triangle meshes.
//!
//! The four adaptive kernels (coarsening, refinement, edge swapping and
//! vertex smoothing) run thread-parallel over colour classes of the vertex
//! graph. Within a colour round, adjacency updates for vertices other than
//! the one being processed are pushed into a [`runtime::DeferredLedger`] and
//! committed afterwards by the thread that owns each vertex (`id mod N`).
//! Propagation worklists are assembled with a single atomic fetch-and-add per
//! thread, and loops are balanced by a range-splitting work-stealing
//! scheduler.
//!
//! ```
//! use adaptix::{kernels, mesh, metric, runtime::ThreadTeam};
//!
//! let team = ThreadTeam::new(4).unwrap();
//! let mut mesh = mesh::structured_square_mesh(20);
//! let mut field = metric::MetricField::uniform(mesh.vertex_count(), 0.05, 1e-3, 0.5, 1e-2);
//! let report = kernels::adapt(&team, &mut mesh, &mut field, &kernels::KernelParams::default()).unwrap();
//! println!("{} elements", report.elements);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod colouring;
pub mod error;
pub mod kernels;
pub mod mesh;
pub mod metric;
pub mod quality;
pub mod runtime;

pub use error::{AdaptError, Result};

/// Vertex identifier. Stable within an adaptation phase; compaction renumbers.
pub type VertexId = u32;

/// Element identifier. Stable within an adaptation phase; compaction renumbers.
pub type ElementId = u32;

/// 2D point in physical space.
pub type Point = [f64; 2];
