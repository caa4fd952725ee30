//! C ABI over the adaptix library.
//!
//! Meshes, metric fields and thread teams are opaque handles created by the
//! `*_new`/`*_read` functions and released with the matching `*_free`.
//! Every fallible call returns an [`AdaptixStatus`]; on failure the message
//! is available from [`adaptix_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use adaptix::bench::build_metric;
use adaptix::kernels::{self, Checks, KernelParams};
use adaptix::mesh::{self, io, BoundaryTag, Mesh};
use adaptix::metric::{eval_psi, MetricField, MetricTensor, SyntheticField};
use adaptix::quality::QualityStats;
use adaptix::runtime::ThreadTeam;
use adaptix::AdaptError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    InvalidMesh = 5,
    NonConforming = 6,
    ThreadPool = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptixChecks {
    None = 0,
    Phases = 1,
    Rounds = 2,
}

/// Kernel parameters; obtain defaults from [`adaptix_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AdaptixParams {
    pub l_low: f64,
    pub l_up: f64,
    pub max_iterations: u32,
    pub max_sweeps: u32,
    pub smooth_sweeps: u32,
    pub checks: AdaptixChecks,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptixSummary {
    pub elements: usize,
    pub vertices: usize,
    pub iterations: u32,
    pub converged: bool,
    pub min_quality: f64,
    pub mean_quality: f64,
    pub seconds: f64,
}

pub struct AdaptixMesh(Mesh);
pub struct AdaptixMetric(MetricField);
pub struct AdaptixTeam(ThreadTeam);

struct Failure(AdaptixStatus, String);

impl From<AdaptError> for Failure {
    fn from(e: AdaptError) -> Self {
        let status = match e {
            AdaptError::VertexOutOfRange { .. } | AdaptError::InvertedElement { .. } => AdaptixStatus::InvalidMesh,
            AdaptError::NonConforming { .. } => AdaptixStatus::NonConforming,
            AdaptError::Parse { .. } => AdaptixStatus::Parse,
            AdaptError::Io { .. } => AdaptixStatus::Io,
            AdaptError::Config(_) => AdaptixStatus::InvalidArgument,
            AdaptError::ThreadPool(_) => AdaptixStatus::ThreadPool,
            AdaptError::ColouringDiverged { .. } => AdaptixStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(AdaptixStatus::InvalidArgument, message.into())
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AdaptixStatus {
    let (status, message) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (AdaptixStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(panic) => {
            let m = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (AdaptixStatus::Internal, m)
        }
    };
    set_last_error(&message);
    status
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(AdaptixStatus::NullPointer, format!("{name} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(AdaptixStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    deref(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn path(p: *const c_char) -> Result<PathBuf, Failure> {
    deref(p, "path")?;
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| invalid("path is not valid UTF-8"))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    let slot = deref_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], out: *mut T, capacity: usize) -> Result<(), Failure> {
    if capacity < src.len() {
        return Err(invalid(format!("buffer holds {capacity} values, {} needed", src.len())));
    }
    if !src.is_empty() {
        deref_mut(out, "out")?;
        std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or an empty string. Valid
/// until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn adaptix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn adaptix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The synthetic benchmark field.
#[no_mangle]
pub extern "C" fn adaptix_psi(x: f64, y: f64, t: f64, period: f64) -> f64 {
    eval_psi(x, y, t, period)
}

#[no_mangle]
pub extern "C" fn adaptix_params_default() -> AdaptixParams {
    let p = KernelParams::default();
    AdaptixParams {
        l_low: p.l_low,
        l_up: p.l_up,
        max_iterations: p.max_iterations as u32,
        max_sweeps: p.max_sweeps as u32,
        smooth_sweeps: p.smooth_sweeps as u32,
        checks: match p.checks {
            Checks::None => AdaptixChecks::None,
            Checks::Phases => AdaptixChecks::Phases,
            Checks::Rounds => AdaptixChecks::Rounds,
        },
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_team_new(threads: usize, out: *mut *mut AdaptixTeam) -> AdaptixStatus {
    guard(|| store(out, AdaptixTeam(ThreadTeam::new(threads)?)))
}

/// # Safety
/// `team` must come from [`adaptix_team_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn adaptix_team_free(team: *mut AdaptixTeam) {
    if !team.is_null() {
        drop(Box::from_raw(team));
    }
}

/// Unit square split into `2 n²` right triangles.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_structured(n: usize, out: *mut *mut AdaptixMesh) -> AdaptixStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        store(out, AdaptixMesh(mesh::structured_square_mesh(n)))
    })
}

/// Builds a mesh from `2 * vertices` coordinates, `3 * elements` vertex ids
/// (counter-clockwise) and one boundary tag per vertex. Only ids are checked
/// here; use [`adaptix_mesh_verify`] for orientation and conformity.
///
/// # Safety
/// The arrays must hold the stated number of values.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_new(
    coords: *const f64,
    vertices: usize,
    triangles: *const u32,
    elements: usize,
    tags: *const u8,
    out: *mut *mut AdaptixMesh,
) -> AdaptixStatus {
    guard(|| {
        let c = slice(coords, 2 * vertices, "coords")?;
        let t = slice(triangles, 3 * elements, "triangles")?;
        let b = slice(tags, vertices, "tags")?;
        let m = Mesh::new(
            c.chunks_exact(2).map(|p| [p[0], p[1]]).collect(),
            t.chunks_exact(3).map(|e| [e[0], e[1], e[2]]).collect(),
            b.iter().map(|&x| BoundaryTag(x)).collect(),
        )?;
        store(out, AdaptixMesh(m))
    })
}

/// # Safety
/// `file` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_read(file: *const c_char, out: *mut *mut AdaptixMesh) -> AdaptixStatus {
    guard(|| store(out, AdaptixMesh(io::read_native(&path(file)?)?)))
}

/// # Safety
/// `mesh` must be a live handle and `file` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_write(mesh: *const AdaptixMesh, file: *const c_char) -> AdaptixStatus {
    guard(|| Ok(io::write_native(&deref(mesh, "mesh")?.0, &path(file)?)?))
}

/// Writes a legacy VTK file, with per-element quality when `metric` is not
/// null.
///
/// # Safety
/// `mesh` must be a live handle, `metric` null or a live handle, and `file`
/// a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_write_vtk(
    mesh: *const AdaptixMesh,
    metric: *const AdaptixMetric,
    file: *const c_char,
) -> AdaptixStatus {
    guard(|| {
        let m = &deref(mesh, "mesh")?.0;
        let file = path(file)?;
        match metric.as_ref() {
            None => Ok(io::write_vtk(m, &[], &file)?),
            Some(field) => {
                check_sizes(m, &field.0)?;
                let q: Vec<f64> = m
                    .alive_elements()
                    .map(|e| adaptix::quality::element_quality(m, &field.0, e))
                    .collect();
                Ok(io::write_vtk(m, &[("quality", &q)], &file)?)
            }
        }
    })
}

/// # Safety
/// `mesh` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_free(mesh: *mut AdaptixMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_vertex_count(mesh: *const AdaptixMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.vertex_count())
}

/// Number of elements; 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_element_count(mesh: *const AdaptixMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.element_count())
}

/// Copies `2 * vertex_count` coordinates into `out`.
///
/// # Safety
/// `mesh` must be a live handle and `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_coords(mesh: *const AdaptixMesh, out: *mut f64, capacity: usize) -> AdaptixStatus {
    guard(|| {
        let flat: Vec<f64> = deref(mesh, "mesh")?.0.coords().iter().flatten().copied().collect();
        copy_out(&flat, out, capacity)
    })
}

/// Copies `3 * element_count` vertex ids into `out`.
///
/// # Safety
/// `mesh` must be a live handle and `out` must hold `capacity` ids.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_elements(mesh: *const AdaptixMesh, out: *mut u32, capacity: usize) -> AdaptixStatus {
    guard(|| {
        let flat: Vec<u32> = deref(mesh, "mesh")?.0.elements().iter().flatten().copied().collect();
        copy_out(&flat, out, capacity)
    })
}

/// Copies one boundary tag per vertex into `out`: bit `k` set means the
/// vertex lies on side `k` (bottom, right, top, left for the unit square).
///
/// # Safety
/// `mesh` must be a live handle and `out` must hold `capacity` tags.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_tags(mesh: *const AdaptixMesh, out: *mut u8, capacity: usize) -> AdaptixStatus {
    guard(|| {
        let tags: Vec<u8> = deref(mesh, "mesh")?.0.boundary_tags().iter().map(|t| t.0).collect();
        copy_out(&tags, out, capacity)
    })
}

/// Stores the number of conformity violations in `violations`; the
/// description of the first few is left in [`adaptix_last_error`] as well.
///
/// # Safety
/// `mesh` must be a live handle and `violations` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_mesh_verify(mesh: *const AdaptixMesh, violations: *mut usize) -> AdaptixStatus {
    let mut report = String::new();
    let status = guard(|| {
        let r = mesh::verify(&deref(mesh, "mesh")?.0);
        *deref_mut(violations, "violations")? = r.len();
        if !r.is_empty() {
            report = r.to_string();
        }
        Ok(())
    });
    if status == AdaptixStatus::Ok && !report.is_empty() {
        set_last_error(&report);
    }
    status
}

fn check_sizes(m: &Mesh, field: &MetricField) -> Result<(), Failure> {
    if field.len() != m.vertex_count() {
        return Err(invalid(format!(
            "metric has {} tensors but the mesh has {} vertices",
            field.len(),
            m.vertex_count()
        )));
    }
    Ok(())
}

/// Metric from `3 * count` tensor entries `m00, m01, m11`.
///
/// # Safety
/// `entries` must hold `3 * count` doubles and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_metric_new(
    entries: *const f64,
    count: usize,
    eta: f64,
    h_min: f64,
    h_max: f64,
    out: *mut *mut AdaptixMetric,
) -> AdaptixStatus {
    guard(|| {
        let e = slice(entries, 3 * count, "entries")?;
        let mut tensors = Vec::with_capacity(count);
        for (i, t) in e.chunks_exact(3).enumerate() {
            let m = MetricTensor::new(t[0], t[1], t[2]);
            if !m.is_positive_definite() {
                return Err(invalid(format!("tensor {i} is not positive definite")));
            }
            tensors.push(m);
        }
        store(out, AdaptixMetric(MetricField::new(tensors, eta, h_min, h_max)))
    })
}

/// Metric of the synthetic benchmark field at time `t` on the vertices of
/// `mesh`, built from the recovered Hessian.
///
/// # Safety
/// `team` and `mesh` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adaptix_metric_from_psi(
    team: *const AdaptixTeam,
    mesh: *const AdaptixMesh,
    t: f64,
    period: f64,
    eta: f64,
    h_min: f64,
    h_max: f64,
    out: *mut *mut AdaptixMetric,
) -> AdaptixStatus {
    guard(|| {
        let team = &deref(team, "team")?.0;
        let m = &deref(mesh, "mesh")?.0;
        if !(period > 0.0 && eta > 0.0 && h_min > 0.0 && h_max >= h_min) {
            return Err(invalid("need period > 0, eta > 0 and 0 < h_min <= h_max"));
        }
        let field = build_metric(team, m, &SyntheticField::new(period, t), eta, h_min, h_max);
        store(out, AdaptixMetric(field))
    })
}

/// # Safety
/// `metric` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn adaptix_metric_free(metric: *mut AdaptixMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

/// Minimum and mean element quality.
///
/// # Safety
/// `mesh` and `metric` must be live handles; `min` and `mean` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn adaptix_quality(
    mesh: *const AdaptixMesh,
    metric: *const AdaptixMetric,
    min: *mut f64,
    mean: *mut f64,
) -> AdaptixStatus {
    guard(|| {
        let m = &deref(mesh, "mesh")?.0;
        let field = &deref(metric, "metric")?.0;
        check_sizes(m, field)?;
        let s = QualityStats::of(m, field);
        *deref_mut(min, "min")? = s.min;
        *deref_mut(mean, "mean")? = s.mean;
        Ok(())
    })
}

/// Adapts `mesh` to `metric` in place. The metric follows the vertices, so
/// both handles stay consistent. `params` may be null for defaults and
/// `summary` may be null.
///
/// # Safety
/// `team`, `mesh` and `metric` must be live handles; `params` and `summary`
/// null or valid.
#[no_mangle]
pub unsafe extern "C" fn adaptix_adapt(
    team: *const AdaptixTeam,
    mesh: *mut AdaptixMesh,
    metric: *mut AdaptixMetric,
    params: *const AdaptixParams,
    summary: *mut AdaptixSummary,
) -> AdaptixStatus {
    guard(|| {
        let team = &deref(team, "team")?.0;
        let m = &mut deref_mut(mesh, "mesh")?.0;
        let field = &mut deref_mut(metric, "metric")?.0;
        check_sizes(m, field)?;
        let p = params.as_ref().copied().unwrap_or_else(|| adaptix_params_default());
        let kp = KernelParams {
            l_low: p.l_low,
            l_up: p.l_up,
            max_iterations: p.max_iterations as usize,
            max_sweeps: p.max_sweeps as usize,
            smooth_sweeps: p.smooth_sweeps as usize,
            checks: match p.checks {
                AdaptixChecks::None => Checks::None,
                AdaptixChecks::Phases => Checks::Phases,
                AdaptixChecks::Rounds => Checks::Rounds,
            },
            ..KernelParams::default()
        };
        let r = kernels::adapt(team, m, field, &kp)?;
        // handles expose dense arrays
        if m.alive_vertex_count() != m.vertex_count() || m.alive_element_count() != m.element_count() {
            let map = m.compact();
            field.tensors = map.compact_vertex_data(&field.tensors);
        }
        if let Some(s) = summary.as_mut() {
            *s = AdaptixSummary {
                elements: r.elements,
                vertices: r.vertices,
                iterations: r.iterations as u32,
                converged: r.converged,
                min_quality: r.quality.min,
                mean_quality: r.quality.mean,
                seconds: r.total.as_secs_f64(),
            };
        }
        Ok(())
    })
}
