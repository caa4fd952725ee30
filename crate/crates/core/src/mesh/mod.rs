//! Mutable unstructured triangle mesh with vertex-to-vertex and
//! vertex-to-element adjacency.
//!
//! Deletion is logical: dead vertices and elements keep their ids until
//! [`Mesh::compact`] renumbers everything between adaptation phases. Ids are
//! therefore stable for the whole of a phase, which the deferred-update
//! ownership rule (`id mod N`) relies on.

mod collapse;
mod edit;
pub mod io;
mod verify;
pub(crate) mod view;

pub use collapse::{collapse_edge, CollapseLimits, KernelOutcome};
pub use edit::{commit_edits, AdjacencyEdit, CommitOutcome, EditKind};
pub use verify::{verify, ConformityReport, Violation};

pub(crate) use collapse::{apply_collapse, check_collapse, CollapsePlan};
pub(crate) use edit::apply_edit;

use crate::error::{AdaptError, Result};
use crate::{ElementId, Point, VertexId};

/// Boundary classification of a vertex as a bit set of boundary segment ids.
///
/// `0` is interior, a single bit places the vertex on that segment, and two or
/// more bits mark a corner where segments meet. Corners never move or
/// collapse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct BoundaryTag(pub u8);

impl BoundaryTag {
    pub const INTERIOR: BoundaryTag = BoundaryTag(0);

    pub fn segment(id: u8) -> BoundaryTag {
        assert!(id < 8, "at most 8 boundary segments are supported");
        BoundaryTag(1 << id)
    }

    #[inline]
    pub fn is_interior(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn is_corner(self) -> bool {
        self.0.count_ones() > 1
    }

    #[inline]
    pub fn shared(self, other: BoundaryTag) -> BoundaryTag {
        BoundaryTag(self.0 & other.0)
    }

    #[inline]
    pub fn contains(self, other: BoundaryTag) -> bool {
        self.0 & other.0 == other.0
    }
}

/// Side ids used by [`structured_square_mesh`].
pub mod side {
    pub const BOTTOM: u8 = 0;
    pub const RIGHT: u8 = 1;
    pub const TOP: u8 = 2;
    pub const LEFT: u8 = 3;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub(crate) coords: Vec<Point>,
    pub(crate) elements: Vec<[VertexId; 3]>,
    pub(crate) nn_adj: Vec<Vec<VertexId>>,
    pub(crate) ne_adj: Vec<Vec<ElementId>>,
    pub(crate) boundary: Vec<BoundaryTag>,
    pub(crate) vertex_alive: Vec<bool>,
    pub(crate) element_alive: Vec<bool>,
}

/// Adjacency lists for every vertex: sorted neighbour ids and sorted incident
/// element ids.
pub type Adjacency = (Vec<Vec<VertexId>>, Vec<Vec<ElementId>>);

/// Builds both adjacency structures from scratch.
pub fn build_adjacency(elements: &[[VertexId; 3]], vertex_count: usize) -> Result<Adjacency> {
    adjacency_from(
        elements.iter().enumerate().map(|(e, t)| (e as ElementId, *t)),
        vertex_count,
    )
}

pub(crate) fn adjacency_from(
    elements: impl Iterator<Item = (ElementId, [VertexId; 3])>,
    vertex_count: usize,
) -> Result<Adjacency> {
    let mut nn: Vec<Vec<VertexId>> = vec![Vec::new(); vertex_count];
    let mut ne: Vec<Vec<ElementId>> = vec![Vec::new(); vertex_count];
    for (e, tri) in elements {
        for &v in &tri {
            if v as usize >= vertex_count {
                return Err(AdaptError::VertexOutOfRange {
                    element: e as usize,
                    vertex: v,
                    vertex_count,
                });
            }
        }
        for (k, &v) in tri.iter().enumerate() {
            ne[v as usize].push(e);
            for (j, &w) in tri.iter().enumerate() {
                if j != k && w != v {
                    nn[v as usize].push(w);
                }
            }
        }
    }
    for list in nn.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    for list in ne.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    Ok((nn, ne))
}

/// Twice the signed area of the triangle; positive when counter-clockwise.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

#[inline]
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * orient(a, b, c)
}

impl Mesh {
    /// Assembles a mesh and its adjacency. Orientation is not checked here;
    /// use [`verify`] for that.
    pub fn new(
        coords: Vec<Point>,
        elements: Vec<[VertexId; 3]>,
        boundary: Vec<BoundaryTag>,
    ) -> Result<Mesh> {
        if boundary.len() != coords.len() {
            return Err(AdaptError::Config(format!(
                "{} boundary tags for {} vertices",
                boundary.len(),
                coords.len()
            )));
        }
        let (nn_adj, ne_adj) = build_adjacency(&elements, coords.len())?;
        Ok(Mesh {
            vertex_alive: vec![true; coords.len()],
            element_alive: vec![true; elements.len()],
            coords,
            elements,
            nn_adj,
            ne_adj,
            boundary,
        })
    }

    /// Number of vertex slots, dead ones included.
    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    /// Number of element slots, dead ones included.
    #[inline]
    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn alive_vertex_count(&self) -> usize {
        self.vertex_alive.iter().filter(|&&a| a).count()
    }

    pub fn alive_element_count(&self) -> usize {
        self.element_alive.iter().filter(|&&a| a).count()
    }

    #[inline]
    pub fn coord(&self, v: VertexId) -> Point {
        self.coords[v as usize]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    /// Moves a vertex without any validity checks.
    pub fn set_coord(&mut self, v: VertexId, p: Point) {
        self.coords[v as usize] = p;
    }

    #[inline]
    pub fn element(&self, e: ElementId) -> [VertexId; 3] {
        self.elements[e as usize]
    }

    pub fn elements(&self) -> &[[VertexId; 3]] {
        &self.elements
    }

    #[inline]
    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.nn_adj[v as usize]
    }

    #[inline]
    pub fn incident_elements(&self, v: VertexId) -> &[ElementId] {
        &self.ne_adj[v as usize]
    }

    pub fn nn_adj(&self) -> &[Vec<VertexId>] {
        &self.nn_adj
    }

    pub fn ne_adj(&self) -> &[Vec<ElementId>] {
        &self.ne_adj
    }

    #[inline]
    pub fn boundary(&self, v: VertexId) -> BoundaryTag {
        self.boundary[v as usize]
    }

    pub fn boundary_tags(&self) -> &[BoundaryTag] {
        &self.boundary
    }

    #[inline]
    pub fn is_vertex_alive(&self, v: VertexId) -> bool {
        self.vertex_alive[v as usize]
    }

    #[inline]
    pub fn is_element_alive(&self, e: ElementId) -> bool {
        self.element_alive[e as usize]
    }

    pub fn alive_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count() as VertexId).filter(|&v| self.vertex_alive[v as usize])
    }

    pub fn alive_elements(&self) -> impl Iterator<Item = ElementId> + '_ {
        (0..self.element_count() as ElementId).filter(|&e| self.element_alive[e as usize])
    }

    pub fn element_coords(&self, e: ElementId) -> [Point; 3] {
        let [a, b, c] = self.element(e);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    pub fn element_area(&self, e: ElementId) -> f64 {
        let [a, b, c] = self.element_coords(e);
        signed_area(a, b, c)
    }

    /// Sum of signed areas of all alive elements.
    pub fn total_area(&self) -> f64 {
        self.alive_elements().map(|e| self.element_area(e)).sum()
    }

    /// Alive elements containing both `a` and `b`.
    pub fn edge_elements(&self, a: VertexId, b: VertexId) -> impl Iterator<Item = ElementId> + '_ {
        self.ne_adj[a as usize]
            .iter()
            .copied()
            .filter(move |&e| self.element_alive[e as usize] && self.elements[e as usize].contains(&b))
    }

    /// Every alive edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.alive_vertices().flat_map(move |v| {
            self.nn_adj[v as usize]
                .iter()
                .copied()
                .filter(move |&w| w > v)
                .map(move |w| (v, w))
        })
    }

    /// Recomputes adjacency of the alive elements from scratch, as the
    /// incremental lists should look.
    pub fn rebuild_adjacency(&self) -> Result<Adjacency> {
        let (mut nn, mut ne) = adjacency_from(
            self.alive_elements().map(|e| (e, self.elements[e as usize])),
            self.vertex_count(),
        )?;
        // vertices that are dead must carry empty lists
        for v in 0..self.vertex_count() {
            if !self.vertex_alive[v] {
                nn[v].clear();
                ne[v].clear();
            }
        }
        Ok((nn, ne))
    }

    /// True if the incrementally maintained adjacency equals a rebuild from
    /// the alive elements.
    pub fn adjacency_matches_rebuild(&self) -> bool {
        match self.rebuild_adjacency() {
            Ok((nn, ne)) => nn == self.nn_adj && ne == self.ne_adj,
            Err(_) => false,
        }
    }

    /// Drops dead vertices and elements, renumbers the survivors in their
    /// original order and rebuilds adjacency. Returns the old-to-new vertex
    /// map so callers can compact per-vertex data alongside.
    pub fn compact(&mut self) -> Compaction {
        let mut vertex_map = vec![None; self.vertex_count()];
        let mut next = 0u32;
        for (v, slot) in vertex_map.iter_mut().enumerate() {
            if self.vertex_alive[v] {
                *slot = Some(next);
                next += 1;
            }
        }
        let keep = |v: usize| self.vertex_alive[v];
        let coords: Vec<Point> = (0..self.vertex_count()).filter(|&v| keep(v)).map(|v| self.coords[v]).collect();
        let boundary: Vec<BoundaryTag> =
            (0..self.vertex_count()).filter(|&v| keep(v)).map(|v| self.boundary[v]).collect();
        let elements: Vec<[VertexId; 3]> = self
            .alive_elements()
            .map(|e| {
                self.elements[e as usize].map(|v| vertex_map[v as usize].expect("alive element references dead vertex"))
            })
            .collect();
        let (nn_adj, ne_adj) =
            build_adjacency(&elements, coords.len()).expect("compaction produced an out-of-range id");
        *self = Mesh {
            vertex_alive: vec![true; coords.len()],
            element_alive: vec![true; elements.len()],
            coords,
            elements,
            nn_adj,
            ne_adj,
            boundary,
        };
        Compaction { vertex_map }
    }

    /// Appends fresh vertices with empty adjacency. Returns the first new id.
    pub(crate) fn reserve_vertices(&mut self, coords: &[Point], tags: &[BoundaryTag]) -> VertexId {
        let first = self.vertex_count() as VertexId;
        self.coords.extend_from_slice(coords);
        self.boundary.extend_from_slice(tags);
        self.vertex_alive.resize(self.coords.len(), true);
        self.nn_adj.resize_with(self.coords.len(), Vec::new);
        self.ne_adj.resize_with(self.coords.len(), Vec::new);
        first
    }

    /// Appends placeholder element slots, initially dead.
    pub(crate) fn reserve_elements(&mut self, count: usize) -> ElementId {
        let first = self.element_count() as ElementId;
        self.elements.resize(self.elements.len() + count, [0; 3]);
        self.element_alive.resize(self.elements.len(), false);
        first
    }
}

/// Old-to-new vertex renumbering produced by [`Mesh::compact`].
#[derive(Debug, Clone)]
pub struct Compaction {
    pub vertex_map: Vec<Option<VertexId>>,
}

impl Compaction {
    /// Keeps the entries of `data` whose vertex survived, in order.
    pub fn compact_vertex_data<T: Clone>(&self, data: &[T]) -> Vec<T> {
        data.iter()
            .zip(&self.vertex_map)
            .filter_map(|(d, m)| m.map(|_| d.clone()))
            .collect()
    }
}

/// Unit-square mesh of `(n+1)^2` vertices and `2n^2` right triangles, each
/// cell split along its rising diagonal.
pub fn structured_square_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "structured_square_mesh needs n >= 1");
    let row = n + 1;
    let id = |i: usize, j: usize| (j * row + i) as VertexId;
    let mut coords = Vec::with_capacity(row * row);
    let mut boundary = Vec::with_capacity(row * row);
    for j in 0..row {
        for i in 0..row {
            coords.push([i as f64 / n as f64, j as f64 / n as f64]);
            let mut tag = 0u8;
            if j == 0 {
                tag |= 1 << side::BOTTOM;
            }
            if i == n {
                tag |= 1 << side::RIGHT;
            }
            if j == n {
                tag |= 1 << side::TOP;
            }
            if i == 0 {
                tag |= 1 << side::LEFT;
            }
            boundary.push(BoundaryTag(tag));
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            elements.push([v00, v10, v11]);
            elements.push([v00, v11, v01]);
        }
    }
    Mesh::new(coords, elements, boundary).expect("structured mesh ids are in range")
}
