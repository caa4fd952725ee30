//! Raw shared access to mesh storage during a colour round.
//!
//! A round is only race-free because of how work is partitioned: each kernel
//! invocation writes the lists and coordinates of the vertex it owns and the
//! elements in that vertex's cavity, while every other adjacency change goes
//! through the deferred ledger and is applied by the single owning thread.
//! The borrow checker cannot see that partition, so these types hand out
//! unsynchronised access and constructing one is `unsafe`.

use std::marker::PhantomData;

use super::{BoundaryTag, Mesh};
use crate::{ElementId, Point, VertexId};

pub(crate) struct SharedSlice<'a, T> {
    ptr: *mut T,
    len: usize,
    _borrow: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for SharedSlice<'_, T> {}
unsafe impl<T: Send + Sync> Sync for SharedSlice<'_, T> {}

impl<'a, T> SharedSlice<'a, T> {
    /// # Safety
    /// While the returned value lives, no index may be written by one thread
    /// while another thread reads or writes it.
    pub(crate) unsafe fn new(data: &'a mut [T]) -> Self {
        SharedSlice {
            ptr: data.as_mut_ptr(),
            len: data.len(),
            _borrow: PhantomData,
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> &T {
        assert!(i < self.len);
        unsafe { &*self.ptr.add(i) }
    }

    #[allow(clippy::mut_from_ref)]
    #[inline]
    pub(crate) fn get_mut(&self, i: usize) -> &mut T {
        assert!(i < self.len);
        unsafe { &mut *self.ptr.add(i) }
    }
}

impl<T: Copy> SharedSlice<'_, T> {
    #[inline]
    pub(crate) fn read(&self, i: usize) -> T {
        *self.get(i)
    }

    #[inline]
    pub(crate) fn write(&self, i: usize, value: T) {
        *self.get_mut(i) = value;
    }
}

pub(crate) struct MeshView<'a> {
    pub coords: SharedSlice<'a, Point>,
    pub elements: SharedSlice<'a, [VertexId; 3]>,
    pub nn: SharedSlice<'a, Vec<VertexId>>,
    pub ne: SharedSlice<'a, Vec<ElementId>>,
    pub boundary: &'a [BoundaryTag],
    pub vertex_alive: SharedSlice<'a, bool>,
    pub element_alive: SharedSlice<'a, bool>,
}

impl<'a> MeshView<'a> {
    /// # Safety
    /// Callers must follow the colour-round ownership contract described in
    /// the module documentation for as long as the view is alive.
    pub(crate) unsafe fn new(mesh: &'a mut Mesh) -> Self {
        MeshView {
            coords: SharedSlice::new(&mut mesh.coords),
            elements: SharedSlice::new(&mut mesh.elements),
            nn: SharedSlice::new(&mut mesh.nn_adj),
            ne: SharedSlice::new(&mut mesh.ne_adj),
            boundary: &mesh.boundary,
            vertex_alive: SharedSlice::new(&mut mesh.vertex_alive),
            element_alive: SharedSlice::new(&mut mesh.element_alive),
        }
    }

    #[inline]
    pub fn coord(&self, v: VertexId) -> Point {
        self.coords.read(v as usize)
    }

    #[inline]
    pub fn element(&self, e: ElementId) -> [VertexId; 3] {
        self.elements.read(e as usize)
    }

    #[inline]
    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        self.nn.get(v as usize)
    }

    #[inline]
    pub fn incident(&self, v: VertexId) -> &[ElementId] {
        self.ne.get(v as usize)
    }

    #[inline]
    pub fn boundary(&self, v: VertexId) -> BoundaryTag {
        self.boundary[v as usize]
    }

    #[inline]
    pub fn vertex_alive(&self, v: VertexId) -> bool {
        self.vertex_alive.read(v as usize)
    }

    #[inline]
    pub fn element_alive(&self, e: ElementId) -> bool {
        self.element_alive.read(e as usize)
    }

    /// Alive elements around `a` that also contain `b`.
    pub fn edge_elements(&self, a: VertexId, b: VertexId) -> impl Iterator<Item = ElementId> + '_ {
        self.incident(a)
            .iter()
            .copied()
            .filter(move |&e| self.element_alive(e) && self.element(e).contains(&b))
    }
}
