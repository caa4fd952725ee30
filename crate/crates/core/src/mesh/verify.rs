use std::collections::HashMap;
use std::fmt;

use super::{adjacency_from, orient, Mesh};
use crate::{ElementId, VertexId};

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    VertexOutOfRange { element: ElementId, vertex: VertexId },
    DeadVertexInElement { element: ElementId, vertex: VertexId },
    DegenerateElement { element: ElementId },
    NonPositiveArea { element: ElementId, area: f64 },
    /// `nn_adj` or `ne_adj` of the vertex differs from a rebuild.
    AdjacencyMismatch { vertex: VertexId },
    /// Edge used by more than two elements.
    OverSharedEdge { edge: (VertexId, VertexId), count: usize },
    /// Edge used by one element whose endpoints are not on a common boundary
    /// segment: a hole or a hanging node.
    OpenEdge { edge: (VertexId, VertexId) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexOutOfRange { element, vertex } => {
                write!(f, "element {element} references out-of-range vertex {vertex}")
            }
            Violation::DeadVertexInElement { element, vertex } => {
                write!(f, "element {element} references dead vertex {vertex}")
            }
            Violation::DegenerateElement { element } => write!(f, "element {element} repeats a vertex"),
            Violation::NonPositiveArea { element, area } => {
                write!(f, "element {element} has signed area {area:e}")
            }
            Violation::AdjacencyMismatch { vertex } => {
                write!(f, "adjacency of vertex {vertex} disagrees with the element list")
            }
            Violation::OverSharedEdge { edge, count } => {
                write!(f, "edge {edge:?} is shared by {count} elements")
            }
            Violation::OpenEdge { edge } => write!(f, "interior edge {edge:?} has only one element"),
        }
    }
}

/// Findings of [`verify`]; empty iff the mesh is conforming.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConformityReport {
    pub violations: Vec<Violation>,
}

impl ConformityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ConformityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "conforming");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(8) {
            write!(f, "; {v}")?;
        }
        if self.violations.len() > 8 {
            write!(f, "; ...")?;
        }
        Ok(())
    }
}

/// Checks every structural invariant of the mesh.
pub fn verify(mesh: &Mesh) -> ConformityReport {
    let mut violations = Vec::new();
    let nv = mesh.vertex_count();
    let mut edge_count: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    let mut usable = Vec::new();

    for e in mesh.alive_elements() {
        let tri = mesh.element(e);
        if let Some(&v) = tri.iter().find(|&&v| v as usize >= nv) {
            violations.push(Violation::VertexOutOfRange { element: e, vertex: v });
            continue;
        }
        usable.push((e, tri));
        for &v in &tri {
            if !mesh.is_vertex_alive(v) {
                violations.push(Violation::DeadVertexInElement { element: e, vertex: v });
            }
        }
        let [a, b, c] = tri;
        if a == b || b == c || a == c {
            violations.push(Violation::DegenerateElement { element: e });
            continue;
        }
        let area = 0.5 * orient(mesh.coord(a), mesh.coord(b), mesh.coord(c));
        if !(area > 0.0) {
            violations.push(Violation::NonPositiveArea { element: e, area });
        }
        for (p, q) in [(a, b), (b, c), (c, a)] {
            *edge_count.entry((p.min(q), p.max(q))).or_default() += 1;
        }
    }

    let mut edges: Vec<_> = edge_count.into_iter().collect();
    edges.sort_unstable();
    for ((a, b), count) in edges {
        if count > 2 {
            violations.push(Violation::OverSharedEdge { edge: (a, b), count });
        } else if count == 1 && mesh.boundary(a).shared(mesh.boundary(b)).is_interior() {
            violations.push(Violation::OpenEdge { edge: (a, b) });
        }
    }

    let (nn, ne) = adjacency_from(usable.into_iter(), nv).expect("ids were range-checked");
    for v in 0..nv {
        let (expect_nn, expect_ne): (&[VertexId], &[ElementId]) = if mesh.vertex_alive[v] {
            (&nn[v], &ne[v])
        } else {
            (&[], &[])
        };
        if mesh.nn_adj[v] != expect_nn || mesh.ne_adj[v] != expect_ne {
            violations.push(Violation::AdjacencyMismatch { vertex: v as VertexId });
        }
    }

    ConformityReport { violations }
}
