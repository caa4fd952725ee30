use std::collections::BTreeSet;

use adaptix::colouring::{colour_graph, verify_colouring};
use adaptix::mesh::{build_adjacency, structured_square_mesh};
use adaptix::metric::{
    hessian_to_metric, interpolate_metric, metric_edge_length, recover_hessian, MetricTensor,
};
use adaptix::quality::triangle_quality;
use adaptix::runtime::ThreadTeam;
use adaptix::Point;
use proptest::prelude::*;

fn spd() -> impl Strategy<Value = MetricTensor> {
    (0.01f64..100.0, 0.01f64..100.0, 0.0f64..std::f64::consts::PI)
        .prop_map(|(a, b, th)| MetricTensor::from_eigen([a, b], [[th.cos(), th.sin()], [-th.sin(), th.cos()]]))
}

fn point() -> impl Strategy<Value = Point> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| [x, y])
}

fn area2(p: &[Point; 3]) -> f64 {
    (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])
}

/// Counter-clockwise triangles that are not too flat.
fn triangle() -> impl Strategy<Value = [Point; 3]> {
    (point(), point(), point())
        .prop_map(|(a, b, c)| [a, b, c])
        .prop_filter("degenerate", |p| area2(p).abs() > 1e-3)
        .prop_map(|p| if area2(&p) > 0.0 { p } else { [p[0], p[2], p[1]] })
}

proptest! {
    #[test]
    fn metric_eigenvalues_are_clamped(
        h00 in -1e6f64..1e6, h01 in -1e6f64..1e6, h11 in -1e6f64..1e6,
        eta in 1e-4f64..1.0, h_min in 1e-4f64..0.1, ratio in 1.0f64..1e3,
    ) {
        let h_max = h_min * ratio;
        let m = hessian_to_metric(&MetricTensor::new(h00, h01, h11), eta, h_min, h_max);
        let e = m.eigen();
        for l in e.values {
            prop_assert!(l >= (1.0 / (h_max * h_max)) * (1.0 - 1e-9));
            prop_assert!(l <= (1.0 / (h_min * h_min)) * (1.0 + 1e-9));
        }
        prop_assert!(m.is_positive_definite());
    }

    #[test]
    fn edge_length_is_symmetric_and_linear(p in point(), q in point(), a in spd(), b in spd(), s in 0.01f64..100.0) {
        let l = metric_edge_length(p, q, &a, &b);
        prop_assert!((l - metric_edge_length(q, p, &b, &a)).abs() <= 1e-12 * l.max(1.0));
        let qs = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
        prop_assert!((metric_edge_length(p, qs, &a, &b) - s * l).abs() <= 1e-9 * (s * l).max(1.0));
    }

    #[test]
    fn interpolation_stays_positive_definite(a in spd(), b in spd(), s in 0.0f64..=1.0) {
        prop_assert!(interpolate_metric(&a, &b, s).is_positive_definite());
    }

    #[test]
    fn quality_is_in_unit_range(p in triangle(), a in spd(), b in spd(), c in spd()) {
        let q = triangle_quality(p, [&a, &b, &c]).unwrap().value();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn quality_is_invariant_under_rigid_motion(p in triangle(), th in 0.0f64..6.3, d in point()) {
        let id = MetricTensor::IDENTITY;
        let q0 = triangle_quality(p, [&id, &id, &id]).unwrap().value();
        let (c, s) = (th.cos(), th.sin());
        let moved = p.map(|v| [c * v[0] - s * v[1] + d[0], s * v[0] + c * v[1] + d[1]]);
        let q1 = triangle_quality(moved, [&id, &id, &id]).unwrap().value();
        prop_assert!((q0 - q1).abs() <= 1e-10);
    }

    #[test]
    fn quality_is_invariant_under_joint_scaling(p in triangle(), a in spd(), b in spd(), c in spd(), s in 0.05f64..20.0) {
        let q0 = triangle_quality(p, [&a, &b, &c]).unwrap().value();
        let scaled = p.map(|v| [s * v[0], s * v[1]]);
        let k = 1.0 / (s * s);
        let q1 = triangle_quality(scaled, [&a.scaled(k), &b.scaled(k), &c.scaled(k)]).unwrap().value();
        prop_assert!((q0 - q1).abs() <= 1e-10);
    }

    #[test]
    fn quadratics_are_recovered_exactly(c in prop::array::uniform6(-5.0f64..5.0)) {
        let mesh = structured_square_mesh(6);
        let values: Vec<f64> = mesh
            .coords()
            .iter()
            .map(|p| c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1])
            .collect();
        let rec = recover_hessian(&mesh, &values);
        prop_assert_eq!(rec.deficient, 0);
        for h in &rec.hessians {
            prop_assert!((h.m00 - 2.0 * c[3]).abs() < 1e-8);
            prop_assert!((h.m01 - c[4]).abs() < 1e-8);
            prop_assert!((h.m11 - 2.0 * c[5]).abs() < 1e-8);
        }
    }

    #[test]
    fn adjacency_matches_brute_force(n in 1usize..7, keep in prop::collection::vec(any::<bool>(), 72)) {
        let full = structured_square_mesh(n);
        let elements: Vec<[u32; 3]> = full.elements().iter().zip(&keep).filter(|(_, &k)| k).map(|(e, _)| *e).collect();
        let nv = full.vertex_count();
        let (nn, ne) = build_adjacency(&elements, nv).unwrap();
        for v in 0..nv as u32 {
            let mut want_nn = BTreeSet::new();
            let mut want_ne = BTreeSet::new();
            for (e, t) in elements.iter().enumerate() {
                if t.contains(&v) {
                    want_ne.insert(e as u32);
                    want_nn.extend(t.iter().copied().filter(|&w| w != v));
                }
            }
            prop_assert_eq!(&nn[v as usize], &want_nn.into_iter().collect::<Vec<_>>());
            prop_assert_eq!(&ne[v as usize], &want_ne.into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn colourings_of_random_graphs_are_valid(
        edges in prop::collection::vec((0u32..300, 0u32..300), 0..3000),
        threads in 1usize..6,
    ) {
        let mut adj = vec![BTreeSet::new(); 300];
        for (a, b) in edges {
            if a != b {
                adj[a as usize].insert(b);
                adj[b as usize].insert(a);
            }
        }
        let adj: Vec<Vec<u32>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
        let active: Vec<u32> = (0..300).collect();
        let team = ThreadTeam::new(threads).unwrap();
        let c = colour_graph(&team, &adj, &active).unwrap();
        prop_assert!(verify_colouring(&adj, &c));
        let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0);
        prop_assert!(c.num_colours <= max_degree + 1);
    }
}
