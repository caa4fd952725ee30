use adaptix::bench::{build_metric, edge_band_fraction, BAND};
use adaptix::kernels::{adapt, coarsen, refine, smooth, swap, Checks, KernelParams};
use adaptix::mesh::{collapse_edge, structured_square_mesh, verify, BoundaryTag, CollapseLimits, KernelOutcome, Mesh};
use adaptix::metric::{MetricField, MetricTensor, SyntheticField};
use adaptix::quality::QualityStats;
use adaptix::runtime::{DeferredLedger, ThreadTeam};

fn checked() -> KernelParams {
    KernelParams {
        checks: Checks::Rounds,
        ..KernelParams::default()
    }
}

fn hexagon() -> Mesh {
    let mut coords = vec![[0.0, 0.0]];
    for k in 0..6 {
        let a = std::f64::consts::PI / 3.0 * k as f64;
        coords.push([a.cos(), a.sin()]);
    }
    let elements = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    let mut boundary = vec![BoundaryTag::INTERIOR];
    boundary.extend((0..6u8).map(|k| BoundaryTag((1 << k) | (1 << ((k + 5) % 6)))));
    Mesh::new(coords, elements, boundary).unwrap()
}

#[test]
fn hexagon_centre_collapse_by_hand() {
    let team = ThreadTeam::new(1).unwrap();
    let mut mesh = hexagon();
    let field = MetricField::new(vec![MetricTensor::IDENTITY; 7], 1.0, 1e-3, 10.0);
    let mut ledger = DeferredLedger::new(&team);
    let limits = CollapseLimits {
        l_up: 10.0,
        quality_floor: 0.0,
    };
    assert_eq!(collapse_edge(&mut mesh, &field, 0, 1, &limits, &mut ledger), KernelOutcome::Applied);
    ledger.commit(&team, &mut mesh);

    // elements (0,1,2) and (0,6,1) go, the other four now fan out of vertex 1
    assert_eq!(mesh.alive_element_count(), 4);
    assert!(!mesh.is_element_alive(0) && !mesh.is_element_alive(5));
    for e in 1..5 {
        assert!(mesh.element(e).contains(&1));
        assert!(!mesh.element(e).contains(&0));
    }
    assert!(!mesh.is_vertex_alive(0));
    assert_eq!(mesh.neighbours(1), &[2, 3, 4, 5, 6]);
    assert_eq!(mesh.incident_elements(1), &[1, 2, 3, 4]);
    assert!(verify(&mesh).is_empty());
    assert!(mesh.adjacency_matches_rebuild());
}

#[test]
fn collapse_rejections() {
    let team = ThreadTeam::new(1).unwrap();
    let field = MetricField::new(vec![MetricTensor::IDENTITY; 7], 1.0, 1e-3, 10.0);
    let mut ledger = DeferredLedger::new(&team);
    let loose = CollapseLimits {
        l_up: 10.0,
        quality_floor: 0.0,
    };
    let mut mesh = hexagon();
    // boundary vertex 1 may not leave its side towards the centre
    assert_eq!(collapse_edge(&mut mesh, &field, 1, 0, &loose, &mut ledger), KernelOutcome::BoundaryViolation);
    // new edges of length 2 exceed a tight bound
    let tight = CollapseLimits { l_up: 1.5, ..loose };
    assert_eq!(collapse_edge(&mut mesh, &field, 0, 1, &tight, &mut ledger), KernelOutcome::EdgeTooLong);
    assert_eq!(collapse_edge(&mut mesh, &field, 2, 5, &loose, &mut ledger), KernelOutcome::NotAnEdge);
    assert!(ledger.is_empty());
    assert_eq!(mesh, hexagon());
}

#[test]
fn short_edges_coarsen_monotonically() {
    for threads in [1, 4] {
        let team = ThreadTeam::new(threads).unwrap();
        let mut mesh = structured_square_mesh(20);
        // axis edges of 0.05 have metric length 0.4
        let mut field = MetricField::uniform(mesh.vertex_count(), 0.125, 1e-3, 1.0, 1.0);
        let mut last = mesh.alive_element_count();
        for _ in 0..3 {
            let c = coarsen(&team, &mut mesh, &field, &checked()).unwrap();
            let now = mesh.alive_element_count();
            assert!(now <= last);
            if c.applied == 0 {
                break;
            }
            assert!(now < last);
            last = now;
            let map = mesh.compact();
            field.tensors = map.compact_vertex_data(&field.tensors);
        }
        assert!(last < 800);
        assert!(verify(&mesh).is_empty());
        assert!((mesh.total_area() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn adapt_to_psi_terminates_conforming() {
    let team = ThreadTeam::new(4).unwrap();
    let mut mesh = structured_square_mesh(50);
    let mut field = build_metric(&team, &mesh, &SyntheticField::new(50.0, 0.0), 0.05, 5e-3, 0.5);
    let params = KernelParams {
        checks: Checks::Phases,
        ..KernelParams::default()
    };
    let r = adapt(&team, &mut mesh, &mut field, &params).unwrap();
    assert!(r.iterations <= params.max_iterations);
    assert!(r.converged, "{} iterations", r.iterations);
    assert!(verify(&mesh).is_empty());
    assert_eq!(r.ownership_violations(), 0);
    assert!(edge_band_fraction(&mesh, &field, BAND.0, BAND.1) > 0.85);
    assert!((mesh.total_area() - 1.0).abs() < 1e-9);
}

#[test]
fn coarse_constant_metric_coarsens_a_fine_mesh() {
    let team = ThreadTeam::new(2).unwrap();
    let mut mesh = structured_square_mesh(100);
    let before = mesh.alive_element_count();
    let mut field = MetricField::uniform(mesh.vertex_count(), 0.5, 1e-3, 0.5, 1.0);
    let r = adapt(&team, &mut mesh, &mut field, &KernelParams::default()).unwrap();
    assert!(r.elements < before / 100, "{} elements", r.elements);
    assert!(verify(&mesh).is_empty());
}

#[test]
fn phases_compose_conformingly_on_a_jittered_mesh() {
    let team = ThreadTeam::new(3).unwrap();
    let config = adaptix::bench::BenchConfig {
        n: 30,
        jitter: 0.3,
        seed: 7,
        ..adaptix::bench::BenchConfig::desk(3, 1)
    };
    let mut mesh = adaptix::bench::initial_mesh(&config);
    assert!(verify(&mesh).is_empty());
    let mut field = build_metric(&team, &mesh, &SyntheticField::new(1.0, 0.3), 0.05, 5e-3, 0.5);
    let p = checked();
    let q0 = QualityStats::of(&mesh, &field);
    refine(&team, &mut mesh, &mut field, &p).unwrap();
    let s = swap(&team, &mut mesh, &field, &p).unwrap();
    assert_eq!(s.ownership_violations, 0);
    coarsen(&team, &mut mesh, &field, &p).unwrap();
    let map = mesh.compact();
    field.tensors = map.compact_vertex_data(&field.tensors);
    let before_smooth = QualityStats::of(&mesh, &field);
    smooth(&team, &mut mesh, &field, &p).unwrap();
    let after = QualityStats::of(&mesh, &field);
    assert!(after.min >= before_smooth.min - 1e-12);
    assert!(after.mean > q0.mean);
    assert!(verify(&mesh).is_empty());
    assert!(mesh.adjacency_matches_rebuild());
}

#[test]
fn one_thread_runs_are_reproducible() {
    let run = || {
        let team = ThreadTeam::new(1).unwrap();
        let mut mesh = structured_square_mesh(30);
        let mut field = build_metric(&team, &mesh, &SyntheticField::new(10.0, 2.0), 0.05, 5e-3, 0.5);
        adapt(&team, &mut mesh, &mut field, &KernelParams::default()).unwrap();
        mesh
    };
    assert_eq!(run(), run());
}
