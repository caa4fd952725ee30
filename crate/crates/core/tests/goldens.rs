mod common;

use adaptix::mesh::structured_square_mesh;
use adaptix::metric::{eval_psi, recover_hessian};
use adaptix::quality::triangle_quality;

#[test]
fn quality_matches_oracle() {
    let cases = common::quality_goldens();
    assert_eq!(cases.len(), 25);
    assert!(cases.iter().any(|c| c.q == 1.0));
    for c in &cases {
        let q = triangle_quality(c.p, [&c.m[0], &c.m[1], &c.m[2]]).unwrap().value();
        assert!((q - c.q).abs() <= 1e-10, "{}: {q} vs {}", c.name, c.q);
    }
}

#[test]
fn right_triangle_golden_is_in_the_expected_region() {
    let c = common::quality_goldens().into_iter().find(|c| c.name == "right_identity").unwrap();
    assert!((0.8..0.9).contains(&c.q));
}

#[test]
fn psi_matches_oracle() {
    for c in common::psi_goldens() {
        let v = eval_psi(c.x, c.y, c.t, c.period);
        assert!((v - c.psi).abs() <= 1e-13, "psi({}, {}, {}) = {v}, expected {}", c.x, c.y, c.t, c.psi);
    }
}

#[test]
fn hessian_matches_normal_equation_oracle() {
    for c in common::hessian_goldens() {
        let mesh = structured_square_mesh(c.n);
        let values: Vec<f64> = mesh.coords().iter().map(|&p| common::field(c.field, p)).collect();
        let rec = recover_hessian(&mesh, &values);
        let h = rec.hessians[c.j * (c.n + 1) + c.i];
        let got = [h.m00, h.m01, h.m11];
        for k in 0..3 {
            assert!(
                (got[k] - c.h[k]).abs() <= 1e-8,
                "{} at ({}, {}): {got:?} vs {:?}",
                c.field,
                c.i,
                c.j,
                c.h
            );
        }
    }
}
