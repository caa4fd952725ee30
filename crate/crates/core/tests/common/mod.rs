//! Loaders for the oracle outputs in `tests/data`. Regenerate them with the
//! scripts in `tests/oracles`.
#![allow(dead_code)]

use adaptix::metric::MetricTensor;
use adaptix::Point;

fn rows(text: &'static str) -> impl Iterator<Item = Vec<&'static str>> {
    text.lines().skip(1).filter(|l| !l.trim().is_empty()).map(|l| l.split(',').collect())
}

fn num(s: &str) -> f64 {
    s.trim().parse().unwrap_or_else(|_| panic!("bad number {s:?}"))
}

pub struct QualityCase {
    pub name: &'static str,
    pub p: [Point; 3],
    pub m: [MetricTensor; 3],
    pub q: f64,
}

pub fn quality_goldens() -> Vec<QualityCase> {
    rows(include_str!("../data/quality_goldens.csv"))
        .map(|r| {
            let v: Vec<f64> = r[1..].iter().map(|s| num(s)).collect();
            QualityCase {
                name: r[0],
                p: [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]],
                m: std::array::from_fn(|k| MetricTensor::new(v[6 + 3 * k], v[7 + 3 * k], v[8 + 3 * k])),
                q: v[15],
            }
        })
        .collect()
}

pub struct PsiCase {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub period: f64,
    pub psi: f64,
}

pub fn psi_goldens() -> Vec<PsiCase> {
    rows(include_str!("../data/psi_goldens.csv"))
        .map(|r| PsiCase {
            x: num(r[0]),
            y: num(r[1]),
            t: num(r[2]),
            period: num(r[3]),
            psi: num(r[4]),
        })
        .collect()
}

pub struct HessianCase {
    pub n: usize,
    pub field: &'static str,
    pub i: usize,
    pub j: usize,
    pub h: [f64; 3],
}

pub fn hessian_goldens() -> Vec<HessianCase> {
    rows(include_str!("../data/hessian_goldens.csv"))
        .map(|r| HessianCase {
            n: r[0].parse().unwrap(),
            field: r[1],
            i: r[2].parse().unwrap(),
            j: r[3].parse().unwrap(),
            h: [num(r[4]), num(r[5]), num(r[6])],
        })
        .collect()
}

pub fn field(name: &str, p: Point) -> f64 {
    let (x, y) = (p[0], p[1]);
    match name {
        "x3" => x * x * x,
        "x2y" => x * x * y,
        "exp_xy" => (x * y).exp(),
        _ => panic!("unknown field {name}"),
    }
}
