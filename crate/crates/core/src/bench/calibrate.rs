//! Choosing `eta` for a requested steady-state element count.
//!
//! The element count of an adapted mesh scales roughly like `1/eta` (the
//! metric is proportional to `1/eta` and the count to the integral of
//! `sqrt(det M)`), except where the size bounds clamp. The search therefore
//! keeps a bracket in log space, steps by that scaling law while it stays
//! inside the bracket, and falls back to geometric bisection otherwise.

use super::{build_metric, initial_mesh, BenchConfig};
use crate::error::Result;
use crate::kernels::adapt;
use crate::metric::SyntheticField;
use crate::runtime::ThreadTeam;

/// Adapt passes at `t = 0` used to estimate the steady state for one `eta`.
pub const CALIBRATION_PASSES: usize = 3;
/// Accepted relative deviation from the target.
pub const CALIBRATION_TOLERANCE: f64 = 0.10;
const MAX_EVALUATIONS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub target: usize,
    pub eta: f64,
    /// Steady-state estimate at the chosen `eta`.
    pub elements: usize,
    /// `eta` values tried, with their element counts.
    pub history: Vec<(f64, usize)>,
    pub passes: usize,
    pub converged: bool,
}

fn steady_state(team: &ThreadTeam, config: &BenchConfig, eta: f64) -> Result<usize> {
    let mut mesh = initial_mesh(config);
    let field = SyntheticField::new(config.period(), 0.0);
    let mut elements = mesh.alive_element_count();
    for _ in 0..CALIBRATION_PASSES {
        let mut metric = build_metric(team, &mesh, &field, eta, config.h_min, config.h_max);
        elements = adapt(team, &mut mesh, &mut metric, &config.kernel)?.elements;
    }
    Ok(elements)
}

pub fn calibrate_eta(team: &ThreadTeam, config: &BenchConfig, target: usize) -> Result<Calibration> {
    let target_f = target as f64;
    let mut eta = config.eta;
    // eta_lo yields too many elements, eta_hi too few
    let (mut lo, mut hi): (Option<f64>, Option<f64>) = (None, None);
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, eta, 0usize);

    for _ in 0..MAX_EVALUATIONS {
        let elements = steady_state(team, config, eta)?;
        history.push((eta, elements));
        let err = (elements as f64 - target_f).abs() / target_f;
        if err < best.0 {
            best = (err, eta, elements);
        }
        if err <= CALIBRATION_TOLERANCE {
            break;
        }
        if elements as f64 > target_f {
            lo = Some(eta);
        } else {
            hi = Some(eta);
        }
        let guess = eta * (elements.max(1) as f64 / target_f).clamp(1.0 / 16.0, 16.0);
        eta = match (lo, hi) {
            (Some(l), Some(h)) if !(guess > l && guess < h) => (l * h).sqrt(),
            _ => guess,
        };
    }
    Ok(Calibration {
        target,
        eta: best.1,
        elements: best.2,
        passes: history.len(),
        converged: best.0 <= CALIBRATION_TOLERANCE,
        history,
    })
}
