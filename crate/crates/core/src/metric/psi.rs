use std::f64::consts::{FRAC_PI_2, PI};

/// Time-dependent synthetic solution with a multi-scale oscillation and a
/// moving shock front:
///
/// `psi = 0.1 sin(50x + 2 pi t/T) + atan(-0.1 / (2x - sin(5y + 2 pi t/T)))`
///
/// The arctangent is the single-argument one. Where its denominator is
/// exactly zero the term takes its one-sided limit `-pi/2` (the numerator is
/// negative).
pub fn eval_psi(x: f64, y: f64, t: f64, period: f64) -> f64 {
    let phase = 2.0 * PI * t / period;
    let den = 2.0 * x - (5.0 * y + phase).sin();
    let front = if den == 0.0 { -FRAC_PI_2 } else { (-0.1 / den).atan() };
    0.1 * (50.0 * x + phase).sin() + front
}

/// The synthetic field frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticField {
    pub period: f64,
    pub t: f64,
}

impl SyntheticField {
    pub fn new(period: f64, t: f64) -> Self {
        assert!(period > 0.0, "period must be positive");
        SyntheticField { period, t }
    }

    #[inline]
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        eval_psi(p[0], p[1], self.t, self.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_term_with_vanishing_front_argument() {
        // y = 0, t = 0: sin(5y) = 0 so den = 2x = 1 at x = 0.5
        let v = eval_psi(0.5, 0.0, 0.0, 1.0);
        let expected = 0.1 * 25f64.sin() + (-0.1f64).atan();
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_denominator_takes_negative_limit() {
        // x = 0, y = 0, t = 0 gives den = 0 exactly
        let v = eval_psi(0.0, 0.0, 0.0, 1.0);
        assert_eq!(v, -FRAC_PI_2);
        // and the one-sided limit from den -> 0+ agrees
        let near = eval_psi(1e-14, 0.0, 0.0, 1.0);
        assert!((near - v).abs() < 1e-12);
    }

    #[test]
    fn periodic_in_time() {
        let a = eval_psi(0.3, 0.7, 0.25, 2.0);
        let b = eval_psi(0.3, 0.7, 2.25, 2.0);
        assert!((a - b).abs() < 1e-12);
    }
}
