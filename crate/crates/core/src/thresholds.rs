//! Closed-form threshold functions and numeric conversion chains.
//!
//! Everything here is a pure scalar function. Inverse functions are solved by
//! bracketed bisection on intervals where monotonicity is known, never by
//! derivative methods.

use crate::numeric::bisect;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("argument out of range: {0}")]
    OutOfRange(&'static str),
    #[error("argument outside the validity domain: {0}")]
    OutOfDomain(&'static str),
}

/// Checked query record for the roundness-vs-threshold comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdQuery {
    pub arc_length: f64,
    pub angle: f64,
    pub roundness: Option<f64>,
}

impl ThresholdQuery {
    pub fn new(arc_length: f64, angle: f64, roundness: Option<f64>) -> Result<Self, ThresholdError> {
        if !(arc_length > 0.0) {
            return Err(ThresholdError::OutOfRange("arc length must be positive"));
        }
        if !(angle > 0.0 && angle <= FRAC_PI_2) {
            return Err(ThresholdError::OutOfRange("angle must lie in (0, pi/2]"));
        }
        Ok(Self { arc_length, angle, roundness })
    }

    /// `Some(true)` when the recorded roundness is strictly below the
    /// angle-bound threshold, `None` when no roundness was supplied.
    pub fn below_threshold(&self) -> Option<bool> {
        let t = r_l(self.angle, self.arc_length).ok()?;
        self.roundness.map(|x| x < t)
    }
}

/// Decay profile `h(t) = acos(tanh t)`, strictly decreasing from `pi` to `0`
/// with `h(0) = pi/2`.
pub fn hill(t: f64) -> f64 {
    t.tanh().acos()
}

/// `h'(t) = -sech(t) = -sin(h(t))`.
pub fn hill_prime(t: f64) -> f64 {
    -1.0 / t.cosh()
}

/// `u_L(x) = h(x) - L h'(x)`; strictly decreasing with image `(0, pi)` when
/// `L <= 1`.
pub fn u_l(x: f64, arc_length: f64) -> f64 {
    hill(x) - arc_length * hill_prime(x)
}

/// Unique solution of `u_L(a) = angle` for `L <= 1`.
pub fn a_l(angle: f64, arc_length: f64) -> Result<f64, ThresholdError> {
    if !(arc_length > 0.0 && arc_length <= 1.0) {
        return Err(ThresholdError::OutOfRange("arc length must lie in (0, 1]"));
    }
    if !(angle > 0.0 && angle < PI) {
        return Err(ThresholdError::OutOfRange("angle must lie in (0, pi)"));
    }
    // u_L is strictly decreasing; expand a bracket until it straddles.
    let f = |x: f64| u_l(x, arc_length) - angle;
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..80 {
        if f(lo) > 0.0 {
            break;
        }
        lo *= 2.0;
    }
    for _ in 0..80 {
        if f(hi) < 0.0 {
            break;
        }
        hi *= 2.0;
    }
    if !(f(lo) > 0.0 && f(hi) < 0.0) {
        return Err(ThresholdError::OutOfRange("angle too close to the image endpoints"));
    }
    bisect(f, lo, hi, 1e-13).ok_or(ThresholdError::OutOfRange("bisection failed"))
}

/// Roundness bound below which a lamination is angle-bounded:
/// `L sech(a_L(angle))` for `L <= 1`, `L sech(L + atanh(cos angle))` for `L > 1`.
pub fn r_l(angle: f64, arc_length: f64) -> Result<f64, ThresholdError> {
    if !(angle > 0.0 && angle <= FRAC_PI_2) {
        return Err(ThresholdError::OutOfRange("angle must lie in (0, pi/2]"));
    }
    if !(arc_length > 0.0) {
        return Err(ThresholdError::OutOfRange("arc length must be positive"));
    }
    if arc_length <= 1.0 {
        let a = a_l(angle, arc_length)?;
        Ok(arc_length / a.cosh())
    } else {
        let shift = arc_length + angle.cos().atanh();
        Ok(arc_length / shift.cosh())
    }
}

/// The right-angle threshold `r(L) = r_L(pi/2)`: the inverse of `x sec x` on
/// `(0, 1]` and `L sech L` beyond.
pub fn r(arc_length: f64) -> f64 {
    r_l(FRAC_PI_2, arc_length).expect("pi/2 is always in range")
}

/// Universal roundness upper bound `2 acos(-sinh(L/2))`, valid while
/// `sinh(L/2) <= 1`.
pub fn bcy_upper_bound(arc_length: f64) -> Result<f64, ThresholdError> {
    let s = (arc_length / 2.0).sinh();
    if s > 1.0 {
        return Err(ThresholdError::OutOfDomain("sinh(L/2) exceeds 1"));
    }
    Ok(2.0 * (-s).acos())
}

/// Roundness of the bending lamination of the pleated plane over a piecewise
/// geodesic inscribed in a horocycle with edge length `L`:
/// `2 asin(tanh(L/2))`.
pub fn horocycle_roundness(arc_length: f64) -> f64 {
    2.0 * (arc_length / 2.0).tanh().asin()
}

fn schwarzian_domain_limit(arc_length: f64) -> f64 {
    0.5 / (1.0 + (2.0 * arc_length).exp()).sqrt()
}

/// Roundness bound from a Schwarzian-derivative norm:
/// `F_L(n) = 2 atan(2 n e^L / sqrt(1 - 4 n^2))`, valid for
/// `n < 1 / (2 sqrt(1 + e^(2L)))`.
pub fn schwarzian_to_roundness(phi_norm: f64, arc_length: f64) -> Result<f64, ThresholdError> {
    if phi_norm < 0.0 {
        return Err(ThresholdError::OutOfRange("norm must be nonnegative"));
    }
    if phi_norm >= schwarzian_domain_limit(arc_length) {
        return Err(ThresholdError::OutOfDomain("norm outside the validity bound"));
    }
    let num = 2.0 * phi_norm * arc_length.exp();
    Ok(2.0 * (num / (1.0 - 4.0 * phi_norm * phi_norm).sqrt()).atan())
}

/// Largest Schwarzian norm certified below a target roundness `r` in
/// `(0, r(1)]`: solves `F_{L(r)}(x) = r` with `L(r) = r / cos r`.
pub fn schwarzian_threshold(target: f64) -> Result<f64, ThresholdError> {
    let r1 = r(1.0);
    if !(target > 0.0 && target <= r1 + 1e-12) {
        return Err(ThresholdError::OutOfRange("target must lie in (0, r(1)]"));
    }
    let arc_length = target / target.cos();
    let hi = schwarzian_domain_limit(arc_length) * (1.0 - 1e-12);
    let f = |x: f64| schwarzian_to_roundness(x, arc_length).unwrap_or(PI) - target;
    bisect(f, 0.0, hi, 1e-14).ok_or(ThresholdError::OutOfRange("no root in the domain"))
}

/// Guarantee status of a conclusion derived from the numeric chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GuaranteeFlag {
    PaperGuaranteed,
    Unknown,
}

/// Verdict record combining the quasicircle, Teichmuller-distance and
/// Schwarzian-norm criteria.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalBoundsReport {
    pub schwarzian_norm: Option<f64>,
    pub teich_distance: Option<f64>,
    pub quasicircle_k: Option<f64>,
    /// Schwarzian norm implied by the strongest supplied input.
    pub derived_schwarzian: Option<f64>,
    pub not_critical_entropy: GuaranteeFlag,
    pub proper_affine_action: GuaranteeFlag,
    pub warnings: Vec<String>,
}

/// Schwarzian-norm threshold certified by the numeric chain.
pub const SCHWARZIAN_GUARANTEE: f64 = 0.0739;
/// Teichmuller-distance threshold.
pub const TEICH_GUARANTEE: f64 = 0.049;

/// Quasicircle threshold `e^0.049`.
pub fn quasicircle_guarantee() -> f64 {
    TEICH_GUARANTEE.exp()
}

/// Applies the chains `K < e^0.049 => d_T < 0.049 => norm < 0.0735 < 0.0739`
/// and reports which conclusions are guaranteed.
pub fn classical_bounds_report(
    schwarzian_norm: Option<f64>,
    teich_distance: Option<f64>,
    quasicircle_k: Option<f64>,
) -> ClassicalBoundsReport {
    let mut warnings = Vec::new();
    let mut derived: Option<f64> = None;
    let push = |d: &mut Option<f64>, v: f64| {
        *d = Some(d.map_or(v, |old: f64| old.min(v)));
    };

    if let Some(k) = quasicircle_k {
        if k < 1.0 {
            warnings.push("quasicircle constant below 1 is impossible; ignored".into());
        } else if k < quasicircle_guarantee() {
            // d_T <= log K
            push(&mut derived, 1.5 * k.ln());
        }
    }
    if let Some(d) = teich_distance {
        if d <= 0.0 {
            warnings.push("nonpositive Teichmuller distance marks the fuchsian locus".into());
        } else if d < TEICH_GUARANTEE {
            push(&mut derived, 1.5 * d);
        }
    }
    if let Some(n) = schwarzian_norm {
        if n <= 0.0 {
            warnings.push("zero Schwarzian norm marks the fuchsian locus".into());
        } else {
            push(&mut derived, n);
        }
    }

    let guaranteed = matches!(derived, Some(n) if n > 0.0 && n < SCHWARZIAN_GUARANTEE);
    let flag = if guaranteed { GuaranteeFlag::PaperGuaranteed } else { GuaranteeFlag::Unknown };
    if schwarzian_norm.is_none() && teich_distance.is_none() && quasicircle_k.is_none() {
        warnings.push("no inputs supplied".into());
    }
    ClassicalBoundsReport {
        schwarzian_norm,
        teich_distance,
        quasicircle_k,
        derived_schwarzian: derived,
        not_critical_entropy: flag,
        proper_affine_action: flag,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hill_basics() {
        assert!((hill(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((hill_prime(0.0) + 1.0).abs() < 1e-15);
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            assert!((hill(t) + hill(-t) - PI).abs() < 1e-12);
            assert!((hill_prime(t) + hill(t).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn u_l_monotone_scan() {
        let mut prev = f64::INFINITY;
        for i in -100..=100 {
            let x = i as f64 * 0.1;
            let v = u_l(x, 1.0);
            // strictly decreasing where the decrement is resolvable in f64;
            // in the far tails consecutive values differ below rounding
            if x.abs() <= 6.0 {
                assert!(v < prev, "u_1 must strictly decrease at x={x}");
            } else {
                assert!(v <= prev + 1e-12, "u_1 must not increase at x={x}");
            }
            prev = v;
        }
        assert!((u_l(0.0, 0.37) - (FRAC_PI_2 + 0.37)).abs() < 1e-14);
        // derivative is -sech(x) (1 + L tanh x), strictly negative for L <= 1
        for i in -20..=20 {
            let x = i as f64 * 0.3;
            let h = 1e-6;
            let fd = (u_l(x + h, 1.0) - u_l(x - h, 1.0)) / (2.0 * h);
            let closed = -(1.0 / x.cosh()) * (1.0 + x.tanh());
            assert!((fd - closed).abs() < 1e-6);
            assert!(closed < 0.0);
        }
    }

    #[test]
    fn a_l_residuals() {
        for (l, th) in [(1.0, FRAC_PI_2), (0.5, 0.3), (0.8, 1.2), (0.2, 2.5), (1.0, 0.05)] {
            let a = a_l(th, l).unwrap();
            assert!((u_l(a, l) - th).abs() < 1e-10, "residual at L={l}, angle={th}");
        }
        // cosh a_1(pi/2) = 1 / r(1)
        let a = a_l(FRAC_PI_2, 1.0).unwrap();
        assert!((a.cosh() - 1.0 / r(1.0)).abs() < 1e-9);
        assert!((a - 0.817_365).abs() < 1e-4);
        assert!(a_l(PI, 1.0).is_err());
    }

    #[test]
    fn r_l_fixed_point_identity() {
        // x = L sin(angle - x) on a grid of L <= 1 and angle <= pi/2
        for i in 1..=50 {
            for j in 1..=50 {
                let l = i as f64 / 50.0;
                let th = j as f64 * FRAC_PI_2 / 50.0;
                let x = r_l(th, l).unwrap();
                assert!(
                    (x - l * (th - x).sin()).abs() < 1e-10,
                    "fixed point residual at L={l}, angle={th}"
                );
            }
        }
        let v = r_l(FRAC_PI_2, 2.0).unwrap();
        assert!((v - 2.0 / 2.0_f64.cosh()).abs() < 1e-14);
        assert!((v - 0.531_611).abs() < 1e-5);
    }

    #[test]
    fn r_values_and_inverse_residual() {
        assert!((r(1.0) - 0.739_085).abs() < 1e-5);
        assert!((r(2.0) - 0.531_611).abs() < 1e-5);
        for i in 1..=60 {
            let l = i as f64 / 60.0;
            let x = r(l);
            assert!((x / x.cos() - l).abs() < 1e-10, "x sec x residual at L={l}");
        }
        for i in 1..=40 {
            let l = i as f64 * 0.1;
            assert!(r(l) >= l / l.cosh() - 1e-12, "r(L) >= L sech L at L={l}");
        }
    }

    #[test]
    fn bcy_bound() {
        let v = bcy_upper_bound(1.0).unwrap();
        assert!((v - 4.2379).abs() < 1e-3);
        let small = bcy_upper_bound(1e-9).unwrap();
        assert!((small - PI).abs() < 1e-8);
        assert!(bcy_upper_bound(2.0).is_err());
        let mut prev = 0.0;
        for i in 1..=17 {
            let v = bcy_upper_bound(i as f64 * 0.1).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn horocycle_value() {
        assert!((horocycle_roundness(1.0) - 0.9607).abs() < 1e-3);
        assert!(horocycle_roundness(1e-12) < 1e-11);
        assert!(horocycle_roundness(1.0) > r(1.0), "the example is not below threshold");
    }

    #[test]
    fn schwarzian_conversions() {
        assert_eq!(schwarzian_to_roundness(0.0, 1.0).unwrap(), 0.0);
        let mut prev = -1.0;
        for i in 0..40 {
            let lim = schwarzian_domain_limit(0.75);
            let x = i as f64 / 40.0 * lim * 0.999;
            let v = schwarzian_to_roundness(x, 0.75).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let g = schwarzian_threshold(0.611).unwrap();
        assert!((g - 0.073_964_3).abs() < 1e-5, "G(0.611) = {g}");
        // round trip
        let l = 0.611 / 0.611_f64.cos();
        let back = schwarzian_to_roundness(g, l).unwrap();
        assert!((back - 0.611).abs() < 1e-8);
        // F_{L(0.611)}(0.0739643) recovers 0.611
        assert!((l - 0.7459).abs() < 5e-4);
        // positive, increasing from the left, and locally maximal near 0.611
        assert!(g > 0.0);
        assert!(schwarzian_threshold(0.55).unwrap() < g);
        assert!(schwarzian_threshold(0.59).unwrap() < g);
        assert!(schwarzian_threshold(0.66).unwrap() < g);
    }

    #[test]
    fn classical_chain() {
        let rep = classical_bounds_report(None, None, Some(1.04));
        assert_eq!(rep.not_critical_entropy, GuaranteeFlag::PaperGuaranteed);
        assert_eq!(rep.proper_affine_action, GuaranteeFlag::PaperGuaranteed);

        let rep = classical_bounds_report(Some(0.08), None, None);
        assert_eq!(rep.not_critical_entropy, GuaranteeFlag::Unknown);

        assert!((quasicircle_guarantee() - 1.05022).abs() < 1e-5);

        let rep = classical_bounds_report(None, Some(0.048), None);
        assert_eq!(rep.proper_affine_action, GuaranteeFlag::PaperGuaranteed);
        assert!(rep.derived_schwarzian.unwrap() < SCHWARZIAN_GUARANTEE);

        let rep = classical_bounds_report(None, None, None);
        assert_eq!(rep.not_critical_entropy, GuaranteeFlag::Unknown);
        assert!(!rep.warnings.is_empty());
    }

    #[test]
    fn threshold_query_checks() {
        assert!(ThresholdQuery::new(1.0, FRAC_PI_2, None).is_ok());
        assert!(ThresholdQuery::new(0.0, 1.0, None).is_err());
        assert!(ThresholdQuery::new(1.0, 2.0, None).is_err());
        let q = ThresholdQuery::new(1.0, FRAC_PI_2, Some(0.5)).unwrap();
        assert_eq!(q.below_threshold(), Some(true));
        let q = ThresholdQuery::new(1.0, FRAC_PI_2, Some(horocycle_roundness(1.0))).unwrap();
        assert_eq!(q.below_threshold(), Some(false));
    }
}
