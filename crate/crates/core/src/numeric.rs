//! Small numerical helpers shared across modules: bracketed bisection and
//! Richardson-extrapolated central differences.

use num_complex::Complex64;

/// Bracketed bisection. `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || (hi - lo).abs() < tol {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Central difference of a complex-valued function of a real parameter.
pub fn central_diff(f: &impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Result of a Richardson-extrapolated derivative.
#[derive(Debug, Clone, Copy)]
pub struct Derivative {
    pub value: Complex64,
    /// Estimated absolute error (difference of the last two extrapolants / 3).
    pub error: f64,
    /// Observed convergence order from three step sizes.
    pub order: f64,
}

/// Central difference with one Richardson step. Uses steps `h`, `h/2`, `h/4`
/// so the observed order of convergence can be reported.
pub fn richardson_central(f: impl Fn(f64) -> Complex64, h: f64) -> Derivative {
    let d1 = central_diff(&f, h);
    let d2 = central_diff(&f, h / 2.0);
    let d4 = central_diff(&f, h / 4.0);
    let value = (4.0 * d4 - d2) / 3.0;
    let error = (d4 - d2).norm() / 3.0;
    let e12 = (d1 - d2).norm();
    let e24 = (d2 - d4).norm();
    let order = if e24 > 0.0 && e12 > 0.0 {
        (e12 / e24).log2()
    } else {
        f64::INFINITY
    };
    Derivative { value, error, order }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_cosine_fixed_point() {
        let r = bisect(|x| x * (1.0 / x.cos()) - 1.0, 0.1, 1.4, 1e-14).unwrap();
        assert!((r - 0.739_085_133_215_160_6).abs() < 1e-12);
    }

    #[test]
    fn richardson_on_exponential() {
        let d = richardson_central(|t| Complex64::new(0.0, 2.0 * t).exp(), 1e-2);
        assert!((d.value - Complex64::new(0.0, 2.0)).norm() < 1e-10);
        assert!(d.order > 1.5);
    }
}
