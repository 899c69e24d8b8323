//! The bending cocycle, the locally convex pleated map into hyperbolic
//! 3-space, bend angles, angle-boundedness verification and bilipschitz
//! estimates.
//!
//! The hyperbolic plane embeds in upper half-space as the vertical plane
//! over the real axis; the pleated map moves a point by the bending cocycle
//! of the arc from the basepoint. Because the metric on upper half-space is
//! conformal, angles between geodesics at a common point equal Euclidean
//! angles between their tangent vectors, which keeps the bend-angle code
//! free of numerical differentiation: one-sided tangents are computed from
//! the adjacent geodesic segments.

use crate::lamination::{
    ArcFrame, FiniteLamination, GeodesicArc, InvariantLamination, LaminationError,
};
use crate::moebius::{
    self, axis_rotation, dist_h2, dist_h3, poincare_extend, H3Point, MoebiusElement,
};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// The image of a domain segment under the pleated map: the bent vertex path
/// together with the exterior bending weight at each interior vertex.
#[derive(Debug, Clone)]
pub struct PleatedPath {
    /// Images of the arc start, the leaf crossing points, and the arc end.
    pub vertices: Vec<H3Point>,
    /// Bending weight at each interior vertex.
    pub bend_weights: Vec<Complex64>,
}

/// Bending cocycle of an arc: the ordered product of axis rotations
/// `R(leaf, i * weight)` over the leaves crossing `[x, y]`, nearest crossing
/// first, with half weight when an arc endpoint lies on a leaf.
pub fn bending_cocycle(
    lamination: &FiniteLamination,
    x: Complex64,
    y: Complex64,
) -> Result<MoebiusElement, LaminationError> {
    if (x - y).norm() < 1e-14 {
        return Ok(MoebiusElement::identity());
    }
    let rep = lamination.crossings(&GeodesicArc::new(x, y)?)?;
    let mut z = MoebiusElement::identity();
    for c in &rep.crossings {
        let w = if c.at_start || c.at_end { c.weight * 0.5 } else { c.weight };
        z = z.compose(&axis_rotation(&c.leaf, Complex64::new(0.0, 1.0) * w));
    }
    Ok(z)
}

/// The pleated map determined by a basepoint: `x` goes to the cocycle of
/// `[basepoint, x]` applied to `x` inside upper half-space.
pub fn pleated_map(
    lamination: &FiniteLamination,
    basepoint: Complex64,
    x: Complex64,
) -> Result<H3Point, LaminationError> {
    let z = bending_cocycle(lamination, basepoint, x)?;
    Ok(poincare_extend(&z, H3Point::from_h2(x)))
}

/// Vertex path of the pleated image of `[p, q]`.
pub fn pleated_path(
    lamination: &FiniteLamination,
    p: Complex64,
    q: Complex64,
) -> Result<PleatedPath, LaminationError> {
    let arc = GeodesicArc::new(p, q)?;
    let frame = ArcFrame::new(&arc)?;
    let rep = lamination.crossings(&arc)?;
    let inv = frame.map.inverse();
    let mut vertices = vec![pleated_map(lamination, p, p)?];
    let mut bend_weights = Vec::new();
    for c in &rep.crossings {
        let point = moebius::mobius_apply_h2(&inv, Complex64::new(0.0, c.param.exp()));
        vertices.push(pleated_map(lamination, p, point)?);
        bend_weights.push(c.weight);
    }
    vertices.push(pleated_map(lamination, p, q)?);
    Ok(PleatedPath { vertices, bend_weights })
}

/// Unit Euclidean tangent vector at `at` of the geodesic through `at` and
/// `toward`, pointing toward the second point. Exact up to rounding: the
/// geodesic is a vertical line or a circle orthogonal to the boundary plane.
fn geodesic_tangent(at: H3Point, toward: H3Point) -> [f64; 3] {
    let dz = toward.z - at.z;
    if dz.norm() < 1e-13 * (at.t + toward.t) {
        let s = (toward.t - at.t).signum();
        return [0.0, 0.0, s];
    }
    let e = dz / dz.norm();
    // 2d coordinates (s, t) in the vertical plane through both points
    let s2 = dz.norm();
    let (t1, t2) = (at.t, toward.t);
    let s0 = (s2 * s2 + t2 * t2 - t1 * t1) / (2.0 * s2);
    let r = (s0 * s0 + t1 * t1).sqrt();
    // tangent perpendicular to the radius (0 - s0, t1), unit by construction
    let (mut ts, mut tt) = (t1 / r, s0 / r);
    // orient toward the second point
    if ts * s2 + tt * (t2 - t1) < 0.0 {
        ts = -ts;
        tt = -tt;
    }
    [ts * e.re, ts * e.im, tt]
}

fn angle_between(u: [f64; 3], v: [f64; 3]) -> f64 {
    let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// One-sided bend angles at `q` between the chord from `p` and the pleated
/// image of the ray through `q`: `(after, before)` in `[0, pi)`.
///
/// The angles agree when `q` is off the support. Both tangents come from the
/// adjacent geodesic segments of the pleated path, so no differencing is
/// involved.
pub fn bend_angle(
    lamination: &FiniteLamination,
    p: Complex64,
    q: Complex64,
) -> Result<(f64, f64), LaminationError> {
    let arc = GeodesicArc::new(p, q)?;
    let frame = ArcFrame::new(&arc)?;
    let rep = lamination.crossings(&arc)?;
    let inv = frame.map.inverse();
    let fp = pleated_map(lamination, p, p)?;
    let fq = pleated_map(lamination, p, q)?;

    // incoming tangent: from the last strictly interior vertex before q
    let prev_param = rep
        .crossings
        .iter()
        .map(|c| c.param)
        .filter(|t| *t < frame.len - 1e-9)
        .fold(f64::NEG_INFINITY, f64::max);
    let prev_point = if prev_param.is_finite() {
        let mid = 0.5 * (prev_param + frame.len);
        moebius::mobius_apply_h2(&inv, Complex64::new(0.0, mid.exp()))
    } else {
        p
    };
    let f_prev = pleated_map(lamination, p, prev_point)?;

    // outgoing tangent: image of a point just beyond q along the ray
    let next_param = rep
        .crossings
        .iter()
        .map(|c| c.param)
        .filter(|t| *t > frame.len + 1e-9)
        .fold(f64::INFINITY, f64::min);
    // crossings() clips to the arc; query the full geodesic for the next leaf
    let next_beyond = {
        let mut next = f64::INFINITY;
        for leaf in &lamination.leaves {
            if let Some((t, _, _)) = frame.leaf_crossing(&leaf.geodesic) {
                if t > frame.len + 1e-9 && t < next {
                    next = t;
                }
            }
        }
        next.min(next_param)
    };
    let beyond_param = if next_beyond.is_finite() {
        0.5 * (frame.len + next_beyond)
    } else {
        frame.len + 0.5
    };
    let beyond_point = moebius::mobius_apply_h2(&inv, Complex64::new(0.0, beyond_param.exp()));
    let f_beyond = pleated_map(lamination, p, beyond_point)?;

    // forward chord tangent at f(q): away from f(p)
    let chord = {
        let toward_p = geodesic_tangent(fq, fp);
        [-toward_p[0], -toward_p[1], -toward_p[2]]
    };
    let incoming = {
        let toward_prev = geodesic_tangent(fq, f_prev);
        [-toward_prev[0], -toward_prev[1], -toward_prev[2]]
    };
    let outgoing = geodesic_tangent(fq, f_beyond);

    let after = angle_between(chord, outgoing);
    let before = angle_between(chord, incoming);
    Ok((after, before))
}

/// Sampling plan for angle and bilipschitz scans: a family of geodesic rays
/// from a basepoint with an arc-length grid, plus random point pairs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleSpec {
    pub rays: usize,
    pub step: f64,
    pub range: f64,
    pub basepoint: Complex64,
    pub pair_samples: usize,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            rays: 64,
            step: 0.1,
            range: 12.0,
            basepoint: Complex64::new(0.0, 1.0),
            pair_samples: 10_000,
        }
    }
}

impl SampleSpec {
    /// Point at arc length `t` along the ray with direction angle `phi`
    /// from the basepoint.
    pub fn ray_point(&self, phi: f64, t: f64) -> Complex64 {
        // rotate the upward ray about i by phi, then transport i to basepoint
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        let rot = MoebiusElement::from_real(c, s, -s, c).expect("rotation");
        let on_axis = Complex64::new(0.0, t.exp());
        let at_i = moebius::mobius_apply_h2(&rot, on_axis);
        // translate i to basepoint: z -> basepoint.im * z + basepoint.re
        let b = self.basepoint;
        let m = MoebiusElement::from_real(b.im.sqrt(), b.re / b.im.sqrt(), 0.0, 1.0 / b.im.sqrt())
            .expect("affine");
        moebius::mobius_apply_h2(&m, at_i)
    }
}

/// Verdict of a sampled universal claim: sampling can refute but never prove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleVerdict {
    Consistent,
    Refuted,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThetaReport {
    pub max_angle: f64,
    pub witness: Option<(Complex64, Complex64)>,
    pub verdict: SampleVerdict,
    pub samples: usize,
    /// A sampled check cannot prove the universal bound; `Consistent` only
    /// records that no sampled pair exceeded it.
    pub note: &'static str,
}

/// Expands an invariant lamination far enough to cover a disk of the given
/// radius about the basepoint, then checks all sampled bend angles against
/// the bound `theta`.
pub fn theta_bounded_check(
    lamination: &InvariantLamination,
    theta: f64,
    spec: &SampleSpec,
) -> Result<ThetaReport, LaminationError> {
    assert!(theta > 0.0 && theta < std::f64::consts::PI);
    let expanded = expand_for_disk(lamination, spec.basepoint, spec.range)?;
    let mut max_angle = 0.0_f64;
    let mut witness = None;
    let mut samples = 0;
    let p = spec.basepoint;
    for k in 0..spec.rays {
        let phi = 2.0 * std::f64::consts::PI * (k as f64) / (spec.rays as f64);
        let mut t = spec.step;
        while t <= spec.range {
            let q = spec.ray_point(phi, t);
            let (after, before) = bend_angle(&expanded, p, q)?;
            let a = after.max(before);
            samples += 1;
            if a > max_angle {
                max_angle = a;
                witness = Some((p, q));
            }
            t += spec.step;
        }
    }
    let verdict = if max_angle > theta + 1e-9 {
        SampleVerdict::Refuted
    } else {
        SampleVerdict::Consistent
    };
    Ok(ThetaReport {
        max_angle,
        witness,
        verdict,
        samples,
        note: "sampled check: Consistent does not prove the universal bound",
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BilipschitzReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pairs: usize,
}

/// Minimum and maximum of `d(f(x), f(y)) / d(x, y)` over sampled pairs.
/// The maximum must never exceed one (the pleated map is 1-Lipschitz).
pub fn bilipschitz_estimate(
    lamination: &InvariantLamination,
    spec: &SampleSpec,
    rng: &mut impl Rng,
) -> Result<BilipschitzReport, LaminationError> {
    let expanded = expand_for_disk(lamination, spec.basepoint, spec.range)?;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    let mut pairs = 0;
    let sample_point = |rng: &mut dyn rand::RngCore| -> Complex64 {
        let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let t = rng.gen_range(0.0..spec.range * 0.8);
        spec.ray_point(phi, t)
    };
    while pairs < spec.pair_samples {
        let x = sample_point(rng);
        let y = sample_point(rng);
        let d2 = dist_h2(x, y);
        if d2 < 1e-6 {
            continue;
        }
        let fx = pleated_map(&expanded, spec.basepoint, x)?;
        let fy = pleated_map(&expanded, spec.basepoint, y)?;
        let ratio = dist_h3(fx, fy) / d2;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        pairs += 1;
    }
    Ok(BilipschitzReport { min_ratio, max_ratio, pairs })
}

/// Expands an invariant lamination until every leaf that can cross the disk
/// of radius `radius` about `center` is present. Errors when the configured
/// depth is insufficient.
pub fn expand_for_disk(
    lamination: &InvariantLamination,
    center: Complex64,
    radius: f64,
) -> Result<FiniteLamination, LaminationError> {
    let count_near = |fin: &FiniteLamination| -> usize {
        fin.leaves
            .iter()
            .filter(|l| leaf_distance_to_point(&l.geodesic, center) <= radius + 0.5)
            .count()
    };
    let expanded = lamination.expand()?;
    if lamination.generators.is_empty() {
        return Ok(expanded);
    }
    let deeper = InvariantLamination {
        base_leaves: lamination.base_leaves.clone(),
        generators: lamination.generators.clone(),
        depth: lamination.depth + 1,
    }
    .expand()?;
    if count_near(&deeper) != count_near(&expanded) {
        return Err(LaminationError::InsufficientDepth(
            "a deeper orbit expansion adds leaves near the sampling disk",
        ));
    }
    Ok(expanded)
}

/// Distance from an interior point to a complete geodesic.
pub fn leaf_distance_to_point(leaf: &crate::moebius::Geodesic, p: Complex64) -> f64 {
    use crate::moebius::BoundaryPoint;
    match (leaf.start, leaf.end) {
        (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
            let c = 0.5 * (a.re + b.re);
            let r = 0.5 * (b.re - a.re).abs();
            // distance to the semicircle |z - c| = r: sinh d = (|z-c|^2 - r^2) / (2 r Im z)
            let w = p - Complex64::new(c, 0.0);
            let q = (w.norm_sqr() - r * r) / (2.0 * r * p.im);
            q.abs().asinh()
        }
        (BoundaryPoint::Finite(a), BoundaryPoint::Infinity)
        | (BoundaryPoint::Infinity, BoundaryPoint::Finite(a)) => {
            // vertical line at a: sinh d = |Re z - a| / Im z
            (((p.re - a.re) / p.im).abs()).asinh()
        }
        _ => unreachable!("degenerate leaf"),
    }
}
