//! Finite-leaved measured geodesic laminations on the upper half-plane,
//! group-invariant orbit presentations, transverse measures of arcs, and the
//! L-roundness functional.
//!
//! Leaves are complete geodesics with endpoints on the circle `R u {inf}`.
//! Crossing questions are resolved through the circular order of endpoint
//! pairs; metric questions (crossing parameters, leaf spacing) go through a
//! normalizing frame that puts the queried arc on the imaginary axis.

use crate::moebius::{
    self, dist_h2, BoundaryPoint, Geodesic, MoebiusElement, MoebiusError, EPS_POINT,
};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaminationError {
    #[error("leaves cross: indices {0} and {1}")]
    CrossingLeaves(usize, usize),
    #[error("duplicate leaf at indices {0} and {1}")]
    DuplicateLeaf(usize, usize),
    #[error("leaf endpoint is not on the boundary circle R u {{inf}}")]
    EndpointNotReal,
    #[error("leaf weight must be nonzero")]
    ZeroWeight,
    #[error("orbit expansion truncated: {0}")]
    InsufficientDepth(&'static str),
    #[error("generator must have real entries")]
    NonRealGenerator,
    #[error("arc endpoints must be distinct interior points")]
    DegenerateArc,
    #[error("weights must be real and positive for this operation")]
    NonRealWeights,
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// A point of the boundary circle of the hyperbolic plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CirclePoint {
    Finite(f64),
    Infinity,
}

impl CirclePoint {
    pub fn from_boundary(p: &BoundaryPoint) -> Result<Self, LaminationError> {
        match p {
            BoundaryPoint::Infinity => Ok(CirclePoint::Infinity),
            BoundaryPoint::Finite(z) => {
                if z.im.abs() > 1e-9 * z.re.abs().max(1.0) {
                    Err(LaminationError::EndpointNotReal)
                } else {
                    Ok(CirclePoint::Finite(z.re))
                }
            }
        }
    }

    pub fn to_boundary(self) -> BoundaryPoint {
        match self {
            CirclePoint::Finite(x) => BoundaryPoint::real(x),
            CirclePoint::Infinity => BoundaryPoint::Infinity,
        }
    }

    /// Angle coordinate `2 atan(x)` in `(-pi, pi]`, with infinity at `pi`.
    pub fn angle(self) -> f64 {
        match self {
            CirclePoint::Finite(x) => 2.0 * x.atan(),
            CirclePoint::Infinity => std::f64::consts::PI,
        }
    }

    /// Angle wrapped to `[0, 2 pi)`, continuous across infinity: huge
    /// negative coordinates land just above `pi`, huge positive ones just
    /// below. Suitable for quantized deduplication keys.
    pub fn canonical_angle(self) -> f64 {
        self.angle().rem_euclid(2.0 * std::f64::consts::PI)
    }
}

/// Distance between two circle angles modulo `2 pi`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    ((a - b + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI).abs()
}

/// Whether two unordered endpoint-angle pairs agree within `eps` on the
/// circle.
pub fn same_angle_pair(p: (f64, f64), q: (f64, f64), eps: f64) -> bool {
    (circular_distance(p.0, q.0) < eps && circular_distance(p.1, q.1) < eps)
        || (circular_distance(p.0, q.1) < eps && circular_distance(p.1, q.0) < eps)
}

impl CirclePoint {
    pub fn approx_eq(self, other: CirclePoint, eps: f64) -> bool {
        match (self, other) {
            (CirclePoint::Infinity, CirclePoint::Infinity) => true,
            (CirclePoint::Finite(a), CirclePoint::Finite(b)) => (a - b).abs() <= eps,
            _ => false,
        }
    }
}

/// One weighted leaf of a lamination.
#[derive(Debug, Clone, Copy)]
pub struct Leaf {
    pub geodesic: Geodesic,
    pub weight: Complex64,
}

impl Leaf {
    pub fn new(geodesic: Geodesic, weight: Complex64) -> Result<Self, LaminationError> {
        if weight.norm() == 0.0 {
            return Err(LaminationError::ZeroWeight);
        }
        CirclePoint::from_boundary(&geodesic.start)?;
        CirclePoint::from_boundary(&geodesic.end)?;
        Ok(Self { geodesic, weight })
    }

    pub fn real(start: f64, end: f64, weight: f64) -> Self {
        Self {
            geodesic: Geodesic::real(start, end),
            weight: Complex64::new(weight, 0.0),
        }
    }

    pub fn vertical(x: f64, weight: f64) -> Self {
        Self {
            geodesic: Geodesic::vertical(x),
            weight: Complex64::new(weight, 0.0),
        }
    }

    pub(crate) fn circle_pair(&self) -> (CirclePoint, CirclePoint) {
        (
            CirclePoint::from_boundary(&self.geodesic.start).expect("validated"),
            CirclePoint::from_boundary(&self.geodesic.end).expect("validated"),
        )
    }
}

/// Whether two geodesics of the hyperbolic plane cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossKind {
    Cross,
    Disjoint,
    SharedEndpoint,
}

pub(crate) fn angle_in_arc(theta: f64, a: f64, b: f64) -> bool {
    // open arc from a to b counterclockwise
    let two_pi = 2.0 * std::f64::consts::PI;
    let norm = |x: f64| -> f64 {
        let mut y = x % two_pi;
        if y < 0.0 {
            y += two_pi;
        }
        y
    };
    let span = norm(b - a);
    let off = norm(theta - a);
    off > 0.0 && off < span
}

/// Linking test for endpoint pairs on the boundary circle.
pub fn geodesics_cross(g: &Geodesic, h: &Geodesic) -> Result<CrossKind, LaminationError> {
    let ga = CirclePoint::from_boundary(&g.start)?;
    let gb = CirclePoint::from_boundary(&g.end)?;
    let ha = CirclePoint::from_boundary(&h.start)?;
    let hb = CirclePoint::from_boundary(&h.end)?;
    let eps = EPS_POINT.max(1e-12);
    if ga.approx_eq(ha, eps) || ga.approx_eq(hb, eps) || gb.approx_eq(ha, eps) || gb.approx_eq(hb, eps)
    {
        return Ok(CrossKind::SharedEndpoint);
    }
    let (a, b) = (ga.angle(), gb.angle());
    let ins = |p: CirclePoint| angle_in_arc(p.angle(), a, b);
    Ok(if ins(ha) != ins(hb) { CrossKind::Cross } else { CrossKind::Disjoint })
}

/// A geodesic arc between two interior points of the upper half-plane.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicArc {
    pub from: Complex64,
    pub to: Complex64,
}

impl GeodesicArc {
    pub fn new(from: Complex64, to: Complex64) -> Result<Self, LaminationError> {
        if !(from.im > 0.0 && to.im > 0.0) || (from - to).norm() < 1e-14 {
            return Err(LaminationError::DegenerateArc);
        }
        Ok(Self { from, to })
    }
}

/// Normalizing frame for an arc: a real Mobius element taking the arc onto
/// the segment of the imaginary axis from `i` to `i e^len`.
#[derive(Debug, Clone, Copy)]
pub struct ArcFrame {
    pub map: MoebiusElement,
    pub len: f64,
}

impl ArcFrame {
    pub fn new(arc: &GeodesicArc) -> Result<Self, LaminationError> {
        let (x, y) = (arc.from, arc.to);
        // ideal endpoints of the geodesic through x and y, forward one second
        let (u, v) = if (x.re - y.re).abs() < 1e-13 * (x.norm() + y.norm()).max(1.0) {
            if y.im > x.im {
                (CirclePoint::Finite(x.re), CirclePoint::Infinity)
            } else {
                (CirclePoint::Infinity, CirclePoint::Finite(x.re))
            }
        } else {
            let c = (y.norm_sqr() - x.norm_sqr()) / (2.0 * (y.re - x.re));
            let r = (x - Complex64::new(c, 0.0)).norm();
            // forward endpoint is the one on y's side
            if y.re > x.re {
                (CirclePoint::Finite(c - r), CirclePoint::Finite(c + r))
            } else {
                (CirclePoint::Finite(c + r), CirclePoint::Finite(c - r))
            }
        };
        // maps must preserve the upper half-plane: keep the real determinant
        // positive
        let base = match (u, v) {
            (CirclePoint::Finite(u), CirclePoint::Finite(v)) => {
                if u > v {
                    MoebiusElement::from_real(1.0, -u, 1.0, -v)?
                } else {
                    MoebiusElement::from_real(-1.0, u, 1.0, -v)?
                }
            }
            (CirclePoint::Finite(u), CirclePoint::Infinity) => {
                MoebiusElement::from_real(1.0, -u, 0.0, 1.0)?
            }
            (CirclePoint::Infinity, CirclePoint::Finite(v)) => {
                MoebiusElement::from_real(0.0, -1.0, 1.0, -v)?
            }
            _ => unreachable!(),
        };
        let h = moebius::mobius_apply_h2(&base, x).im;
        let scale = MoebiusElement::from_real(1.0 / h.sqrt(), 0.0, 0.0, h.sqrt())?;
        let map = scale.compose(&base);
        let len = dist_h2(x, y);
        Ok(Self { map, len })
    }

    /// Crossing data of a leaf against the normalized axis.
    ///
    /// Returns the arc-length parameter (distance from the arc start, which
    /// may lie outside `[0, len]` since the whole geodesic is queried), the
    /// leaf reoriented by the convention that the traversal of the arc
    /// passes from the leaf's left side to its right side, and whether the
    /// input orientation was flipped to achieve that.
    pub fn leaf_crossing(&self, leaf: &Geodesic) -> Option<(f64, Geodesic, bool)> {
        let a = moebius::mobius_apply(&self.map, leaf.start);
        let b = moebius::mobius_apply(&self.map, leaf.end);
        let av = match a {
            BoundaryPoint::Finite(z) => z.re,
            BoundaryPoint::Infinity => return None, // vertical image never crosses the axis
        };
        let bv = match b {
            BoundaryPoint::Finite(z) => z.re,
            BoundaryPoint::Infinity => return None,
        };
        if av * bv >= 0.0 {
            return None;
        }
        let t = 0.5 * (-av * bv).ln();
        // normalized orientation: positive endpoint first
        if av > 0.0 {
            Some((t, *leaf, false))
        } else {
            Some((t, leaf.reversed(), true))
        }
    }
}

/// One transverse crossing of a leaf with an arc.
#[derive(Debug, Clone)]
pub struct Crossing {
    /// Leaf oriented so the arc passes it from left to right.
    pub leaf: Geodesic,
    pub weight: Complex64,
    /// Arc-length parameter of the crossing point along the arc.
    pub param: f64,
    pub at_start: bool,
    pub at_end: bool,
}

/// Ordered crossings of a lamination with an arc.
#[derive(Debug, Clone, Default)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    pub start_on_leaf: bool,
    pub end_on_leaf: bool,
}

/// A finite measured lamination: finitely many pairwise disjoint weighted
/// leaves.
#[derive(Debug, Clone, Default)]
pub struct FiniteLamination {
    pub leaves: Vec<Leaf>,
}

impl FiniteLamination {
    pub fn new(leaves: Vec<Leaf>) -> Result<Self, LaminationError> {
        for i in 0..leaves.len() {
            for j in (i + 1)..leaves.len() {
                if leaves[i].geodesic.same_unoriented(&leaves[j].geodesic, 1e-11) {
                    return Err(LaminationError::DuplicateLeaf(i, j));
                }
                if geodesics_cross(&leaves[i].geodesic, &leaves[j].geodesic)? == CrossKind::Cross {
                    return Err(LaminationError::CrossingLeaves(i, j));
                }
            }
        }
        Ok(Self { leaves })
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn has_real_positive_weights(&self) -> bool {
        self.leaves
            .iter()
            .all(|l| l.weight.im.abs() < 1e-12 && l.weight.re > 0.0)
    }

    /// Crossings of the lamination with an arc, ordered along the arc from
    /// its start. Tolerance for "endpoint on a leaf" is `1e-9` arc length.
    pub fn crossings(&self, arc: &GeodesicArc) -> Result<CrossingReport, LaminationError> {
        let frame = ArcFrame::new(arc)?;
        let eps = 1e-9;
        let mut out = CrossingReport::default();
        for leaf in &self.leaves {
            if let Some((t, oriented, _)) = frame.leaf_crossing(&leaf.geodesic) {
                let at_start = t.abs() <= eps;
                let at_end = (t - frame.len).abs() <= eps;
                if (t > -eps) && (t < frame.len + eps) {
                    out.start_on_leaf |= at_start;
                    out.end_on_leaf |= at_end;
                    out.crossings.push(Crossing {
                        leaf: oriented,
                        weight: leaf.weight,
                        param: t,
                        at_start,
                        at_end,
                    });
                }
            }
        }
        out.crossings
            .sort_by(|a, b| a.param.partial_cmp(&b.param).expect("finite params"));
        Ok(out)
    }
}

/// Leaves of a lamination crossed by an arc, in crossing order, each leaf
/// oriented by the left-to-right convention.
pub fn leaves_crossing_arc(
    lamination: &FiniteLamination,
    arc: &GeodesicArc,
) -> Result<CrossingReport, LaminationError> {
    lamination.crossings(arc)
}

/// Total measure deposited on an arc: the weight sum of crossing leaves, at
/// half weight for a leaf through an arc endpoint.
pub fn transverse_measure(
    lamination: &FiniteLamination,
    arc: &GeodesicArc,
) -> Result<Complex64, LaminationError> {
    let rep = lamination.crossings(arc)?;
    let mut total = Complex64::new(0.0, 0.0);
    for c in &rep.crossings {
        let factor = if c.at_start || c.at_end { 0.5 } else { 1.0 };
        total += c.weight * factor;
    }
    Ok(total)
}

/// Orbit presentation of an invariant lamination: base leaves moved around by
/// a group, expanded to finite word length on demand.
#[derive(Debug, Clone)]
pub struct InvariantLamination {
    pub base_leaves: Vec<Leaf>,
    pub generators: Vec<MoebiusElement>,
    pub depth: usize,
}

impl InvariantLamination {
    pub fn new(
        base_leaves: Vec<Leaf>,
        generators: Vec<MoebiusElement>,
        depth: usize,
    ) -> Result<Self, LaminationError> {
        for g in &generators {
            if !g.has_real_entries(1e-12) {
                return Err(LaminationError::NonRealGenerator);
            }
        }
        let lam = Self { base_leaves, generators, depth };
        // validation: the expansion must itself be a lamination
        lam.expand()?;
        Ok(lam)
    }

    /// Expands the orbit of the base leaves over all words of length at most
    /// `depth`, deduplicating leaves by their unordered endpoint pair.
    pub fn expand(&self) -> Result<FiniteLamination, LaminationError> {
        let mut leaves: Vec<Leaf> = Vec::new();
        let mut keys: Vec<(f64, f64)> = Vec::new();
        let mut push = |leaf: Leaf| {
            let (a, b) = leaf.circle_pair();
            let key = (a.canonical_angle(), b.canonical_angle());
            let dup = keys.iter().any(|&k| same_angle_pair(k, key, 1e-9));
            if !dup {
                keys.push(key);
                leaves.push(leaf);
            }
        };
        for l in &self.base_leaves {
            push(*l);
        }
        // breadth-first over reduced words in the generators
        let mut frontier: Vec<MoebiusElement> = vec![MoebiusElement::identity()];
        let mut elements: Vec<MoebiusElement> = frontier.clone();
        let gens_ext: Vec<MoebiusElement> = self
            .generators
            .iter()
            .cloned()
            .chain(self.generators.iter().map(|g| g.inverse()))
            .collect();
        for _ in 0..self.depth {
            let mut next = Vec::new();
            for f in &frontier {
                for g in &gens_ext {
                    let w = g.compose(f);
                    if elements.iter().any(|e| e.projective_eq(&w, 1e-9)) {
                        continue;
                    }
                    for l in &self.base_leaves {
                        let moved = l.geodesic.transform(&w);
                        push(Leaf { geodesic: moved, weight: l.weight });
                    }
                    elements.push(w);
                    next.push(w);
                }
            }
            frontier = next;
            if elements.len() > 4000 {
                return Err(LaminationError::InsufficientDepth(
                    "orbit expansion exceeded the element budget",
                ));
            }
        }
        FiniteLamination::new(leaves)
    }
}

/// Result of an L-roundness computation.
#[derive(Debug, Clone, Serialize)]
pub struct RoundnessEstimate {
    pub value: f64,
    /// True when the family is a chain crossed by a common transversal, in
    /// which case the run maximum over pairwise leaf distances is the exact
    /// supremum for the expanded family.
    pub exact: bool,
    pub transversals_sampled: usize,
}

fn leaf_distance(a: &Geodesic, b: &Geodesic) -> Result<f64, LaminationError> {
    if a.shares_endpoint(b, EPS_POINT) {
        return Ok(0.0);
    }
    match moebius::cosh_complex_distance(a, b) {
        Ok(c) => Ok(c.norm().max(1.0).acosh()),
        // a cross-ratio within rounding of 1 marks a pair too far apart to
        // resolve, not a degenerate one
        Err(MoebiusError::CrossRatioOne) => Ok(f64::MAX.ln()),
        Err(e) => Err(e.into()),
    }
}

/// Lower bound for the supremum of the transverse measure over arcs of
/// length strictly less than `arc_length`.
///
/// For chain configurations (all leaves crossed by one common transversal)
/// the run maximum over pairwise leaf distances is the exact supremum for
/// the expanded family; otherwise a sampled lower bound over random
/// transversals and pair axes is returned.
pub fn l_roundness(
    lamination: &InvariantLamination,
    arc_length: f64,
    sample_budget: usize,
    rng: &mut impl Rng,
) -> Result<RoundnessEstimate, LaminationError> {
    assert!(arc_length > 0.0);
    let expanded = lamination.expand()?;
    let leaves = &expanded.leaves;
    if !expanded.has_real_positive_weights() {
        return Err(LaminationError::NonRealWeights);
    }
    if leaves.is_empty() {
        return Ok(RoundnessEstimate { value: 0.0, exact: true, transversals_sampled: 0 });
    }
    if lamination.depth < 2 && !lamination.generators.is_empty() {
        return Err(LaminationError::InsufficientDepth("expand at least to depth 2"));
    }

    let mut best = leaves.iter().map(|l| l.weight.re).fold(0.0_f64, f64::max);
    let n = leaves.len();

    // chain test: every leaf separates or flanks every other pair coherently,
    // which for pairwise disjoint leaves reduces to: among any three leaves,
    // one separates the other two
    let separates = |y: &Leaf, x: &Leaf, z: &Leaf| -> bool {
        let (a, b) = y.circle_pair();
        let (xa, _) = x.circle_pair();
        let (za, _) = z.circle_pair();
        angle_in_arc(xa.angle(), a.angle(), b.angle())
            != angle_in_arc(za.angle(), a.angle(), b.angle())
    };
    let mut chain = true;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if !separates(&leaves[j], &leaves[i], &leaves[k])
                    && !separates(&leaves[i], &leaves[j], &leaves[k])
                    && !separates(&leaves[k], &leaves[i], &leaves[j])
                {
                    chain = false;
                    break 'outer;
                }
            }
        }
    }

    if chain && n >= 2 {
        // order the chain by signed distance from leaf 0
        let base = &leaves[0];
        let (ba, bb) = base.circle_pair();
        let signed: Vec<f64> = leaves
            .iter()
            .enumerate()
            .map(|(i, l)| {
                if i == 0 {
                    return 0.0;
                }
                let d = leaf_distance(&base.geodesic, &l.geodesic).unwrap_or(0.0);
                let (la, _) = l.circle_pair();
                if angle_in_arc(la.angle(), ba.angle(), bb.angle()) {
                    d
                } else {
                    -d
                }
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| signed[a].partial_cmp(&signed[b]).expect("finite"));
        let sorted: Vec<&Leaf> = order.iter().map(|&i| &leaves[i]).collect();

        for i in 0..n {
            let mut acc = 0.0;
            for j in i..n {
                let d = leaf_distance(&sorted[i].geodesic, &sorted[j].geodesic)?;
                if d < arc_length - 1e-12 {
                    acc += sorted[j].weight.re;
                    best = best.max(acc);
                } else {
                    break;
                }
            }
        }
        // truncation check: when runs can hold several leaves the expanded
        // chain must comfortably exceed the queried arc length
        let min_gap = (1..n)
            .map(|i| leaf_distance(&sorted[i - 1].geodesic, &sorted[i].geodesic).unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min);
        if min_gap < arc_length {
            let span = leaf_distance(&sorted[0].geodesic, &sorted[n - 1].geodesic)?;
            if span < 2.0 * arc_length {
                return Err(LaminationError::InsufficientDepth(
                    "expanded chain is shorter than twice the queried arc length",
                ));
            }
        }
        return Ok(RoundnessEstimate { value: best, exact: true, transversals_sampled: 1 });
    }

    // general case: sampled transversals, sliding-window over crossings
    let mut sampled = 0;
    let eval_transversal = |t: &Geodesic, best: &mut f64| {
        let q = moebius::standard_frame(t);
        let p1 = moebius::mobius_apply_h2(&q, Complex64::new(0.0, 1.0));
        let p2 = moebius::mobius_apply_h2(&q, Complex64::new(0.0, std::f64::consts::E));
        let Ok(arc) = GeodesicArc::new(p1, p2) else { return };
        let Ok(frame) = ArcFrame::new(&arc) else { return };
        let mut hits: Vec<(f64, f64)> = Vec::new();
        for l in leaves {
            if let Some((t, _, _)) = frame.leaf_crossing(&l.geodesic) {
                hits.push((t, l.weight.re));
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let mut lo = 0;
        let mut acc = 0.0;
        for hi in 0..hits.len() {
            acc += hits[hi].1;
            while hits[hi].0 - hits[lo].0 >= arc_length - 1e-12 {
                acc -= hits[lo].1;
                lo += 1;
            }
            if acc > *best {
                *best = acc;
            }
        }
    };

    // axes through pairs of leaf midpoints catch aligned families
    let cap = n.min(40);
    for i in 0..cap {
        for j in (i + 1)..cap {
            let mid = |l: &Leaf| -> f64 {
                let (a, b) = l.circle_pair();
                let two_pi = 2.0 * std::f64::consts::PI;
                let mut span = (b.angle() - a.angle()) % two_pi;
                if span < 0.0 {
                    span += two_pi;
                }
                (a.angle() + span / 2.0).rem_euclid(two_pi)
            };
            let c1 = (mid(&leaves[i]) / 2.0).tan();
            let c2 = (mid(&leaves[j]) / 2.0).tan();
            if !(c1.is_finite() && c2.is_finite()) || (c1 - c2).abs() < 1e-9 {
                continue;
            }
            if let Ok(t) = Geodesic::new(BoundaryPoint::real(c1), BoundaryPoint::real(c2)) {
                eval_transversal(&t, &mut best);
                sampled += 1;
            }
        }
    }
    for _ in 0..sample_budget {
        let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let b = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        if (a - b).abs() < 1e-6 {
            continue;
        }
        let pa = (a / 2.0).tan();
        let pb = (b / 2.0).tan();
        if let Ok(t) = Geodesic::new(BoundaryPoint::real(pa), BoundaryPoint::real(pb)) {
            eval_transversal(&t, &mut best);
            sampled += 1;
        }
    }
    Ok(RoundnessEstimate { value: best, exact: false, transversals_sampled: sampled })
}

/// The bending lamination of the pleated plane over a piecewise geodesic
/// inscribed in a horocycle with edge length `edge`: an equidistant family of
/// leaves spaced `edge` apart along a common perpendicular, each carrying
/// weight `2 asin(tanh(edge/2))`.
pub fn horocycle_lamination(edge: f64, depth: usize) -> InvariantLamination {
    assert!(edge > 0.0);
    let weight = 2.0 * (edge / 2.0).tanh().asin();
    let base = Leaf::real(-1.0, 1.0, weight);
    let lambda = (edge / 2.0).exp();
    let gen = MoebiusElement::from_real(lambda, 0.0, 0.0, 1.0 / lambda).expect("diagonal");
    InvariantLamination::new(vec![base], vec![gen], depth).expect("equidistant family is disjoint")
}
