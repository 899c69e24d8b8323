//! Concrete fuchsian example groups, word batteries, limit-set sampling and
//! a desk-scale critical-exponent estimator.
//!
//! Three constructions are provided: a classical two-generator group with
//! disjoint isometric disks (all axes disjoint), a two-generator group with
//! linked axes (crossing-rich, the workhorse for bending experiments), and
//! the genus-two surface group of the regular octagon with the single
//! relator `[a,b][c,d]`.

use crate::bending::{Representation, Word, WordEvaluator};
use crate::moebius::{
    self, complex_length, fixed_points, mobius_apply_h2, BoundaryPoint, MoebiusElement,
    MoebiusError, EPS_POINT,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupsError {
    #[error("ping-pong disks are not separated; increase the separation parameter")]
    InvalidSeparation,
    #[error("commutator trace {0} is not below -2; the group may not be discrete and free")]
    NotFree(f64),
    #[error("octagon side pairing failed the relator check (residual {0})")]
    PairingFailure(f64),
    #[error("count window too small for a slope estimate")]
    WindowTooSmall,
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// Battery of reduced words in a free generating set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WordBattery {
    pub rank: usize,
    pub max_len: usize,
    pub cyclically_reduced: bool,
}

impl WordBattery {
    pub fn new(rank: usize, max_len: usize, cyclically_reduced: bool) -> Self {
        Self { rank, max_len, cyclically_reduced }
    }

    /// Number of plain reduced words of exactly length `n` over rank `k`:
    /// `2k (2k-1)^(n-1)`.
    pub fn reduced_count(rank: usize, n: usize) -> u64 {
        if n == 0 {
            return 1;
        }
        let k = rank as u64;
        2 * k * (2 * k - 1).pow((n - 1) as u32)
    }

    /// Streams the battery without materializing it.
    pub fn for_each(&self, mut f: impl FnMut(&Word)) {
        let letters: Vec<i32> = (1..=self.rank as i32)
            .flat_map(|i| [i, -i])
            .collect();
        let mut stack: Vec<i32> = Vec::with_capacity(self.max_len);
        fn rec(
            letters: &[i32],
            stack: &mut Vec<i32>,
            max_len: usize,
            cyclic: bool,
            f: &mut impl FnMut(&Word),
        ) {
            if !stack.is_empty() {
                let ok_cyclic = !cyclic || stack.first() != stack.last().map(|&l| -l).as_ref();
                if ok_cyclic {
                    f(&Word::from_letters(stack));
                }
            }
            if stack.len() == max_len {
                return;
            }
            for &l in letters {
                if stack.last() == Some(&-l) {
                    continue;
                }
                stack.push(l);
                rec(letters, stack, max_len, cyclic, f);
                stack.pop();
            }
        }
        rec(&letters, &mut stack, self.max_len, self.cyclically_reduced, &mut f);
    }

    pub fn collect_words(&self) -> Vec<Word> {
        let mut out = Vec::new();
        self.for_each(|w| out.push(w.clone()));
        out
    }

    pub fn len(&self) -> usize {
        let mut n = 0;
        self.for_each(|_| n += 1);
        n
    }

    pub fn is_empty(&self) -> bool {
        self.max_len == 0 || self.rank == 0
    }
}

/// Classical two-generator group: a diagonal translation and a conjugate
/// translation along a disjoint axis, validated by a ping-pong disk check.
///
/// `separation` is the common translation multiplier (the diagonal entry);
/// the default 4 gives comfortably disjoint disks.
pub fn schottky_fuchsian(separation: f64) -> Result<Representation, GroupsError> {
    let a = MoebiusElement::from_real(separation, 0.0, 0.0, 1.0 / separation)?;
    // second generator along the axis (1, 3)
    let q = MoebiusElement::from_real(3.0, 1.0, 1.0, 1.0)?;
    let b = q
        .compose(&MoebiusElement::from_real(separation, 0.0, 0.0, 1.0 / separation)?)
        .compose(&q.inverse());
    // ping-pong disks: |z| <= 1/s and |z| >= s for `a`; images of those
    // disks under q for `b`. Disks are tracked by their real diameters.
    let s = separation;
    let b_disk_1 = {
        let lo = mobius_apply_h2(&q, Complex64::new(-1.0 / s, 0.0)).re;
        let hi = mobius_apply_h2(&q, Complex64::new(1.0 / s, 0.0)).re;
        (lo.min(hi), lo.max(hi))
    };
    let b_disk_2 = {
        let lo = mobius_apply_h2(&q, Complex64::new(-s, 0.0)).re;
        let hi = mobius_apply_h2(&q, Complex64::new(s, 0.0)).re;
        (lo.min(hi), lo.max(hi))
    };
    let inside_annulus = |d: (f64, f64)| d.0 > 1.0 / s && d.1 < s;
    let disjoint = |x: (f64, f64), y: (f64, f64)| x.1 < y.0 || y.1 < x.0;
    if !(inside_annulus(b_disk_1) && inside_annulus(b_disk_2) && disjoint(b_disk_1, b_disk_2)) {
        return Err(GroupsError::InvalidSeparation);
    }
    Ok(Representation::new(
        vec!['a', 'b'],
        vec![a, b],
        vec![],
        Complex64::new(0.05, 1.0),
    ))
}

/// Two-generator free group with linked axes (a handle rather than a pair of
/// pants): the axis of `a` is `(0, inf)`, the axis of `b` is `(-1, 3)`, so
/// words in both generators cross the orbit of either axis. Discreteness is
/// validated through the commutator trace.
pub fn linked_pair_fuchsian(la: f64, lb: f64) -> Result<Representation, GroupsError> {
    let a = MoebiusElement::from_real((la / 2.0).exp(), 0.0, 0.0, (-la / 2.0).exp())?;
    let q = MoebiusElement::from_real(3.0, -1.0, 1.0, 1.0)?; // (0, inf) -> (-1, 3)
    let b = q
        .compose(&MoebiusElement::from_real((lb / 2.0).exp(), 0.0, 0.0, (-lb / 2.0).exp())?)
        .compose(&q.inverse());
    let comm = a
        .compose(&b)
        .compose(&a.inverse())
        .compose(&b.inverse());
    let t = comm.trace().re;
    if !(t < -2.0) {
        return Err(GroupsError::NotFree(t));
    }
    Ok(Representation::new(
        vec!['a', 'b'],
        vec![a, b],
        vec![],
        Complex64::new(0.17, 1.09),
    ))
}

/// Cayley transform from the unit disk to the upper half-plane.
fn disk_to_uhp(w: Complex64) -> Complex64 {
    Complex64::new(0.0, 1.0) * (1.0 + w) / (1.0 - w)
}

/// Unit tangent direction at `i` of the geodesic from `i` toward `w`.
fn tangent_at_i(w: Complex64) -> (f64, f64) {
    if w.re.abs() < 1e-13 {
        return (0.0, if w.im > 1.0 { 1.0 } else { -1.0 });
    }
    let xi = (w.norm_sqr() - 1.0) / (2.0 * w.re);
    let n = (1.0 + xi * xi).sqrt();
    let (tx, ty) = (1.0 / n, xi / n);
    let chord = (w.re, w.im - 1.0);
    if tx * chord.0 + ty * chord.1 >= 0.0 {
        (tx, ty)
    } else {
        (-tx, -ty)
    }
}

/// Orientation-preserving isometry of the upper half-plane taking the
/// ordered pair `(p, q)` to `(p2, q2)`; requires equal distances.
fn isometry_taking(p: Complex64, q: Complex64, p2: Complex64, q2: Complex64) -> MoebiusElement {
    let to_i = |x: Complex64| {
        MoebiusElement::from_real(1.0 / x.im.sqrt(), -x.re / x.im.sqrt(), 0.0, x.im.sqrt())
            .expect("interior point")
    };
    let t1 = to_i(p);
    let t2 = to_i(p2);
    let w1 = mobius_apply_h2(&t1, q);
    let w2 = mobius_apply_h2(&t2, q2);
    let (x1, y1) = tangent_at_i(w1);
    let (x2, y2) = tangent_at_i(w2);
    let psi = y2.atan2(x2) - y1.atan2(x1);
    let rot = MoebiusElement::from_real(
        (psi / 2.0).cos(),
        (psi / 2.0).sin(),
        -(psi / 2.0).sin(),
        (psi / 2.0).cos(),
    )
    .expect("rotation");
    t2.inverse().compose(&rot).compose(&t1)
}

/// Genus-two surface group from the regular octagon with interior angles
/// `pi/4` and side labels `a b a' b' c d c' d'`, single relator
/// `[a,b][c,d]`.
pub fn genus2_fuchsian() -> Result<Representation, GroupsError> {
    // disk-model vertices of the regular octagon with vertex angle pi/4:
    // the circumradius R of a regular n-gon with vertex angle 2B satisfies
    // cosh R = cot(pi/n) cot(B), here cot(pi/8)^2 = 3 + 2 sqrt 2
    let r_h = (3.0 + 2.0 * 2.0_f64.sqrt()).acosh();
    let r_e = (r_h / 2.0).tanh();
    let verts_uhp: Vec<Complex64> = (0..8)
        .map(|k| {
            let phi = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / 8.0;
            disk_to_uhp(Complex64::from_polar(r_e, phi))
        })
        .collect();
    let v = |k: usize| verts_uhp[k % 8];
    // generator x pairs the side labeled x' onto the side labeled x,
    // reversing the boundary orientation; try both assignments per
    // generator and keep the pattern satisfying the relator
    let pairs = [(0usize, 2usize), (1, 3), (4, 6), (5, 7)];
    let forward: Vec<MoebiusElement> = pairs
        .iter()
        .map(|&(i, j)| isometry_taking(v(j), v(j + 1), v(i + 1), v(i)))
        .collect();
    let names = vec!['a', 'b', 'c', 'd'];
    let relator_letters = [1, 2, -1, -2, 3, 4, -3, -4];
    let mut best: Option<(f64, Vec<MoebiusElement>)> = None;
    for mask in 0..16_u32 {
        let gens: Vec<MoebiusElement> = forward
            .iter()
            .enumerate()
            .map(|(k, g)| if mask & (1 << k) != 0 { g.inverse() } else { *g })
            .collect();
        let rep = Representation::new(
            names.clone(),
            gens.clone(),
            vec![Word::from_letters(&relator_letters)],
            Complex64::new(0.0, 1.0),
        );
        let res = rep.relator_residual();
        if best.as_ref().map_or(true, |(b, _)| res < *b) {
            best = Some((res, gens));
        }
    }
    let (res, gens) = best.expect("nonempty search");
    if res > 1e-9 {
        return Err(GroupsError::PairingFailure(res));
    }
    Ok(Representation::new(
        names,
        gens,
        vec![Word::from_letters(&relator_letters)],
        Complex64::new(0.07, 1.03),
    ))
}

/// Real translation length of a loxodromic image: the real part of the
/// complex length, equal to twice the leading Jordan coordinate.
pub fn translation_length<E: WordEvaluator>(rho: &E, w: &Word) -> Result<f64, MoebiusError> {
    complex_length(&rho.evaluate_word(w)).map(|l| l.re)
}

/// One limit-set sample: a word, its attracting fixed point, and its
/// translation length.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitPoint {
    pub word: String,
    pub point_re: f64,
    pub point_im: f64,
    pub is_infinity: bool,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct OrbitSample {
    pub points: Vec<OrbitPoint>,
    pub skipped_non_loxodromic: usize,
}

/// Attracting fixed points of the loxodromic battery images, deduplicated
/// within point tolerance.
pub fn limit_set_sample<E: WordEvaluator>(rho: &E, battery: &WordBattery) -> OrbitSample {
    let mut out = OrbitSample::default();
    let mut seen: Vec<BoundaryPoint> = Vec::new();
    battery.for_each(|w| {
        let m = rho.evaluate_word(w);
        if !m.is_loxodromic() {
            out.skipped_non_loxodromic += 1;
            return;
        }
        let Ok((att, _)) = fixed_points(&m) else {
            out.skipped_non_loxodromic += 1;
            return;
        };
        if seen.iter().any(|p| p.approx_eq(&att, EPS_POINT.max(1e-10))) {
            return;
        }
        seen.push(att);
        let l = complex_length(&m).map(|l| l.re).unwrap_or(0.0);
        let (re, im, inf) = match att {
            BoundaryPoint::Finite(z) => (z.re, z.im, false),
            BoundaryPoint::Infinity => (0.0, 0.0, true),
        };
        out.points.push(OrbitPoint {
            word: format!("{w}"),
            point_re: re,
            point_im: im,
            is_infinity: inf,
            length: l,
        });
    });
    out
}

/// Result of the orbit-counting slope estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// Rough standard error of the least-squares slope.
    pub stderr: f64,
    pub window: (f64, f64),
    pub grid_points: usize,
    pub elements_counted: usize,
    pub truncation_warning: bool,
}

const ENTROPY_GRID: f64 = 0.25;

/// Estimates the critical exponent of the orbit-counting series: the slope
/// of `log N(T)` against `T`, where `N(T)` counts distinct orbit points of
/// the basepoint within distance `T`, restricted to a window where counting
/// is not truncation-dominated.
///
/// The enumeration walks reduced words up to `max_len`, pruning branches
/// whose running distance exceeds the cap by a fellow-traveling slack, and
/// deduplicates elements by their matrix.
pub fn critical_exponent_estimate(
    rep: &Representation,
    max_len: usize,
    distance_cap: f64,
) -> Result<EntropyEstimate, GroupsError> {
    let x0 = rep.basepoint;
    let slack = 6.0;
    let letters: Vec<MoebiusElement> = rep
        .gens
        .iter()
        .cloned()
        .chain(rep.gens.iter().map(|g| g.inverse()))
        .collect();
    let nl = letters.len();

    type Map = HashMap<[i64; 8], (f64, usize)>;
    fn key_of(m: &MoebiusElement) -> [i64; 8] {
        // canonical sign: first entry of significant modulus gets a positive
        // leading component
        let entries = [m.a, m.b, m.c, m.d];
        let mut sign = 1.0;
        for e in entries {
            if e.norm() > 1e-7 {
                sign = if e.re.abs() > 1e-9 { e.re.signum() } else { e.im.signum() };
                break;
            }
        }
        let q = 1e6;
        let mut k = [0_i64; 8];
        for (i, e) in entries.iter().enumerate() {
            k[2 * i] = (sign * e.re * q).round() as i64;
            k[2 * i + 1] = (sign * e.im * q).round() as i64;
        }
        k
    }

    struct Walker<'a> {
        letters: &'a [MoebiusElement],
        x0: Complex64,
        cap: f64,
        slack: f64,
        max_len: usize,
        map: Map,
    }
    impl Walker<'_> {
        fn rec(&mut self, m: &MoebiusElement, last: usize, len: usize) {
            let d = moebius::dist_h2(mobius_apply_h2(m, self.x0), self.x0);
            if d > self.cap + self.slack {
                return;
            }
            if d <= self.cap {
                let k = key_of(m);
                let e = self.map.entry(k).or_insert((d, len));
                if len < e.1 {
                    *e = (d, len);
                }
            }
            if len == self.max_len {
                return;
            }
            for (i, g) in self.letters.iter().enumerate() {
                if len > 0 && (i + self.letters.len() / 2) % self.letters.len() == last {
                    continue; // avoid immediate cancellation
                }
                let next = m.compose(g);
                self.rec(&next, i, len + 1);
            }
        }
    }

    let maps: Vec<Map> = (0..nl)
        .into_par_iter()
        .map(|first| {
            let mut w = Walker {
                letters: &letters,
                x0,
                cap: distance_cap,
                slack,
                max_len,
                map: Map::new(),
            };
            w.rec(&letters[first].clone(), first, 1);
            w.map
        })
        .collect();
    let mut all: Map = Map::new();
    for m in maps {
        for (k, v) in m {
            let e = all.entry(k).or_insert(v);
            if v.1 < e.1 {
                *e = v;
            }
        }
    }

    // cumulative counts on a grid, for the full battery and two letters less
    let grid_n = (distance_cap / ENTROPY_GRID).ceil() as usize + 1;
    let mut full = vec![0_u64; grid_n];
    let mut shorter = vec![0_u64; grid_n];
    for (_, &(d, minlen)) in all.iter() {
        let idx = (d / ENTROPY_GRID).floor() as usize;
        if idx < grid_n {
            full[idx] += 1;
            if minlen + 2 <= max_len {
                shorter[idx] += 1;
            }
        }
    }
    for i in 1..grid_n {
        full[i] += full[i - 1];
        shorter[i] += shorter[i - 1];
    }

    // stabilized threshold: largest T where the two budgets agree
    let mut stable_idx = 0;
    for i in 0..grid_n {
        if full[i] == shorter[i] {
            stable_idx = i;
        } else {
            break;
        }
    }
    let t_hi = stable_idx as f64 * ENTROPY_GRID;
    let truncation_warning = stable_idx + 1 < grid_n;
    let span = (t_hi * 0.45).clamp(2.0, 5.0);
    let t_lo = (t_hi - span).max(0.5);

    // least squares on log N over the window, requiring enough mass
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=stable_idx {
        let t = i as f64 * ENTROPY_GRID;
        if t < t_lo || full[i] < 20 {
            continue;
        }
        xs.push(t);
        ys.push((full[i] as f64).ln());
    }
    if xs.len() < 5 {
        return Err(GroupsError::WindowTooSmall);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let p = my + slope * (x - mx);
            (y - p) * (y - p)
        })
        .sum();
    let stderr = (resid / (n - 2.0).max(1.0) / sxx).sqrt();
    Ok(EntropyEstimate {
        value: slope,
        stderr,
        window: (t_lo, t_hi),
        grid_points: xs.len(),
        elements_counted: all.len(),
        truncation_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::margulis::{cartan_projection, jordan_projection, CMatrix};

    #[test]
    fn battery_counts_match_formula() {
        for k in 1..=3 {
            for n in 1..=5 {
                let battery = WordBattery::new(k, n, false);
                let total: u64 = (1..=n).map(|m| WordBattery::reduced_count(k, m)).sum();
                assert_eq!(battery.len() as u64, total, "rank {k} length {n}");
            }
        }
        // cyclically reduced subset is strictly smaller once n >= 2
        let plain = WordBattery::new(2, 4, false).len();
        let cyc = WordBattery::new(2, 4, true).len();
        assert!(cyc < plain);
    }

    #[test]
    fn schottky_construction() {
        let rep = schottky_fuchsian(4.0).unwrap();
        assert!(rep.is_real());
        // all words up to length 6 are loxodromic with |trace| > 2
        let battery = WordBattery::new(2, 6, false);
        battery.for_each(|w| {
            let m = rep.evaluate_word(w);
            assert!(m.trace().re.abs() > 2.0 + 1e-9, "word {w} must be hyperbolic");
        });
        // limit set on the real line
        let sample = limit_set_sample(&rep, &WordBattery::new(2, 4, false));
        assert_eq!(sample.skipped_non_loxodromic, 0);
        for p in &sample.points {
            assert!(p.is_infinity || p.point_im.abs() < 1e-9);
        }
        assert!(schottky_fuchsian(1.05).is_err(), "tight parameter fails validation");
    }

    #[test]
    fn linked_pair_is_free_and_crossing() {
        let rep = linked_pair_fuchsian(2.0, 2.2).unwrap();
        let a = &rep.gens[0];
        let b = &rep.gens[1];
        let ax_a = moebius::axis(a).unwrap();
        let ax_b = moebius::axis(b).unwrap();
        let kind = crate::lamination::geodesics_cross(&ax_a, &ax_b).unwrap();
        assert_eq!(kind, crate::lamination::CrossKind::Cross, "axes are linked");
        assert!(linked_pair_fuchsian(0.4, 0.4).is_err(), "short lengths are rejected");
    }

    #[test]
    fn genus2_relator_and_symmetry() {
        let rep = genus2_fuchsian().unwrap();
        assert!(rep.relator_residual() < 1e-9, "defining relator");
        // side-pairing translation lengths agree across generators
        let lengths: Vec<f64> = (1..=4)
            .map(|i| translation_length(&rep, &Word::from_letters(&[i])).unwrap())
            .collect();
        for l in &lengths {
            assert!((l - lengths[0]).abs() < 1e-9, "equal side-pairing lengths");
            // the side-pairing generators have trace 2 + sqrt 2
            assert!((l - 2.0 * ((2.0 + 2.0_f64.sqrt()) / 2.0).acosh()).abs() < 1e-9);
        }
        // short words are loxodromic
        let battery = WordBattery::new(4, 3, true);
        let mut loxo = 0;
        battery.for_each(|w| {
            if rep.evaluate_word(w).is_loxodromic() {
                loxo += 1;
            }
        });
        assert_eq!(loxo, battery.len(), "every short word is loxodromic");
        // separating curve word
        let sep = rep.word("abAB");
        assert!(rep.evaluate_word(&sep).is_loxodromic());
    }

    #[test]
    fn genus2_relator_stable_under_conjugation() {
        let rep = genus2_fuchsian().unwrap();
        let relator = rep.relators[0].clone();
        let battery = WordBattery::new(4, 3, false);
        let mut max_res = 0.0_f64;
        battery.for_each(|w| {
            let conj = w.concat(&relator).concat(&w.inverse());
            let res = rep
                .evaluate_word(&conj)
                .projective_distance(&MoebiusElement::identity());
            max_res = max_res.max(res);
        });
        assert!(max_res < 1e-9, "conjugated relators stay at the identity: {max_res}");
    }

    #[test]
    fn translation_length_consistency() {
        let rep = linked_pair_fuchsian(2.0, 2.2).unwrap();
        let w = rep.word("abAbb");
        let l = translation_length(&rep, &w).unwrap();
        assert!(l > 0.0);
        let j = jordan_projection(&CMatrix::from_moebius(&rep.evaluate_word(&w))).unwrap();
        assert!((l - 2.0 * j.first()).abs() < 1e-10, "length equals twice the top Jordan entry");
        // powers and conjugates
        let w3 = w.concat(&w).concat(&w);
        assert!((translation_length(&rep, &w3).unwrap() - 3.0 * l).abs() < 1e-9);
        let c = rep.word("b").concat(&w).concat(&rep.word("B"));
        assert!((translation_length(&rep, &c).unwrap() - l).abs() < 1e-9);
        // jordan vs cartan on a battery
        let battery = WordBattery::new(2, 4, false);
        battery.for_each(|v| {
            let m = CMatrix::from_moebius(&rep.evaluate_word(v));
            let j = jordan_projection(&m).unwrap();
            let k = cartan_projection(&m);
            assert!(k.first() >= j.first() - 1e-10);
        });
    }

    #[test]
    fn cyclic_group_entropy_near_zero() {
        let rep = Representation::new(
            vec!['a'],
            vec![MoebiusElement::from_real(2.0, 0.0, 0.0, 0.5).unwrap()],
            vec![],
            Complex64::new(0.0, 1.0),
        );
        let est = critical_exponent_estimate(&rep, 14, 16.0).unwrap();
        assert!(est.value.abs() < 0.2, "linear orbit growth: slope {}", est.value);
    }

    #[test]
    fn free_group_entropy_positive() {
        let rep = linked_pair_fuchsian(2.0, 2.2).unwrap();
        let est = critical_exponent_estimate(&rep, 11, 10.0).unwrap();
        assert!(est.value > 0.3, "exponential growth: slope {}", est.value);
        assert!(est.elements_counted > 100);
    }
}
