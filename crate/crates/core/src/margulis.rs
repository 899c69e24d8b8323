//! Jordan and Cartan projections, standard-form conjugators and flag angles,
//! the Margulis invariant, cocycles from bending deformations, normalized
//! Margulis spectra over word batteries, and the properness verdict.
//!
//! All types are dimension-generic; the 2x2 case goes through closed-form
//! eigenvalue formulas, higher dimensions through a Hessenberg/shifted-QR
//! eigensolver and Jacobi iteration for singular values.

use crate::bending::{BendingError, BentRepresentation, DirectionSystem, Word, WordEvaluator};
use crate::moebius::MoebiusElement;
use crate::numeric;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MargulisError {
    #[error("element is not loxodromic (eigenvalue moduli too close)")]
    NotLoxodromic,
    #[error("matrix is not traceless (|trace| = {0})")]
    NotTraceless(f64),
    #[error("word battery is empty")]
    EmptyBattery,
    #[error("eigensolver failed to converge")]
    EigenFailure,
    #[error(transparent)]
    Bending(#[from] BendingError),
}

/// Dense square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub d: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(d: usize) -> Self {
        Self { d, data: vec![Complex64::new(0.0, 0.0); d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let d = rows.len();
        let mut m = Self::zeros(d);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), d);
            for j in 0..d {
                m[(i, j)] = r[j];
            }
        }
        m
    }

    pub fn from_moebius(g: &MoebiusElement) -> Self {
        Self { d: 2, data: vec![g.a, g.b, g.c, g.d] }
    }

    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.d, rhs.d);
        let d = self.d;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let d = self.d;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self[(j, i)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.d).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix { d: self.d, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            d: self.d,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            d: self.d,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Solves `self * x = b` by partial-pivot elimination.
    pub fn solve(&self, b: &[Complex64]) -> Option<Vec<Complex64>> {
        let d = self.d;
        let mut a = self.data.clone();
        let mut x: Vec<Complex64> = b.to_vec();
        for col in 0..d {
            let mut piv = col;
            for r in (col + 1)..d {
                if a[r * d + col].norm() > a[piv * d + col].norm() {
                    piv = r;
                }
            }
            if a[piv * d + col].norm() < 1e-300 {
                return None;
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                }
                x.swap(col, piv);
            }
            let p = a[col * d + col];
            for r in (col + 1)..d {
                let f = a[r * d + col] / p;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in col..d {
                    let v = a[col * d + j];
                    a[r * d + j] -= f * v;
                }
                let xv = x[col];
                x[r] -= f * xv;
            }
        }
        for col in (0..d).rev() {
            let mut v = x[col];
            for j in (col + 1)..d {
                v -= a[col * d + j] * x[j];
            }
            x[col] = v / a[col * d + col];
        }
        Some(x)
    }

    pub fn det(&self) -> Complex64 {
        let d = self.d;
        let mut a = self.data.clone();
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..d {
            let mut piv = col;
            for r in (col + 1)..d {
                if a[r * d + col].norm() > a[piv * d + col].norm() {
                    piv = r;
                }
            }
            if a[piv * d + col].norm() < 1e-300 {
                return Complex64::new(0.0, 0.0);
            }
            if piv != col {
                for j in 0..d {
                    a.swap(col * d + j, piv * d + j);
                }
                det = -det;
            }
            let p = a[col * d + col];
            det *= p;
            for r in (col + 1)..d {
                let f = a[r * d + col] / p;
                for j in col..d {
                    let v = a[col * d + j];
                    a[r * d + j] -= f * v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<CMatrix> {
        let d = self.d;
        let mut out = CMatrix::zeros(d);
        for j in 0..d {
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e)?;
            for i in 0..d {
                out[(i, j)] = col[i];
            }
        }
        Some(out)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.d + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.d + j]
    }
}

/// Traceless complex matrix (an element of the Lie algebra).
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessMatrix(pub CMatrix);

impl TracelessMatrix {
    pub fn new(m: CMatrix) -> Result<Self, MargulisError> {
        let t = m.trace().norm();
        if t > 1e-10 * m.frobenius_norm().max(1.0) {
            return Err(MargulisError::NotTraceless(t));
        }
        Ok(Self(m))
    }

    pub fn sl2(a: Complex64, b: Complex64, c: Complex64) -> Self {
        Self(CMatrix { d: 2, data: vec![a, b, c, -a] })
    }

    pub fn from_entries(entries: [Complex64; 4]) -> Result<Self, MargulisError> {
        Self::new(CMatrix { d: 2, data: entries.to_vec() })
    }

    pub fn zero(d: usize) -> Self {
        Self(CMatrix::zeros(d))
    }

    pub fn norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn add(&self, rhs: &TracelessMatrix) -> TracelessMatrix {
        TracelessMatrix(self.0.add(&rhs.0))
    }

    pub fn scale(&self, s: Complex64) -> TracelessMatrix {
        TracelessMatrix(self.0.scale(s))
    }
}

/// Sorted zero-sum vector of logarithms (Jordan or Cartan projection value).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CartanVector(pub Vec<f64>);

impl CartanVector {
    fn from_logs(mut logs: Vec<f64>) -> Self {
        logs.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        let mean: f64 = logs.iter().sum::<f64>() / logs.len() as f64;
        for v in &mut logs {
            *v -= mean;
        }
        Self(logs)
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }
}

/// Zero-sum complex diagonal (an element of the model Cartan subalgebra).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalInvariant(pub Vec<Complex64>);

impl DiagonalInvariant {
    pub fn first(&self) -> Complex64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

// ---------------------------------------------------------------------------
// eigen machinery

/// Eigenvalues of a complex matrix: closed form for d = 2, Hessenberg +
/// shifted QR for d > 2.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, MargulisError> {
    let d = m.d;
    if d == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    if d == 2 {
        let t = m.trace();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let mut s = (t * t - 4.0 * det).sqrt();
        if (t.conj() * s).re < 0.0 {
            s = -s;
        }
        let l1 = (t + s) / 2.0;
        let l2 = if l1.norm() > 1e-150 { det / l1 } else { (t - s) / 2.0 };
        return Ok(vec![l1, l2]);
    }
    qr_eigenvalues(m)
}

fn qr_eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>, MargulisError> {
    let d = m.d;
    // Hessenberg reduction by Householder reflections
    let mut a = m.clone();
    for k in 0..d.saturating_sub(2) {
        let mut x: Vec<Complex64> = (k + 1..d).map(|i| a[(i, k)]).collect();
        let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nx < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        x[0] += phase * nx;
        let nv = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nv < 1e-300 {
            continue;
        }
        for v in &mut x {
            *v /= nv;
        }
        // apply I - 2 v v^* from both sides
        for j in 0..d {
            let s: Complex64 = (0..x.len()).map(|i| x[i].conj() * a[(k + 1 + i, j)]).sum();
            for i in 0..x.len() {
                let upd = 2.0 * x[i] * s;
                a[(k + 1 + i, j)] -= upd;
            }
        }
        for i in 0..d {
            let s: Complex64 = (0..x.len()).map(|j| a[(i, k + 1 + j)] * x[j]).sum();
            for j in 0..x.len() {
                let upd = 2.0 * s * x[j].conj();
                a[(i, k + 1 + j)] -= upd;
            }
        }
    }
    // shifted QR on the Hessenberg form (via Givens rotations)
    let mut n = d;
    let mut vals = Vec::with_capacity(d);
    let mut iter = 0;
    while n > 0 {
        if n == 1 {
            vals.push(a[(0, 0)]);
            break;
        }
        // deflate when a subdiagonal entry is negligible
        let mut deflated = false;
        for i in (1..n).rev() {
            let s = a[(i - 1, i - 1)].norm() + a[(i, i)].norm();
            if a[(i, i - 1)].norm() <= 1e-14 * s.max(1e-300) {
                if i == n - 1 {
                    vals.push(a[(n - 1, n - 1)]);
                    n -= 1;
                    deflated = true;
                    break;
                }
            }
        }
        if deflated {
            continue;
        }
        iter += 1;
        if iter > 500 * d {
            return Err(MargulisError::EigenFailure);
        }
        // Wilkinson-like shift from the trailing 2x2 block
        let t = a[(n - 2, n - 2)] + a[(n - 1, n - 1)];
        let det = a[(n - 2, n - 2)] * a[(n - 1, n - 1)] - a[(n - 2, n - 1)] * a[(n - 1, n - 2)];
        let mut s = (t * t - 4.0 * det).sqrt();
        if (t.conj() * s).re < 0.0 {
            s = -s;
        }
        let mu1 = (t + s) / 2.0;
        let mu2 = (t - s) / 2.0;
        let shift = if (mu1 - a[(n - 1, n - 1)]).norm() < (mu2 - a[(n - 1, n - 1)]).norm() {
            mu1
        } else {
            mu2
        };
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        // QR step with Givens rotations on the Hessenberg matrix
        let mut rots: Vec<(usize, Complex64, Complex64)> = Vec::with_capacity(n - 1);
        for i in 0..(n - 1) {
            let (f, g) = (a[(i, i)], a[(i + 1, i)]);
            let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
            if r < 1e-300 {
                rots.push((i, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
                continue;
            }
            let c = f / r;
            let sg = g / r;
            for j in 0..n {
                let (x, y) = (a[(i, j)], a[(i + 1, j)]);
                a[(i, j)] = c.conj() * x + sg.conj() * y;
                a[(i + 1, j)] = -sg * x + c * y;
            }
            rots.push((i, c, sg));
        }
        for &(i, c, sg) in &rots {
            for j in 0..n {
                let (x, y) = (a[(j, i)], a[(j, i + 1)]);
                a[(j, i)] = x * c + y * sg;
                a[(j, i + 1)] = -x * sg.conj() + y * c.conj();
            }
        }
        for i in 0..n {
            a[(i, i)] += shift;
        }
    }
    vals.reverse();
    Ok(vals)
}

/// Unit eigenvector for a given eigenvalue by inverse iteration.
fn eigenvector(m: &CMatrix, lambda: Complex64) -> Result<Vec<Complex64>, MargulisError> {
    let d = m.d;
    if d == 2 {
        // rows of (m - lambda) are orthogonal to the eigenvector
        let r1 = [m[(0, 0)] - lambda, m[(0, 1)]];
        let r2 = [m[(1, 0)], m[(1, 1)] - lambda];
        let v1 = [-r1[1], r1[0]];
        let v2 = [-r2[1], r2[0]];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        let v = if n1 >= n2 { [v1[1], -v1[0]] } else { [v2[1], -v2[0]] };
        // v above is (x, y) with r . (x, y) = 0: for r = (p, q), take (-q, p)
        let v = [v[1], -v[0]];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n < 1e-300 {
            return Err(MargulisError::EigenFailure);
        }
        return Ok(vec![v[0] / n, v[1] / n]);
    }
    // inverse iteration with a slightly perturbed shift
    let mut shifted = m.clone();
    let eps = 1e-10 * m.frobenius_norm().max(1.0);
    for i in 0..d {
        shifted[(i, i)] -= lambda + Complex64::new(eps, eps / 2.0);
    }
    let mut v: Vec<Complex64> = (0..d)
        .map(|i| Complex64::new(1.0 + (i as f64) * 0.3, 0.7 - (i as f64) * 0.2))
        .collect();
    for _ in 0..4 {
        let w = shifted.solve(&v).ok_or(MargulisError::EigenFailure)?;
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-300 {
            return Err(MargulisError::EigenFailure);
        }
        v = w.into_iter().map(|z| z / n).collect();
    }
    Ok(v)
}

/// Singular values by Jacobi iteration on the Hermitian product.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let d = m.d;
    if d == 2 {
        let n = m.frobenius_norm().powi(2);
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
        let disc = (n * n - 4.0 * det * det).max(0.0).sqrt();
        let s1 = ((n + disc) / 2.0).sqrt();
        let s2 = if s1 > 0.0 { det / s1 } else { 0.0 };
        return vec![s1, s2];
    }
    let mut h = m.adjoint().mul(m);
    // cyclic Jacobi sweeps
    for _ in 0..60 {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += h[(p, q)].norm_sqr();
            }
        }
        if off < 1e-28 * h.frobenius_norm().powi(2).max(1e-300) {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let hpq = h[(p, q)];
                if hpq.norm() < 1e-300 {
                    continue;
                }
                let hpp = h[(p, p)].re;
                let hqq = h[(q, q)].re;
                let phase = hpq / hpq.norm();
                let tau = (hqq - hpp) / (2.0 * hpq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // rotate in the (p, q) plane with the phase of hpq
                for k in 0..d {
                    let hk_p = h[(k, p)];
                    let hk_q = h[(k, q)];
                    h[(k, p)] = hk_p * c - hk_q * s * phase.conj();
                    h[(k, q)] = hk_p * s * phase + hk_q * c;
                }
                for k in 0..d {
                    let hp_k = h[(p, k)];
                    let hq_k = h[(q, k)];
                    h[(p, k)] = hp_k * c - hq_k * s * phase;
                    h[(q, k)] = hp_k * s * phase.conj() + hq_k * c;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..d).map(|i| h[(i, i)].re.max(0.0).sqrt()).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    vals
}

/// Normalizes a matrix to determinant one (projectively harmless).
fn unit_det(m: &CMatrix) -> CMatrix {
    let det = m.det();
    let d = m.d as f64;
    let s = det.powf(1.0 / d);
    m.scale(1.0 / s)
}

/// Jordan projection: sorted logarithms of eigenvalue moduli of a unit
/// determinant lift.
pub fn jordan_projection(m: &CMatrix) -> Result<CartanVector, MargulisError> {
    let normalized = unit_det(m);
    let vals = eigenvalues(&normalized)?;
    Ok(CartanVector::from_logs(vals.iter().map(|l| l.norm().max(1e-300).ln()).collect()))
}

/// Cartan projection: sorted logarithms of singular values of a unit
/// determinant lift.
pub fn cartan_projection(m: &CMatrix) -> CartanVector {
    let normalized = unit_det(m);
    let vals = singular_values(&normalized);
    CartanVector::from_logs(vals.iter().map(|s| s.max(1e-300).ln()).collect())
}

/// Standard-form data of a loxodromic element.
#[derive(Debug, Clone)]
pub struct StandardForm {
    /// Conjugator: `psi * g * psi^{-1}` is diagonal with decreasing moduli.
    pub psi: CMatrix,
    pub psi_inv: CMatrix,
    /// Eigenvalues in decreasing modulus order.
    pub diagonal: Vec<Complex64>,
    /// Smallest principal angle between complementary eigenflag pairs.
    pub flag_angle: f64,
    /// Operator-norm proxy (largest singular value) of `psi`.
    pub psi_norm: f64,
    pub ill_conditioned: bool,
}

/// Conjugates a loxodromic element into diagonal standard form. `psi` is
/// assembled from unit eigenvectors and scaled to determinant one, so the
/// norm report is meaningful.
pub fn standard_form(m: &CMatrix) -> Result<StandardForm, MargulisError> {
    let normalized = unit_det(m);
    let mut vals = eigenvalues(&normalized)?;
    vals.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite"));
    let d = m.d;
    for i in 1..d {
        if (vals[i - 1].norm() - vals[i].norm()).abs()
            < crate::moebius::EPS_LOXODROMIC * vals[0].norm().max(1.0)
        {
            return Err(MargulisError::NotLoxodromic);
        }
    }
    // columns of V are unit eigenvectors; psi = V^{-1}
    let mut v = CMatrix::zeros(d);
    for (j, lambda) in vals.iter().enumerate() {
        let col = eigenvector(&normalized, *lambda)?;
        for i in 0..d {
            v[(i, j)] = col[i];
        }
    }
    let v = {
        // scale to determinant one
        let det = v.det();
        if det.norm() < 1e-300 {
            return Err(MargulisError::EigenFailure);
        }
        v.scale(1.0 / det.powf(1.0 / d as f64))
    };
    let psi = v.inverse().ok_or(MargulisError::EigenFailure)?;
    // flag angles: min over i of angle(E_i, F_{d-i})
    let mut flag_angle = std::f64::consts::FRAC_PI_2;
    for i in 1..d {
        let a = principal_angle(&v, 0..i, i..d);
        flag_angle = flag_angle.min(a);
    }
    let psi_norm = *singular_values(&psi).first().expect("nonempty");
    Ok(StandardForm {
        psi_inv: v,
        psi,
        diagonal: vals,
        flag_angle,
        psi_norm,
        ill_conditioned: flag_angle < 1e-6,
    })
}

/// Smallest principal angle between the spans of two column ranges.
fn principal_angle(
    v: &CMatrix,
    left: std::ops::Range<usize>,
    right: std::ops::Range<usize>,
) -> f64 {
    let d = v.d;
    let ortho = |cols: std::ops::Range<usize>| -> Vec<Vec<Complex64>> {
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for j in cols {
            let mut w: Vec<Complex64> = (0..d).map(|i| v[(i, j)]).collect();
            for b in &basis {
                let dot: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for i in 0..d {
                    w[i] -= dot * b[i];
                }
            }
            let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-14 {
                basis.push(w.into_iter().map(|z| z / n).collect());
            }
        }
        basis
    };
    let bl = ortho(left);
    let br = ortho(right);
    // largest singular value of the Gram matrix gives cos of the smallest angle
    if bl.is_empty() || br.is_empty() {
        return std::f64::consts::FRAC_PI_2;
    }
    let r = bl.len().max(br.len());
    let mut gram = CMatrix::zeros(r);
    for (i, x) in bl.iter().enumerate() {
        for (j, y) in br.iter().enumerate() {
            gram[(i, j)] = x.iter().zip(y).map(|(a, b)| a.conj() * b).sum();
        }
    }
    let s = singular_values(&gram);
    s.first().copied().unwrap_or(0.0).min(1.0).acos()
}

/// The Margulis invariant `m(g, x)`: project `x` onto the fixed space of
/// `Ad(g)` and move it to the model diagonal subalgebra, i.e. the diagonal
/// part of `psi x psi^{-1}`.
pub fn margulis_invariant(
    g: &CMatrix,
    x: &TracelessMatrix,
) -> Result<DiagonalInvariant, MargulisError> {
    let sf = standard_form(g)?;
    margulis_invariant_with(&sf, x)
}

/// Same, reusing a precomputed standard form.
pub fn margulis_invariant_with(
    sf: &StandardForm,
    x: &TracelessMatrix,
) -> Result<DiagonalInvariant, MargulisError> {
    let y = sf.psi.mul(&x.0).mul(&sf.psi_inv);
    let mut diag: Vec<Complex64> = (0..y.d).map(|i| y[(i, i)]).collect();
    let mean: Complex64 = diag.iter().sum::<Complex64>() / diag.len() as f64;
    for v in &mut diag {
        *v -= mean;
    }
    Ok(DiagonalInvariant(diag))
}

/// Displacement comparison report for the affine action of `(g, x)`.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    pub invariant_norm: f64,
    pub min_displacement: f64,
    pub empirical_constant: f64,
    pub flag_angle: f64,
}

/// Minimum over sampled `v` of `|Ad(g) v + x - v|`, compared against the
/// norm of the Margulis invariant.
pub fn displacement_bound_check(
    g: &CMatrix,
    x: &TracelessMatrix,
    samples: &[TracelessMatrix],
) -> Result<DisplacementReport, MargulisError> {
    let sf = standard_form(g)?;
    let m = margulis_invariant_with(&sf, x)?;
    let gn = unit_det(g);
    let gi = gn.inverse().ok_or(MargulisError::EigenFailure)?;
    let mut min_disp = f64::INFINITY;
    for v in samples {
        let moved = gn.mul(&v.0).mul(&gi).add(&x.0).sub(&v.0);
        min_disp = min_disp.min(moved.frobenius_norm());
    }
    // always try v = 0 as well
    min_disp = min_disp.min(x.0.frobenius_norm());
    let mn = m.norm();
    Ok(DisplacementReport {
        invariant_norm: mn,
        min_displacement: min_disp,
        empirical_constant: if mn > 0.0 { min_disp / mn } else { f64::INFINITY },
        flag_angle: sf.flag_angle,
    })
}

/// A cocycle for the adjoint action, realized by generator values plus the
/// extension rule `u(gh) = u(g) + Ad(rho(g)) u(h)`.
#[derive(Debug, Clone)]
pub struct Cocycle {
    pub gen_values: Vec<TracelessMatrix>,
    d: usize,
}

impl Cocycle {
    pub fn new(gen_values: Vec<TracelessMatrix>) -> Self {
        let d = gen_values.first().map_or(2, |m| m.0.d);
        Self { gen_values, d }
    }

    pub fn zero(rank: usize, d: usize) -> Self {
        Self { gen_values: (0..rank).map(|_| TracelessMatrix::zero(d)).collect(), d }
    }

    pub fn sum(&self, other: &Cocycle) -> Cocycle {
        Cocycle {
            gen_values: self
                .gen_values
                .iter()
                .zip(&other.gen_values)
                .map(|(a, b)| a.add(b))
                .collect(),
            d: self.d,
        }
    }

    /// Cocycle value on a word through the extension rule, evaluating the
    /// representation along prefixes.
    pub fn evaluate<E: WordEvaluator>(&self, rho: &E, w: &Word) -> TracelessMatrix {
        let mut u = CMatrix::zeros(self.d);
        let mut prefix = MoebiusElement::identity();
        for &l in w.letters() {
            let (val, letter_m) = if l > 0 {
                let idx = (l - 1) as usize;
                (
                    self.gen_values[idx].0.clone(),
                    rho.evaluate_word(&Word::from_letters(&[l])),
                )
            } else {
                let idx = (-l - 1) as usize;
                let gi = rho.evaluate_word(&Word::from_letters(&[l]));
                // u(g^{-1}) = -Ad(rho(g^{-1})) u(g)
                let gim = CMatrix::from_moebius(&gi);
                let gim_inv = gim.inverse().expect("group element");
                let v = gim.mul(&self.gen_values[idx].0).mul(&gim_inv).scale(
                    Complex64::new(-1.0, 0.0),
                );
                (v, gi)
            };
            // u(prefix * letter) = u(prefix) + Ad(prefix) val
            let pm = CMatrix::from_moebius(&prefix);
            let pm_inv = pm.inverse().expect("group element");
            u = u.add(&pm.mul(&val).mul(&pm_inv));
            prefix = prefix.compose(&letter_m);
        }
        TracelessMatrix(u)
    }
}

/// Exact-derivative cocycle of an infinitesimal bending of `bent` along a
/// direction system, in the direction `unit` (for increasing bending this is
/// `-i` times the side sign).
pub fn cocycle_from_bending(
    bent: &BentRepresentation,
    dir: &DirectionSystem,
    unit: Complex64,
) -> Result<Cocycle, MargulisError> {
    let rank = bent.generator_count();
    let mut gen_values = Vec::with_capacity(rank);
    for i in 0..rank {
        let w = Word::from_letters(&[(i + 1) as i32]);
        let raw = bent.bending_cocycle_value(dir, unit, &w)?;
        gen_values.push(TracelessMatrix::from_entries(raw)?);
    }
    Ok(Cocycle::new(gen_values))
}

/// One sample of the normalized Margulis spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSample {
    pub word: String,
    pub normalized: Vec<Complex64>,
    pub top_log: f64,
}

/// Sampled normalized Margulis invariants with margin statistics. Long
/// batteries keep only summary statistics, witnesses and a bounded head of
/// samples.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// First samples, capped so large batteries stay serializable.
    pub samples: Vec<SpectrumSample>,
    pub sample_count: usize,
    pub skipped_non_loxodromic: usize,
    pub min_first_re: f64,
    pub max_first_re: f64,
    /// Distance of the closest sample to the origin.
    pub min_norm: f64,
    pub witness_max_first: Option<SpectrumSample>,
    pub witness_min_norm: Option<SpectrumSample>,
}

const SPECTRUM_HEAD: usize = 128;
const SPECTRUM_CHUNK: usize = 1 << 15;

/// Evaluates `m(rho(w), u(w)) / omega_1` over a streamed battery of words.
pub fn normalized_margulis_spectrum<E, I>(
    rho: &E,
    u: &Cocycle,
    battery: I,
) -> Result<SpectrumReport, MargulisError>
where
    E: WordEvaluator + Sync,
    I: IntoIterator<Item = Word>,
{
    let mut report = SpectrumReport {
        samples: Vec::new(),
        sample_count: 0,
        skipped_non_loxodromic: 0,
        min_first_re: f64::INFINITY,
        max_first_re: f64::NEG_INFINITY,
        min_norm: f64::INFINITY,
        witness_max_first: None,
        witness_min_norm: None,
    };
    let mut iter = battery.into_iter();
    loop {
        let chunk: Vec<Word> = iter.by_ref().take(SPECTRUM_CHUNK).collect();
        if chunk.is_empty() {
            break;
        }
        let results: Vec<Option<SpectrumSample>> = chunk
            .par_iter()
            .map(|w| {
                let g = rho.evaluate_word(w);
                let gm = CMatrix::from_moebius(&g);
                let sf = standard_form(&gm).ok()?;
                let omega1 = sf.diagonal[0].norm().ln();
                if omega1 <= 1e-12 {
                    return None;
                }
                let x = u.evaluate(rho, w);
                let m = margulis_invariant_with(&sf, &x).ok()?;
                Some(SpectrumSample {
                    word: format!("{w}"),
                    normalized: m.0.iter().map(|z| z / omega1).collect(),
                    top_log: omega1,
                })
            })
            .collect();
        for r in results {
            match r {
                Some(s) => {
                    let norm = s.normalized.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let first = s.normalized[0].re;
                    report.sample_count += 1;
                    report.min_first_re = report.min_first_re.min(first);
                    if first > report.max_first_re {
                        report.max_first_re = first;
                        report.witness_max_first = Some(s.clone());
                    }
                    if norm < report.min_norm {
                        report.min_norm = norm;
                        report.witness_min_norm = Some(s.clone());
                    }
                    if report.samples.len() < SPECTRUM_HEAD {
                        report.samples.push(s);
                    }
                }
                None => report.skipped_non_loxodromic += 1,
            }
        }
    }
    if report.sample_count == 0 {
        return Err(MargulisError::EmptyBattery);
    }
    Ok(report)
}

/// Finite-sample properness verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PropernessVerdict {
    /// All sampled normalized invariants stay at least `margin` from the
    /// origin with one-signed first-coordinate real parts: finite-sample
    /// evidence for the properness hypothesis, never a proof.
    ProperEvidence,
    Inconclusive,
}

pub fn properness_verdict(report: &SpectrumReport, margin: f64) -> PropernessVerdict {
    if report.samples.is_empty() {
        return PropernessVerdict::Inconclusive;
    }
    let one_signed = report.max_first_re < 0.0 || report.min_first_re > 0.0;
    if one_signed && report.min_norm >= margin {
        PropernessVerdict::ProperEvidence
    } else {
        PropernessVerdict::Inconclusive
    }
}

/// Report of the eigenvalue-variation identity check along a smooth path of
/// loxodromic elements.
#[derive(Debug, Clone, Serialize)]
pub struct VariationReport {
    pub invariant: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
    pub relative_error: f64,
    /// Max relative error of `Re(m)` against the log-modulus derivative.
    pub real_part_error: f64,
}

/// Compares `m(g0, dg g0^{-1})` with the logarithmic eigenvalue derivative
/// of the path at 0 (finite differences with one Richardson step).
pub fn eigenvalue_variation_check(
    path: &dyn Fn(f64) -> CMatrix,
    step: f64,
) -> Result<VariationReport, MargulisError> {
    let g0 = path(0.0);
    let d = g0.d;
    let sf = standard_form(&g0)?;
    // x = dg * g0^{-1} by finite differences on entries
    let g0_inv = g0.inverse().ok_or(MargulisError::EigenFailure)?;
    let dg = {
        let mut entries = Vec::with_capacity(d * d);
        for idx in 0..d * d {
            let f = |t: f64| path(t).data[idx];
            let der = numeric::richardson_central(|t| f(t), step);
            entries.push(der.value);
        }
        CMatrix { d, data: entries }
    };
    let x_raw = dg.mul(&g0_inv);
    // remove the trace drift (determinant-one paths are traceless exactly)
    let tr = x_raw.trace() / d as f64;
    let mut x = x_raw;
    for i in 0..d {
        x[(i, i)] -= tr;
    }
    let x = TracelessMatrix(x);
    let m = margulis_invariant_with(&sf, &x)?;

    // eigenvalue-diagonal derivative times lambda^{-1}, order tracked by
    // modulus
    let lam0 = sf.diagonal.clone();
    let eig_at = |t: f64| -> Vec<Complex64> {
        let mut vals = eigenvalues(&unit_det(&path(t))).expect("loxodromic path");
        vals.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).expect("finite"));
        vals
    };
    let mut derivative = Vec::with_capacity(d);
    for i in 0..d {
        let f = |t: f64| eig_at(t)[i];
        let der = numeric::richardson_central(f, step);
        derivative.push(der.value / lam0[i]);
    }
    let mean: Complex64 = derivative.iter().sum::<Complex64>() / d as f64;
    let derivative: Vec<Complex64> = derivative.iter().map(|z| z - mean).collect();

    let scale = derivative
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
        .max(1e-12);
    let relative_error = m
        .0
        .iter()
        .zip(&derivative)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0_f64, f64::max)
        / scale;

    // real parts against the modulus-log derivative
    let mut real_err = 0.0_f64;
    for i in 0..d {
        let f = |t: f64| Complex64::new(eig_at(t)[i].norm().ln(), 0.0);
        let der = numeric::richardson_central(f, step);
        real_err = real_err.max((m.0[i].re - der.value.re).abs() / scale);
    }
    Ok(VariationReport {
        invariant: m.0,
        derivative,
        relative_error,
        real_part_error: real_err,
    })
}
