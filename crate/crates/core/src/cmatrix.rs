//! Dense complex matrices and the small amount of linear algebra the toolkit
//! needs: products, Kronecker structure, unitarity checks, a cyclic Jacobi
//! eigensolver for Hermitian matrices, and an iterative dominant-eigenpair
//! solver.
//!
//! Everything is plain `f64` row-major storage. Matrix sizes in this domain
//! top out at a few hundred rows, so O(n^3) dense routines are entirely
//! adequate and keep the crate dependency-free on the linear-algebra side.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Dense complex matrix, row-major.
///
/// Invariants: `entries.len() == rows * cols` and every entry is finite.
/// Public constructors validate both; internal arithmetic preserves them.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, validating the invariants.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::invalid_argument(format!(
                "entry count {} does not match {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid_argument("non-finite matrix entry"));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix by evaluating `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.entries[r * self.cols + c] = v;
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Matrix product `self * other`. Panics on inner-dimension mismatch;
    /// shape errors here are programming errors, not data errors.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matrix product dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[r * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_b = &other.entries[k * other.cols..(k + 1) * other.cols];
                let row_o = &mut out.entries[r * other.cols..(r + 1) * other.cols];
                for (o, b) in row_o.iter_mut().zip(row_b.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// `self^H * self` (Gram matrix).
    pub fn gram(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..self.rows {
                    acc += self.get(r, i).conj() * self.get(r, j);
                }
                out.set(i, j, acc);
                if i != j {
                    out.set(j, i, acc.conj());
                }
            }
        }
        out
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        CMatrix::from_fn(ra * rb, ca * cb, |r, c| {
            self.get(r / rb, c / cb) * other.get(r % rb, c % cb)
        })
    }

    /// Sub-matrix of the given columns (0-based indices, order preserved).
    pub fn select_columns(&self, idx: &[usize]) -> CMatrix {
        for &c in idx {
            assert!(c < self.cols, "column index {} out of range {}", c, self.cols);
        }
        CMatrix::from_fn(self.rows, idx.len(), |r, k| self.get(r, idx[k]))
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(other.entries.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out[r] = acc;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn column_norm(&self, c: usize) -> f64 {
        (0..self.rows).map(|r| self.get(r, c).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scales every column to unit l2 norm. Errors on an (effectively) zero
    /// column; the threshold guards against denormal blow-ups only.
    pub fn normalize_columns(&self) -> Result<CMatrix> {
        let mut out = self.clone();
        for c in 0..self.cols {
            let n = self.column_norm(c);
            if n < 1e-300 {
                return Err(Error::degenerate(format!("zero column {} before normalization", c)));
            }
            let inv = 1.0 / n;
            for r in 0..self.rows {
                let v = out.get(r, c);
                out.set(r, c, v * inv);
            }
        }
        Ok(out)
    }

    /// `max |(A^H A - I)_{ij}|`, the unitarity residual used by basis checks.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.gram();
        let mut worst = 0.0f64;
        for i in 0..g.rows {
            for j in 0..g.cols {
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((g.get(i, j) - expect).norm());
            }
        }
        worst
    }

    /// Hermitian symmetrization `(A + A^H) / 2`; used to stamp out roundoff
    /// drift before eigensolves.
    pub fn hermitianize(&self) -> CMatrix {
        assert_eq!(self.rows, self.cols);
        CMatrix::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }
}

/// Rotates a vector by a global phase so its largest-magnitude entry is real
/// and positive. Ties (equal magnitude within roundoff) resolve to the lowest
/// index, which makes eigenvector output deterministic.
pub fn canonicalize_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = m;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = v[best] / best_mag;
    let rot = phase.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching eigenvector columns
/// (phase-canonicalized). The rotations are accumulated into the eigenvector
/// matrix, so its unitarity holds to machine precision independent of the
/// eigenvalue spread.
pub fn hermitian_eigen(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if a.rows() != a.cols() {
        return Err(Error::invalid_argument("hermitian_eigen needs a square matrix"));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let mut m = a.hermitianize();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm().max(1e-300);
    let tol = 1e-14 * scale;

    const MAX_SWEEPS: usize = 100;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(m.get(p, q).norm());
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m.get(p, q);
                let gm = g.norm();
                if gm <= tol * 1e-2 {
                    continue;
                }
                // Phase factor turning the (p,q) block real, then a real
                // Jacobi rotation zeroing the off-diagonal entry.
                let phase = g / gm;
                let alpha = m.get(p, p).re;
                let beta = m.get(q, q).re;
                let tau = (beta - alpha) / (2.0 * gm);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation J restricted to (p,q):
                //   J[p,p] = c*phase, J[p,q] = s*phase, J[q,p] = -s, J[q,q] = c
                let jpp = phase * c;
                let jpq = phase * s;
                let jqp = C64::new(-s, 0.0);
                let jqq = C64::new(c, 0.0);

                // m <- J^H m J, applied as rows then columns.
                for k in 0..n {
                    let mp = m.get(p, k);
                    let mq = m.get(q, k);
                    m.set(p, k, jpp.conj() * mp + jqp.conj() * mq);
                    m.set(q, k, jpq.conj() * mp + jqq.conj() * mq);
                }
                for k in 0..n {
                    let mp = m.get(k, p);
                    let mq = m.get(k, q);
                    m.set(k, p, mp * jpp + mq * jqp);
                    m.set(k, q, mp * jpq + mq * jqq);
                }
                // Clean the entry we just zeroed analytically.
                m.set(p, q, C64::new(0.0, 0.0));
                m.set(q, p, C64::new(0.0, 0.0));
                for k in 0..n {
                    let vp = v.get(k, p);
                    let vq = v.get(k, q);
                    v.set(k, p, vp * jpp + vq * jqp);
                    v.set(k, q, vp * jpq + vq * jqq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::numeric("jacobi eigensolver did not converge"));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = v.select_columns(&order);
    for c in 0..n {
        let mut col = vectors.column(c);
        canonicalize_phase(&mut col);
        for r in 0..n {
            vectors.set(r, c, col[r]);
        }
    }
    Ok((eigenvalues, vectors))
}

/// Dominant eigenpair of a Hermitian PSD matrix by two-column subspace
/// iteration with Rayleigh-Ritz extraction.
///
/// The two-dimensional block makes near-degenerate leading eigenvalues
/// converge at the (lambda_3 / lambda_1) rate instead of stalling. Returns
/// the Ritz value and the phase-canonicalized unit eigenvector; errors if the
/// relative residual has not reached `tol` within `max_iter` iterations.
pub fn dominant_eigenpair(a: &CMatrix, tol: f64, max_iter: usize) -> Result<(f64, Vec<C64>)> {
    if a.rows() != a.cols() {
        return Err(Error::invalid_argument("dominant_eigenpair needs a square matrix"));
    }
    let n = a.rows();
    if n == 0 {
        return Err(Error::invalid_argument("empty matrix"));
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        // Zero matrix: eigenvalue 0, pick the first basis vector.
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[0] = C64::new(1.0, 0.0);
        return Ok((0.0, v));
    }
    if n == 1 {
        return Ok((a.get(0, 0).re, vec![C64::new(1.0, 0.0)]));
    }

    // Deterministic start: basis vectors at the two largest diagonal entries.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        a.get(j, j)
            .re
            .partial_cmp(&a.get(i, i).re)
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut v1 = vec![C64::new(0.0, 0.0); n];
    let mut v2 = vec![C64::new(0.0, 0.0); n];
    v1[idx[0]] = C64::new(1.0, 0.0);
    v2[idx[1]] = C64::new(1.0, 0.0);

    let dot = |x: &[C64], y: &[C64]| -> C64 {
        x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
    };
    let norm = |x: &[C64]| -> f64 { x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() };

    for _ in 0..max_iter {
        let mut w1 = a.matvec(&v1);
        let mut w2 = a.matvec(&v2);

        // Orthonormalize the block (modified Gram-Schmidt). Cancellation
        // thresholds are relative: a direction that lost more than ~8 digits
        // to the projection is roundoff noise and gets replaced by a fresh
        // basis vector instead of being renormalized into garbage.
        let n1 = norm(&w1);
        if n1 <= 1e-13 * scale {
            // v1 sits in the null space; restart it off the diagonal maximum.
            w1 = vec![C64::new(0.0, 0.0); n];
            w1[idx[0]] = C64::new(1.0, 0.0);
        } else {
            let inv = 1.0 / n1;
            for z in w1.iter_mut() {
                *z *= inv;
            }
        }
        let before = norm(&w2).max(scale);
        let proj = dot(&w1, &w2);
        for (z, u) in w2.iter_mut().zip(w1.iter()) {
            *z -= proj * u;
        }
        let n2 = norm(&w2);
        if n2 <= 1e-8 * before {
            // Degenerate second direction: replace with the basis vector
            // where w1 has the least weight.
            let mut k = 0;
            let mut small = f64::INFINITY;
            for (i, z) in w1.iter().enumerate() {
                if z.norm() < small {
                    small = z.norm();
                    k = i;
                }
            }
            w2 = vec![C64::new(0.0, 0.0); n];
            w2[k] = C64::new(1.0, 0.0);
        }
        // Two orthogonalization passes pin w2 orthogonal to w1 even after a
        // heavy cancellation or a replacement.
        for _ in 0..2 {
            let proj = dot(&w1, &w2);
            for (z, u) in w2.iter_mut().zip(w1.iter()) {
                *z -= proj * u;
            }
        }
        let nn = norm(&w2);
        if nn <= 1e-13 * scale {
            return Err(Error::numeric("subspace block collapsed"));
        }
        let inv = 1.0 / nn;
        for z in w2.iter_mut() {
            *z *= inv;
        }

        // Rayleigh-Ritz on the 2x2 projected problem.
        let aw1 = a.matvec(&w1);
        let aw2 = a.matvec(&w2);
        let t11 = dot(&w1, &aw1).re;
        let t22 = dot(&w2, &aw2).re;
        let t12 = dot(&w1, &aw2);
        // Principal eigenvector of [[t11, t12],[t12^*, t22]].
        let (c1, c2, lam) = {
            let g = t12.norm();
            if g < 1e-300 {
                if t11 >= t22 {
                    (C64::new(1.0, 0.0), C64::new(0.0, 0.0), t11)
                } else {
                    (C64::new(0.0, 0.0), C64::new(1.0, 0.0), t22)
                }
            } else {
                let phase = t12 / g;
                let mid = 0.5 * (t11 + t22);
                let half = (0.25 * (t11 - t22) * (t11 - t22) + g * g).sqrt();
                let lam = mid + half;
                // Solve (T - lam I) c = 0 for the dominant pair.
                let d1 = lam - t11;
                // c1 * t12 = d1 * c2 with |c|=1
                let u1 = phase * g;
                let (x1, x2) = (u1, C64::new(d1, 0.0));
                let nn = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
                if nn < 1e-300 {
                    (C64::new(1.0, 0.0), C64::new(0.0, 0.0), lam)
                } else {
                    (x1 / nn, x2 / nn, lam)
                }
            }
        };
        let ritz: Vec<C64> = (0..n).map(|i| c1 * w1[i] + c2 * w2[i]).collect();
        let aritz = a.matvec(&ritz);
        let mut res = 0.0f64;
        for i in 0..n {
            res += (aritz[i] - ritz[i] * lam).norm_sqr();
        }
        let res = res.sqrt();
        if res <= tol * scale.max(lam.abs()) {
            let mut v = ritz;
            canonicalize_phase(&mut v);
            let nn = norm(&v);
            let inv = 1.0 / nn;
            for z in v.iter_mut() {
                *z *= inv;
            }
            return Ok((lam, v));
        }
        v1 = w1;
        v2 = w2;
    }
    Err(Error::numeric(format!(
        "dominant eigenpair did not reach tolerance {tol} within {max_iter} iterations"
    )))
}
