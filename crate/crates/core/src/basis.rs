//! Spatial and frequency orthogonal basis groups for CSI synthesis.
//!
//! A basis set holds `P` unitary spatial groups of size `n_tx x n_tx` plus a
//! single unitary frequency basis of size `n_subbands x n_subbands`. Three
//! construction methods are provided: an oversampled DFT grid partitioned
//! into orthogonal residue groups, left singular bases of random complex
//! matrices, and modified Gram-Schmidt orthonormalization of random complex
//! matrices. All three produce groups that pass the unitarity check at 1e-10.

use std::f64::consts::TAU;

use crate::cmatrix::{hermitian_eigen, C64, CMatrix};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Maximum allowed `max |(U^H U - I)_{ij}|` for any basis factor.
pub const UNITARITY_TOL: f64 = 1e-10;

/// How a basis set was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMethod {
    Dft,
    Svd,
    Smt,
}

/// `P` spatial unitary groups plus one frequency unitary.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub spatial_groups: Vec<CMatrix>,
    pub frequency: CMatrix,
    pub method: BasisMethod,
    /// `(O_h, O_v)` when the method is DFT.
    pub oversampling: Option<(usize, usize)>,
}

impl BasisSet {
    pub fn n_groups(&self) -> usize {
        self.spatial_groups.len()
    }

    pub fn n_tx(&self) -> usize {
        self.spatial_groups[0].rows()
    }

    pub fn n_subbands(&self) -> usize {
        self.frequency.rows()
    }

    /// Checks every spatial group and the frequency basis against the
    /// unitarity tolerance.
    pub fn validate(&self) -> Result<()> {
        for (p, s) in self.spatial_groups.iter().enumerate() {
            if s.rows() != s.cols() {
                return Err(Error::invalid_argument(format!("spatial group {p} not square")));
            }
            let r = s.unitarity_residual();
            if r > UNITARITY_TOL {
                return Err(Error::numeric(format!(
                    "spatial group {p} unitarity residual {r:.3e}"
                )));
            }
        }
        let r = self.frequency.unitarity_residual();
        if r > UNITARITY_TOL {
            return Err(Error::numeric(format!("frequency basis unitarity residual {r:.3e}")));
        }
        Ok(())
    }

    /// Block-diagonal dual-polarization extension: each spatial group becomes
    /// `diag(S_p, S_p)` of size `2 n_tx`. The frequency basis is unchanged.
    pub fn with_dual_polarization(&self) -> BasisSet {
        let spatial_groups = self
            .spatial_groups
            .iter()
            .map(|s| {
                let n = s.rows();
                CMatrix::from_fn(2 * n, 2 * n, |r, c| {
                    if (r < n) == (c < n) {
                        s.get(r % n, c % n)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        BasisSet {
            spatial_groups,
            frequency: self.frequency.clone(),
            method: self.method,
            oversampling: self.oversampling,
        }
    }
}

/// Unnormalized horizontal/vertical steering vector entry
/// `exp(j 2 pi n x / (N O))`.
fn steering(n: usize, len: usize, x: usize, oversampled: usize) -> C64 {
    let phase = TAU * (n as f64) * (x as f64) / (oversampled as f64);
    let _ = len;
    C64::from_polar(1.0, phase)
}

/// DFT-grid basis with oversampling factors `(o_h, o_v)`.
///
/// Horizontal steering vectors are sampled on an `n_h * o_h` grid and
/// vertical ones on an `n_v * o_v` grid; the Kronecker products are
/// partitioned into `P = o_h * o_v` groups by the residue class of the grid
/// index, and every column is scaled by `1/sqrt(n_h n_v)` so each group is
/// unitary. The frequency basis is the unitary `n_sb`-point DFT matrix.
pub fn dft_basis(n_h: usize, n_v: usize, n_sb: usize, o_h: usize, o_v: usize) -> Result<BasisSet> {
    for (name, v) in [("n_h", n_h), ("n_v", n_v), ("n_sb", n_sb), ("o_h", o_h), ("o_v", o_v)] {
        if v == 0 {
            return Err(Error::invalid_config(format!("{name} must be >= 1")));
        }
    }
    let n_t = n_h * n_v;
    let norm = 1.0 / (n_t as f64).sqrt();
    let mut spatial_groups = Vec::with_capacity(o_h * o_v);
    for res_h in 0..o_h {
        for res_v in 0..o_v {
            // Column (i, k) holds a_{x,y} with x = res_h + i*o_h and
            // y = res_v + k*o_v; the Kronecker layout puts the horizontal
            // index on the outer (slow) axis.
            let group = CMatrix::from_fn(n_t, n_t, |row, col| {
                let (m, q) = (row / n_v, row % n_v);
                let (i, k) = (col / n_v, col % n_v);
                let x = res_h + i * o_h;
                let y = res_v + k * o_v;
                steering(m, n_h, x, n_h * o_h) * steering(q, n_v, y, n_v * o_v) * norm
            });
            spatial_groups.push(group);
        }
    }
    let fnorm = 1.0 / (n_sb as f64).sqrt();
    let frequency = CMatrix::from_fn(n_sb, n_sb, |n, l| {
        C64::from_polar(fnorm, TAU * (n as f64) * (l as f64) / (n_sb as f64))
    });
    let set = BasisSet {
        spatial_groups,
        frequency,
        method: BasisMethod::Dft,
        oversampling: Some((o_h, o_v)),
    };
    set.validate()?;
    Ok(set)
}

/// Left singular basis of a square complex matrix, computed as the
/// eigenvector basis of `X X^H` ordered by descending singular value.
pub fn left_singular_basis(x: &CMatrix) -> Result<CMatrix> {
    if x.rows() != x.cols() {
        return Err(Error::invalid_argument("left_singular_basis needs a square matrix"));
    }
    let xxh = x.mul(&x.hermitian());
    let (_vals, vecs) = hermitian_eigen(&xxh)?;
    let r = vecs.unitarity_residual();
    if r > UNITARITY_TOL {
        return Err(Error::numeric(format!("singular basis residual {r:.3e}")));
    }
    Ok(vecs)
}

/// Modified Gram-Schmidt orthonormalization of the columns of `x`, with one
/// reorthogonalization pass if the first pass leaves a residual above the
/// unitarity tolerance. Errors when a pivot column is numerically dependent
/// on its predecessors.
pub fn orthonormalize(x: &CMatrix) -> Result<CMatrix> {
    let (rows, cols) = (x.rows(), x.cols());
    if cols > rows {
        return Err(Error::invalid_argument("cannot orthonormalize more columns than rows"));
    }
    let mgs = |input: &CMatrix| -> Result<CMatrix> {
        let mut q = input.clone();
        for k in 0..cols {
            let mut v = q.column(k);
            for i in 0..k {
                let u = q.column(i);
                let proj: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (vk, uk) in v.iter_mut().zip(u.iter()) {
                    *vk -= proj * uk;
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-12 {
                return Err(Error::degenerate(format!("rank-deficient column {k} in orthonormalization")));
            }
            let inv = 1.0 / n;
            for (r, vk) in v.iter().enumerate() {
                q.set(r, k, vk * inv);
            }
        }
        Ok(q)
    };
    let q = mgs(x)?;
    if q.unitarity_residual() > UNITARITY_TOL {
        return mgs(&q);
    }
    Ok(q)
}

fn random_square(rng: &mut RngStream, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| rng.complex_normal())
}

/// Runs `build` on a fresh random square draw, redrawing once on a
/// degenerate draw before giving up.
fn draw_with_retry(
    rng: &mut RngStream,
    n: usize,
    build: impl Fn(&CMatrix) -> Result<CMatrix>,
) -> Result<CMatrix> {
    let first = random_square(rng, n);
    match build(&first) {
        Ok(m) => Ok(m),
        Err(_) => build(&random_square(rng, n)),
    }
}

/// SVD-based basis: per group, draws `X_h` and `X_v` from CN(0,1) and forms
/// the Kronecker product of their left singular bases; the frequency basis is
/// the left singular basis of an independent `n_sb x n_sb` draw.
pub fn svd_basis(n_h: usize, n_v: usize, n_sb: usize, p: usize, rng: &RngStream) -> Result<BasisSet> {
    build_random_basis(n_h, n_v, n_sb, p, rng, BasisMethod::Svd, left_singular_basis)
}

/// Gram-Schmidt-based basis: as [`svd_basis`] but orthonormalizing the random
/// draws by modified Gram-Schmidt instead of taking singular bases.
pub fn smt_basis(n_h: usize, n_v: usize, n_sb: usize, p: usize, rng: &RngStream) -> Result<BasisSet> {
    build_random_basis(n_h, n_v, n_sb, p, rng, BasisMethod::Smt, orthonormalize)
}

fn build_random_basis(
    n_h: usize,
    n_v: usize,
    n_sb: usize,
    p: usize,
    rng: &RngStream,
    method: BasisMethod,
    orth: impl Fn(&CMatrix) -> Result<CMatrix>,
) -> Result<BasisSet> {
    if p == 0 {
        return Err(Error::invalid_config("need at least one spatial group"));
    }
    for (name, v) in [("n_h", n_h), ("n_v", n_v), ("n_sb", n_sb)] {
        if v == 0 {
            return Err(Error::invalid_config(format!("{name} must be >= 1")));
        }
    }
    let mut spatial_groups = Vec::with_capacity(p);
    for group_idx in 0..p {
        let gr = rng.child(group_idx as u64);
        let u_h = draw_with_retry(&mut gr.child(0), n_h, &orth)?;
        let u_v = draw_with_retry(&mut gr.child(1), n_v, &orth)?;
        spatial_groups.push(u_h.kron(&u_v));
    }
    let frequency = draw_with_retry(&mut rng.child(p as u64), n_sb, &orth)?;
    let set = BasisSet {
        spatial_groups,
        frequency,
        method,
        oversampling: None,
    };
    set.validate()?;
    Ok(set)
}
