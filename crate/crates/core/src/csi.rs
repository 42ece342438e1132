//! CSI eigenvector matrices and the SGCS recovery metric.

use crate::cmatrix::{C64, CMatrix};
use crate::error::{Error, Result};

/// Column-norm tolerance for a valid CSI matrix.
pub const UNIT_COLUMN_TOL: f64 = 1e-9;

/// Per-subband eigenvector matrix: `n_tx x n_subbands` complex with every
/// column normalized to unit l2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiMatrix {
    w: CMatrix,
}

impl CsiMatrix {
    /// Wraps a matrix whose columns are already unit-norm (within
    /// [`UNIT_COLUMN_TOL`]).
    pub fn new(w: CMatrix) -> Result<Self> {
        for c in 0..w.cols() {
            let n = w.column_norm(c);
            if (n - 1.0).abs() > UNIT_COLUMN_TOL {
                return Err(Error::invalid_argument(format!(
                    "column {c} has norm {n}, expected 1"
                )));
            }
        }
        Ok(Self { w })
    }

    /// Normalizes each column to unit norm, then wraps. Errors on a zero
    /// column.
    pub fn from_unnormalized(w: CMatrix) -> Result<Self> {
        Ok(Self {
            w: w.normalize_columns()?,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    pub fn into_matrix(self) -> CMatrix {
        self.w
    }

    pub fn n_tx(&self) -> usize {
        self.w.rows()
    }

    pub fn n_subbands(&self) -> usize {
        self.w.cols()
    }
}

/// Squared generalized cosine similarity between two same-shape matrices:
/// the per-column squared normalized inner product, averaged over columns.
///
/// The formula divides by both column norms, so it is scale-invariant; the
/// only hard requirements are matching shapes and nonzero columns.
pub fn sgcs_raw(w: &CMatrix, w_hat: &CMatrix) -> Result<f64> {
    if w.rows() != w_hat.rows() || w.cols() != w_hat.cols() {
        return Err(Error::invalid_argument(format!(
            "shape mismatch: {}x{} vs {}x{}",
            w.rows(),
            w.cols(),
            w_hat.rows(),
            w_hat.cols()
        )));
    }
    if w.cols() == 0 {
        return Err(Error::invalid_argument("sgcs of empty matrices"));
    }
    let mut acc = 0.0f64;
    for l in 0..w.cols() {
        let mut inner = C64::new(0.0, 0.0);
        let mut na = 0.0f64;
        let mut nb = 0.0f64;
        for r in 0..w.rows() {
            let a = w.get(r, l);
            let b = w_hat.get(r, l);
            inner += a.conj() * b;
            na += a.norm_sqr();
            nb += b.norm_sqr();
        }
        if na < 1e-300 || nb < 1e-300 {
            return Err(Error::degenerate(format!("zero column {l} in sgcs input")));
        }
        acc += inner.norm_sqr() / (na * nb);
    }
    Ok(acc / w.cols() as f64)
}

/// SGCS between two CSI matrices (Eq-form metric on unit-norm columns).
pub fn sgcs(w: &CsiMatrix, w_hat: &CsiMatrix) -> Result<f64> {
    sgcs_raw(w.matrix(), w_hat.matrix())
}
