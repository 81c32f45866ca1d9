//! Matrix functions over complex square matrices.
//!
//! Hafnian-type functions ([`hafnian`], [`loop_hafnian`], [`permanent`],
//! [`hamiltonian_cycle_poly`]) live in one submodule and the Montrealer
//! family, which only makes sense on `2ℓ × 2ℓ` block matrices, in another.

mod hafnian;
mod montrealer;

pub use hafnian::{
    hafnian, hamiltonian_cycle_poly, loop_hafnian, permanent, MAX_HAFNIAN_DIM, MAX_HAM_DIM,
    MAX_PERMANENT_DIM,
};
pub use montrealer::{
    loop_montrealer_fast, loop_montrealer_ref, montrealer_fast, montrealer_ref,
    MAX_FAST_LOOP_MODES, MAX_FAST_MODES, MAX_REF_LOOP_MODES, MAX_REF_MODES,
};

use crate::error::{guard, Error, Result};
use crate::{CMatrix, CVector};

/// Largest total repetition accepted by [`reduction`].
pub const MAX_REDUCTION_DIM: usize = 24;

/// Default tolerance for symmetry checks, relative to `max(1, max |a_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-9;

pub(crate) fn check_square_finite(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Domain(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain(format!("{what} has non-finite entries")));
    }
    Ok(())
}

pub(crate) fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest `|a_ij − a_ji|`.
pub fn asymmetry(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).norm());
        }
    }
    worst
}

pub(crate) fn check_symmetric(a: &CMatrix, what: &str) -> Result<()> {
    let off = asymmetry(a);
    if off > SYMMETRY_TOL * max_abs(a).max(1.0) {
        return Err(Error::Domain(format!("{what} is not symmetric (max |a_ij - a_ji| = {off:e})")));
    }
    Ok(())
}

/// A `2ℓ × 2ℓ` matrix read in the block layout
/// `[[M*, N + cI], [Nᵀ + cI, M]]` of a Gaussian state's adjacency matrix.
///
/// The Montrealer is a total function of such matrices; construction only
/// checks the shape, finiteness and symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockAdjacency {
    ell: usize,
    matrix: CMatrix,
}

impl BlockAdjacency {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square_finite(&matrix, "adjacency matrix")?;
        let dim = matrix.nrows();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::Domain(format!("adjacency dimension must be even and positive, got {dim}")));
        }
        check_symmetric(&matrix, "adjacency matrix")?;
        Ok(Self { ell: dim / 2, matrix })
    }

    /// Assembles `[[top_left, cross], [crossᵀ, bottom_right]]` from three
    /// `ℓ × ℓ` blocks.
    pub fn from_blocks(top_left: &CMatrix, cross: &CMatrix, bottom_right: &CMatrix) -> Result<Self> {
        let ell = cross.nrows();
        for (blk, name) in [(top_left, "top-left"), (cross, "cross"), (bottom_right, "bottom-right")] {
            if blk.nrows() != ell || blk.ncols() != ell {
                return Err(Error::Domain(format!("{name} block must be {ell}x{ell}")));
            }
        }
        let mut m = CMatrix::zeros(2 * ell, 2 * ell);
        m.view_mut((0, 0), (ell, ell)).copy_from(top_left);
        m.view_mut((0, ell), (ell, ell)).copy_from(cross);
        m.view_mut((ell, 0), (ell, ell)).copy_from(&cross.transpose());
        m.view_mut((ell, ell), (ell, ell)).copy_from(bottom_right);
        Self::new(m)
    }

    /// Number of modes `ℓ`.
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `X·A`, i.e. the matrix with its two row blocks exchanged.
    pub fn swapped_rows(&self) -> CMatrix {
        let n = 2 * self.ell;
        CMatrix::from_fn(n, n, |i, j| self.matrix[((i + self.ell) % n, j)])
    }
}

/// Copy of `a` with its diagonal replaced by `v`.
pub fn fdiag(a: &CMatrix, v: &CVector) -> Result<CMatrix> {
    check_square_finite(a, "matrix")?;
    if v.len() != a.nrows() {
        return Err(Error::Domain(format!(
            "diagonal has length {} but the matrix is {}x{}",
            v.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    let mut out = a.clone();
    out.set_diagonal(v);
    Ok(out)
}

fn expand_indices(k: &[usize], dim: usize) -> Result<Vec<usize>> {
    if k.len() != dim {
        return Err(Error::Domain(format!("repetition vector has length {} but dimension is {dim}", k.len())));
    }
    let total: usize = k.iter().sum();
    guard(total, MAX_REDUCTION_DIM, "total repetition count")?;
    Ok(k.iter().enumerate().flat_map(|(i, &r)| std::iter::repeat_n(i, r)).collect())
}

/// The matrix obtained by repeating row and column `i` of `a` exactly `k[i]`
/// times, in index order. A zero entry drops the row and column.
pub fn reduction(a: &CMatrix, k: &[usize]) -> Result<CMatrix> {
    check_square_finite(a, "matrix")?;
    let idx = expand_indices(k, a.nrows())?;
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| a[(idx[r], idx[c])]))
}

/// Vector analogue of [`reduction`].
pub fn reduction_vec(v: &CVector, k: &[usize]) -> Result<CVector> {
    let idx = expand_indices(k, v.len())?;
    Ok(CVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i])))
}

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> crate::C64 {
    crate::C64::new(re, im)
}
