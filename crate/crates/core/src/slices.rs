//! Slice matrices of multilinear cubic forms and the invariant
//! `Delta(f) = max_i ||M_i||`.
//!
//! The `i`th slice of `f = sum_S c_S chi_S` is the symmetric matrix with
//! `(j,k)` entry `c_{{i,j,k}}` for pairwise distinct `i,j,k` and zero
//! otherwise; in particular its diagonal and its `i`th row and column
//! vanish.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;
use crate::poly::{mask_to_vars, MultilinearPoly};

/// Maximum slice dimension. Every instance in this crate is far smaller;
/// the cap only guards against accidental dense blow-ups.
pub const MAX_SLICE_DIM: usize = 4096;

/// One slice of a cubic form.
#[derive(Debug, Clone)]
pub struct SliceMatrix {
    /// 1-based slice index.
    pub index: usize,
    pub matrix: DMatrix<f64>,
}

impl SliceMatrix {
    /// JSON wire format `{index, n, matrix}` with the matrix as a flat
    /// row-major array.
    pub fn to_json(&self) -> String {
        use std::fmt::Write;
        let n = self.matrix.nrows();
        let mut out = String::new();
        write!(out, "{{\"index\":{},\"n\":{n},\"matrix\":[", self.index).unwrap();
        let mut first = true;
        for r in 0..n {
            for c in 0..n {
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&crate::certificate::float17(self.matrix[(r, c)]));
            }
        }
        out.push_str("]}");
        out
    }
}

fn require_cubic(f: &MultilinearPoly) -> Result<()> {
    if let Some(mask) = f.offending_non_cubic() {
        let vars = mask_to_vars(mask);
        let monomial = if vars.is_empty() {
            "1 (constant term)".to_string()
        } else {
            vars.iter().map(|v| format!("x{v}")).collect::<Vec<_>>().join("*")
        };
        return Err(Error::NotCubic { monomial });
    }
    if f.n() > MAX_SLICE_DIM {
        return Err(Error::VariableLimit { n: f.n(), max: MAX_SLICE_DIM });
    }
    Ok(())
}

/// Extract the `i`th slice (1-based) of a multilinear cubic form.
pub fn slice(f: &MultilinearPoly, i: usize) -> Result<SliceMatrix> {
    require_cubic(f)?;
    let n = f.n();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    let mut m = DMatrix::zeros(n, n);
    let bit = 1u128 << (i - 1);
    for (mask, c) in f.iter_coeffs() {
        if mask & bit != 0 {
            let rest = mask_to_vars(mask & !bit);
            let (j, k) = (rest[0], rest[1]);
            m[(j - 1, k - 1)] = c;
            m[(k - 1, j - 1)] = c;
        }
    }
    Ok(SliceMatrix { index: i, matrix: m })
}

/// All `n` slices, computed in parallel.
pub fn all_slices(f: &MultilinearPoly) -> Result<Vec<SliceMatrix>> {
    require_cubic(f)?;
    let n = f.n();
    Ok(par::ordered_map(n as u64, |i| slice(f, i as usize + 1).expect("validated cubic form")))
}

/// Operator norm (largest absolute eigenvalue) of a symmetric matrix.
///
/// Backed by a dense symmetric eigensolver (Householder tridiagonalization
/// followed by implicit symmetric QR), which is deterministic: repeat runs
/// on the same input give the same bits, as certificate reproduction
/// requires. Non-symmetric input is rejected.
pub fn operator_norm(m: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSymmetric { row: rows, col: cols });
    }
    for r in 0..rows {
        for c in r + 1..cols {
            if m[(r, c)] != m[(c, r)] {
                return Err(Error::NotSymmetric { row: r, col: c });
            }
        }
    }
    if rows == 0 {
        return Ok(0.0);
    }
    let eigen = m.clone().symmetric_eigen();
    Ok(eigen.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l.abs())))
}

/// `Delta(f)`: the largest slice operator norm of a cubic form.
pub fn delta(f: &MultilinearPoly) -> Result<f64> {
    let slices = all_slices(f)?;
    let norms = par::ordered_map(slices.len() as u64, |i| {
        operator_norm(&slices[i as usize].matrix).expect("slices are symmetric")
    });
    Ok(norms.into_iter().fold(0.0, f64::max))
}
