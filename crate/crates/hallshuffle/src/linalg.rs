//! Exact linear algebra over [`Scalar`]: row reduction, rank, nullspaces.

use alloc::vec::Vec;

use crate::scalar::Scalar;
use crate::Result;

/// Row-reduced echelon form in place; returns pivot columns.
pub fn rref(m: &mut Vec<Vec<Scalar>>) -> Result<Vec<usize>> {
    let rows = m.len();
    if rows == 0 {
        return Ok(Vec::new());
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].try_inv()?;
        for x in m[r].iter_mut() {
            *x = x.try_mul(&inv)?;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                if !y.is_zero() {
                    *x = x.try_sub(&f.try_mul(y)?)?;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Ok(pivots)
}

pub fn rank(m: &[Vec<Scalar>]) -> Result<usize> {
    let mut a = m.to_vec();
    Ok(rref(&mut a)?.len())
}

/// Basis of {x : m·x = 0}, in reduced form (one vector per free column).
pub fn nullspace(m: &[Vec<Scalar>], cols: usize) -> Result<Vec<Vec<Scalar>>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a)?;
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut x = alloc::vec![Scalar::zero(); cols];
        x[free] = Scalar::one();
        for (row, &pc) in a.iter().zip(pivots.iter()) {
            x[pc] = -&row[free];
        }
        basis.push(x);
    }
    Ok(basis)
}

/// Canonical form of the row space (nonzero rows of the RREF).
pub fn row_space(vectors: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let mut a = vectors.to_vec();
    rref(&mut a)?;
    Ok(a)
}

pub fn same_span(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Result<bool> {
    Ok(row_space(a)? == row_space(b)?)
}
