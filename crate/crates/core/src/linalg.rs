//! Dense exact Gaussian elimination.

use crate::scalar::Scalar;

/// Outcome of solving `A x = b` for a possibly non-square `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinearSolution<T> {
    Unique(Vec<T>),
    /// Consistent with a solution space of positive dimension.
    Underdetermined,
    Inconsistent,
}

/// Reduced row echelon form of `[A | b]`; returns the pivot column of each
/// nonzero row.
fn rref<T: Scalar>(rows: &mut [Vec<T>], columns: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..columns {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let lead = rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() / lead.clone();
        }
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone();
            let (pivot_row, target) = if i < r {
                let (lo, hi) = rows.split_at_mut(r);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = rows.split_at_mut(i);
                (&lo[r], &mut hi[0])
            };
            for (t, p) in target.iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *t = t.clone() - factor.clone() * p.clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> LinearSolution<T> {
    let columns = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut rows, columns);
    if rows[pivots.len()..].iter().any(|r| !r[columns].is_zero()) {
        return LinearSolution::Inconsistent;
    }
    if pivots.len() < columns {
        return LinearSolution::Underdetermined;
    }
    LinearSolution::Unique(rows.iter().take(columns).map(|r| r[columns].clone()).collect())
}

/// Inverse of a square matrix, or `None` if singular.
pub fn invert<T: Scalar>(matrix: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = matrix.len();
    let mut rows: Vec<Vec<T>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut rows, n);
    if pivots.len() < n {
        return None;
    }
    Some(rows.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_vec<T: Scalar>(matrix: &[Vec<T>], x: &[T]) -> Vec<T> {
    matrix.iter().map(|row| crate::scalar::dot(row, x)).collect()
}
