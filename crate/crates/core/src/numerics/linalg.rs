use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Scalar;

/// Relative singular-value cutoff used for rank decisions.
const RANK_CUTOFF: f64 = 1e-10;

/// Absolute cutoff `1e-10·σ_max` for a matrix with the given singular values.
pub fn singular_cutoff<T: Scalar>(singular_values: &DVector<T>) -> T {
    let smax = singular_values.iter().fold(T::zero(), |m, &s| m.max(s));
    smax * T::tol(RANK_CUTOFF)
}

/// Numerical rank of `a`.
pub fn rank<T: Scalar>(a: &DMatrix<T>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let cut = singular_cutoff(&sv);
    sv.iter().filter(|&&s| s > cut).count()
}

/// 2-norm condition number `σ_max/σ_min`; infinite for rank-deficient input.
pub fn condition_number<T: Scalar>(a: &DMatrix<T>) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    let sv = a.singular_values();
    let smax = sv.iter().fold(T::zero(), |m, &s| m.max(s));
    let smin = sv.iter().fold(smax, |m, &s| m.min(s));
    if smin <= T::zero() {
        f64::INFINITY
    } else {
        (smax / smin).to_f64_lossy()
    }
}

/// Solves the square system `a·x = b` by LU with partial pivoting.
///
/// Fails with [`Error::SingularMatrix`] when `a` is numerically singular
/// (smallest singular value below the rank cutoff).
pub fn solve<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "solve",
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    if a.nrows() == 0 {
        return Ok(DVector::zeros(0));
    }
    if rank(a) < a.nrows() {
        return Err(Error::SingularMatrix {
            context: "solve",
            condition: condition_number(a),
        });
    }
    a.clone().lu().solve(b).ok_or(Error::SingularMatrix {
        context: "solve",
        condition: f64::INFINITY,
    })
}

/// Minimum-norm least-squares solution of `a·x ≈ b` via the SVD
/// pseudo-inverse. The result lies in the row space of `a`.
pub fn lstsq_min_norm<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "lstsq_min_norm",
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let cut = singular_cutoff(&svd.singular_values);
    let (u, v_t) = match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Numerical {
                operation: "lstsq_min_norm",
                reason: "SVD did not produce singular vectors".into(),
            })
        }
    };
    let mut x = DVector::zeros(a.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cut {
            let coef = u.column(i).dot(b) / s;
            x += v_t.row(i).transpose() * coef;
        }
    }
    Ok(x)
}

/// Orthonormal basis (as columns) of `ker(a)`.
///
/// Uses a full SVD; wide matrices are padded with zero rows so that every
/// right singular vector is available. Returns an `ncols × 0` matrix when the
/// kernel is trivial.
pub fn null_space<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    let (rows, cols) = a.shape();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if rows == 0 {
        return DMatrix::identity(cols, cols);
    }
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let cut = singular_cutoff(&svd.singular_values);
    let v_t = svd.v_t.expect("requested V^T");
    let kernel: Vec<DVector<T>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if kernel.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&kernel)
    }
}

/// Re-expresses the column span of `basis` in reduced column-echelon form.
///
/// Each returned column has a unit entry at its pivot row and zeros at the
/// other columns' pivot rows, so stoichiometric kernels come out with small
/// rational (usually integer) entries such as `(1, 1)` for `[A] + [B]`.
/// Entries within `1e-12` (relative) of an integer are snapped to it.
pub fn echelon_basis<T: Scalar>(basis: &DMatrix<T>) -> DMatrix<T> {
    let (n, m) = basis.shape();
    if m == 0 {
        return basis.clone();
    }
    // Row-reduce the transpose: rows of `r` are basis vectors.
    let mut r = basis.transpose();
    let scale = r.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let zero_tol = scale * T::tol(1e-10);
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row == m {
            break;
        }
        let (best, best_val) = (pivot_row..m)
            .map(|i| (i, r[(i, col)].abs()))
            .fold((pivot_row, T::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_val <= zero_tol {
            continue;
        }
        r.swap_rows(pivot_row, best);
        let p = r[(pivot_row, col)];
        for j in 0..n {
            r[(pivot_row, j)] /= p;
        }
        for i in 0..m {
            if i != pivot_row {
                let f = r[(i, col)];
                if f != T::zero() {
                    for j in 0..n {
                        let v = r[(pivot_row, j)];
                        r[(i, j)] -= f * v;
                    }
                }
            }
        }
        pivot_row += 1;
    }
    let snap = T::tol(1e-12) * r.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    r.apply(|v| {
        let nearest = v.round();
        if (*v - nearest).abs() <= snap {
            *v = nearest;
        }
    });
    r.transpose()
}
