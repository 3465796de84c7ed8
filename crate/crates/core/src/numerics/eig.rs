use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};
use crate::Scalar;

const MAX_QR_SWEEPS: usize = 10_000;

/// Eigenvalues and right eigenvectors of a real square matrix.
///
/// Eigenvalues are sorted by real part, then imaginary part. Columns of
/// `vectors` are unit-norm, with the phase fixed so the largest-magnitude
/// entry is real and positive; conjugate eigenvalues get conjugate vectors.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Scalar> {
    pub values: Vec<Complex<T>>,
    pub vectors: DMatrix<Complex<T>>,
    /// The input was symmetric: eigenvalues are real and `vectors` orthonormal.
    pub symmetric: bool,
    /// Fewer independent eigenvectors than the algebraic multiplicity.
    pub defective: bool,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Real parts of the eigenvalues, in the sorted order.
    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Real eigenvector matrix, available when every eigenpair is real.
    pub fn real_vectors(&self) -> Option<DMatrix<T>> {
        if self.values.iter().any(|v| v.im != T::zero()) {
            return None;
        }
        Some(self.vectors.map(|c| c.re))
    }

    /// Mode coordinates `z = V⁻¹x` (equal to `Vᵀx` in the symmetric case).
    pub fn coordinates(&self, x: &DVector<T>) -> Result<DVector<Complex<T>>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "mode coordinates",
                expected: self.dim(),
                actual: x.len(),
            });
        }
        let xc = x.map(|v| Complex::new(v, T::zero()));
        if self.symmetric {
            return Ok(self.vectors.adjoint() * xc);
        }
        if self.defective {
            return Err(Error::Numerical {
                operation: "mode coordinates",
                reason: "matrix is defective; eigenvectors do not form a basis".into(),
            });
        }
        self.vectors
            .clone()
            .lu()
            .solve(&xc)
            .ok_or(Error::SingularMatrix {
                context: "mode coordinates",
                condition: f64::INFINITY,
            })
    }

    /// Largest `‖A v − λ v‖` over the returned pairs.
    pub fn max_residual(&self, a: &DMatrix<T>) -> T {
        let ac = a.map(|v| Complex::new(v, T::zero()));
        (0..self.dim())
            .map(|i| {
                let v = self.vectors.column(i);
                (&ac * v - v * self.values[i]).norm()
            })
            .fold(T::zero(), |m, r| m.max(r))
    }
}

fn cmp_complex<T: Scalar>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

fn cabs<T: Scalar>(c: Complex<T>) -> T {
    c.re.hypot(c.im)
}

fn normalize_phase<T: Scalar>(mut v: DVector<Complex<T>>) -> DVector<Complex<T>> {
    let norm = v.norm();
    if norm > T::zero() {
        v /= Complex::new(norm, T::zero());
    }
    // First entry of (near-)maximal modulus decides the phase.
    let max_mod = v.iter().fold(T::zero(), |m, c| m.max(cabs(*c)));
    if let Some(pivot) = v
        .iter()
        .find(|c| cabs(**c) >= max_mod * (T::one() - T::tol(1e-9)))
        .copied()
    {
        let phase = pivot.conj() / Complex::new(cabs(pivot), T::zero());
        v *= phase;
        // Remove rounding noise from the pivot's imaginary part.
        for c in v.iter_mut() {
            if c.im.abs() <= T::tol(1e-15) * max_mod {
                c.im = T::zero();
            }
        }
    }
    v
}

/// Full eigen decomposition of a real square matrix.
///
/// Symmetric input goes through a symmetric QR solver and yields a real
/// orthonormal basis. General input uses the real Schur form for eigenvalues
/// and extracts each eigenvector as the smallest right singular vector of
/// `A − λI`.
pub fn eig<T: Scalar>(a: &DMatrix<T>) -> Result<EigenDecomposition<T>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("eig input"));
    }
    let n = a.nrows();
    let scale = a.norm();
    if n == 0 || scale == T::zero() {
        return Ok(EigenDecomposition {
            values: vec![Complex::new(T::zero(), T::zero()); n],
            vectors: DMatrix::identity(n, n),
            symmetric: true,
            defective: false,
        });
    }

    let symmetric = (a - a.transpose()).norm() <= T::tol(1e-14) * scale;
    if symmetric {
        return symmetric_eig(a);
    }

    let schur =
        Schur::try_new(a.clone(), T::EPS, MAX_QR_SWEEPS).ok_or(Error::EigenNoConvergence)?;
    let mut values: Vec<Complex<T>> = schur
        .complex_eigenvalues()
        .iter()
        .map(|&c| {
            if c.im.abs() <= T::tol(1e-14) * scale {
                Complex::new(c.re, T::zero())
            } else {
                c
            }
        })
        .collect();
    values.sort_by(cmp_complex);

    let cluster_tol = T::tol(1e-6) * scale;
    let null_tol = T::tol(1e-6) * scale;
    let mut columns: Vec<Option<DVector<Complex<T>>>> = vec![None; n];
    let mut defective = false;

    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && cabs(values[j] - values[i]) <= cluster_tol {
            j += 1;
        }
        let lambda = values[i];
        if lambda.im < T::zero() {
            // Filled from the conjugate partner below.
            i = j;
            continue;
        }
        let k = j - i;
        let shifted = DMatrix::from_fn(n, n, |r, c| {
            let d = if r == c { lambda } else { Complex::new(T::zero(), T::zero()) };
            Complex::new(a[(r, c)], T::zero()) - d
        });
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.as_ref().ok_or(Error::EigenNoConvergence)?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| {
            svd.singular_values[p]
                .partial_cmp(&svd.singular_values[q])
                .unwrap_or(Ordering::Equal)
        });
        let null_count = order
            .iter()
            .take(k)
            .filter(|&&p| svd.singular_values[p] <= null_tol)
            .count()
            .max(1);
        if null_count < k {
            defective = true;
        }
        for (slot, idx) in (i..j).enumerate() {
            let src = order[slot.min(null_count - 1)];
            let v: DVector<Complex<T>> = v_t.row(src).adjoint();
            columns[idx] = Some(normalize_phase(v));
        }
        i = j;
    }

    for idx in 0..n {
        if columns[idx].is_none() {
            let target = values[idx].conj();
            let partner = (0..n)
                .filter(|&p| values[p].im > T::zero())
                .min_by(|&p, &q| {
                    cabs(values[p] - target)
                        .partial_cmp(&cabs(values[q] - target))
                        .unwrap_or(Ordering::Equal)
                })
                .ok_or(Error::EigenNoConvergence)?;
            values[idx] = values[partner].conj();
            columns[idx] = columns[partner].as_ref().map(|v| v.map(|c| c.conj()));
        }
    }

    let cols: Vec<DVector<Complex<T>>> = columns.into_iter().map(|c| c.unwrap()).collect();
    Ok(EigenDecomposition {
        values,
        vectors: DMatrix::from_columns(&cols),
        symmetric: false,
        defective,
    })
}

fn symmetric_eig<T: Scalar>(a: &DMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.nrows();
    let sym = (a + a.transpose()) * T::lit(0.5);
    let se = SymmetricEigen::try_new(sym, T::EPS, MAX_QR_SWEEPS).ok_or(Error::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&p, &q| {
        se.eigenvalues[p]
            .partial_cmp(&se.eigenvalues[q])
            .unwrap_or(Ordering::Equal)
    });
    let values = order
        .iter()
        .map(|&p| Complex::new(se.eigenvalues[p], T::zero()))
        .collect();
    let cols: Vec<DVector<Complex<T>>> = order
        .iter()
        .map(|&p| normalize_phase(se.eigenvectors.column(p).map(|v| Complex::new(v, T::zero()))))
        .collect();
    Ok(EigenDecomposition {
        values,
        vectors: DMatrix::from_columns(&cols),
        symmetric: true,
        defective: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_two_by_two() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let e = eig(&k).unwrap();
        assert!(e.symmetric);
        let half_gap = 0.5f64.sqrt();
        assert!((e.values[0].re - (1.5 - half_gap)).abs() < 1e-12);
        assert!((e.values[1].re - (1.5 + half_gap)).abs() < 1e-12);
        let v = e.real_vectors().unwrap();
        let gram = v.transpose() * &v;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!(e.max_residual(&k) <= 1e-9 * k.norm());
    }

    #[test]
    fn complex_pair_with_conjugate_vectors() {
        let k = DMatrix::from_row_slice(2, 2, &[0.5, -2.0, 2.0, 0.5]);
        let e = eig(&k).unwrap();
        assert!(!e.symmetric);
        assert!((e.values[0] - Complex::new(0.5, -2.0)).norm() < 1e-12);
        assert!((e.values[1] - Complex::new(0.5, 2.0)).norm() < 1e-12);
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert!((v0.map(|c| c.conj()) - v1).norm() < 1e-14);
        assert!(e.max_residual(&k) <= 1e-9 * k.norm());
    }

    #[test]
    fn diagonal_modes_are_axes() {
        let k = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let e = eig(&k).unwrap();
        let vals: Vec<f64> = e.real_parts();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        let v = e.real_vectors().unwrap();
        assert_eq!(v.column(0).as_slice(), &[0.0, 1.0, 0.0]);
        assert_eq!(v.column(1).as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn coordinates_invert_the_mode_basis() {
        let k = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, -0.7, 0.0, 2.0, 1.1, 0.4, -0.3, 0.5]);
        let e = eig(&k).unwrap();
        assert!(e.max_residual(&k) <= 1e-9 * k.norm());
        let x = DVector::from_vec(vec![0.3f64, -1.0, 2.0]);
        let z = e.coordinates(&x).unwrap();
        let back = &e.vectors * z;
        for i in 0..3 {
            assert!((back[i].re - x[i]).abs() < 1e-12);
            assert!(back[i].im.abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_block_is_flagged_defective() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let e = eig(&k).unwrap();
        assert!(e.defective);
        assert!(e.coordinates(&DVector::from_vec(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn repeated_eigenvalue_with_full_eigenspace() {
        let k = DMatrix::from_row_slice(3, 3, &[2.0f64, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let e = eig(&k).unwrap();
        assert!(!e.defective);
        assert!(e.max_residual(&k) <= 1e-9 * k.norm());
        let z = e.coordinates(&DVector::from_vec(vec![1.0f64, 2.0, 3.0])).unwrap();
        assert!(z.iter().all(|c| c.re.is_finite()));
    }
}
