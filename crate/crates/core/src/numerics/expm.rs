use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

// Padé numerator coefficients b_0..b_m for the diagonal [m/m] approximants.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norm for which each degree meets double-precision backward error.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

fn one_norm<T: Scalar>(a: &DMatrix<T>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, v| s + v.abs()))
        .fold(T::zero(), |m, s| m.max(s))
}

fn lit_mul<T: Scalar>(a: &DMatrix<T>, c: f64) -> DMatrix<T> {
    a * T::lit(c)
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant of degree 3, 5, 7, 9 or 13 chosen from the 1-norm.
pub fn expm<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("expm input"));
    }
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    if n == 0 {
        return Ok(ident);
    }
    let norm = one_norm(a).to_f64_lossy();

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, &ident, coeffs);
            return pade_ratio(&u, &v);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * T::lit(0.5f64.powi(s));
    let (u, v) = pade13(&scaled, &ident);
    let mut r = pade_ratio(&u, &v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low<T: Scalar>(
    a: &DMatrix<T>,
    ident: &DMatrix<T>,
    b: &[f64],
) -> (DMatrix<T>, DMatrix<T>) {
    let a2 = a * a;
    // Even powers I, A², A⁴, ...
    let mut powers = vec![ident.clone()];
    for k in 1..b.len().div_ceil(2) {
        let next = &powers[k - 1] * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::zeros(a.nrows(), a.ncols());
    let mut v = DMatrix::zeros(a.nrows(), a.ncols());
    for (k, p) in powers.iter().enumerate() {
        if 2 * k + 1 < b.len() {
            u_inner += lit_mul(p, b[2 * k + 1]);
        }
        v += lit_mul(p, b[2 * k]);
    }
    (a * u_inner, v)
}

fn pade13<T: Scalar>(a: &DMatrix<T>, ident: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let b = &PADE13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_high = lit_mul(&a6, b[13]) + lit_mul(&a4, b[11]) + lit_mul(&a2, b[9]);
    let u_inner = &a6 * u_high
        + lit_mul(&a6, b[7])
        + lit_mul(&a4, b[5])
        + lit_mul(&a2, b[3])
        + lit_mul(ident, b[1]);
    let u = a * u_inner;
    let v_high = lit_mul(&a6, b[12]) + lit_mul(&a4, b[10]) + lit_mul(&a2, b[8]);
    let v = &a6 * v_high
        + lit_mul(&a6, b[6])
        + lit_mul(&a4, b[4])
        + lit_mul(&a2, b[2])
        + lit_mul(ident, b[0]);
    (u, v)
}

/// Solves `(V - U) R = (V + U)`.
fn pade_ratio<T: Scalar>(u: &DMatrix<T>, v: &DMatrix<T>) -> Result<DMatrix<T>> {
    let p = v + u;
    let q = v - u;
    q.lu().solve(&p).ok_or(Error::SingularMatrix {
        context: "expm",
        condition: f64::INFINITY,
    })
}
