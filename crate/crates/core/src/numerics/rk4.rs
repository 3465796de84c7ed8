use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::Scalar;

/// One classical Runge–Kutta step of size `h` from `(t, x)`.
pub fn rk4_step<T, F>(f: &mut F, t: T, x: &DVector<T>, h: T) -> DVector<T>
where
    T: Scalar,
    F: FnMut(T, &DVector<T>) -> DVector<T>,
{
    let half = T::lit(0.5);
    let k1 = f(t, x);
    let k2 = f(t + h * half, &(x + &k1 * (h * half)));
    let k3 = f(t + h * half, &(x + &k2 * (h * half)));
    let k4 = f(t + h, &(x + &k3 * h));
    x + (k1 + (k2 + k3) * T::lit(2.0) + k4) * (h / T::lit(6.0))
}

/// Fixed-step RK4 integration of `dx/dt = f(t, x)` sampled on `grid`.
///
/// Each grid interval is split into the smallest number of equal substeps no
/// longer than `dt_max`. The first sample is `x0` itself.
pub fn rk4<T, F>(mut f: F, x0: &DVector<T>, grid: &[T], dt_max: T) -> Result<Vec<DVector<T>>>
where
    T: Scalar,
    F: FnMut(T, &DVector<T>) -> DVector<T>,
{
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTimeGrid);
    }
    if !(dt_max > T::zero()) || !dt_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt_max".into(),
            reason: "must be positive and finite".into(),
        });
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut x = x0.clone();
    out.push(x.clone());
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / dt_max).ceil().to_f64_lossy().max(1.0) as usize;
        let h = span / T::lit(steps as f64);
        for s in 0..steps {
            let t = w[0] + h * T::lit(s as f64);
            x = rk4_step(&mut f, t, &x, h);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                operation: "rk4",
                reason: format!("state became non-finite before t = {}", w[1]),
            });
        }
        out.push(x.clone());
    }
    Ok(out)
}
