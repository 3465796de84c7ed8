#![allow(dead_code)]

use rand::Rng;
use rqdyn::network::Network;
use rqdyn::{DMatrix, DVector};

/// Random network with `n` species and `r` reactions. Every column has one
/// to three reactants and one to three products with coefficients 1 or 2.
pub fn random_network<R: Rng>(rng: &mut R, n: usize, r: usize) -> Network<f64> {
    let mut s = DMatrix::zeros(n, r);
    for j in 0..r {
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let reactants = rng.random_range(1..=3.min(n - 1));
        let products = rng.random_range(1..=3.min(n - reactants));
        for (k, i) in order.iter().take(reactants + products).enumerate() {
            let coef = rng.random_range(1..=2) as f64;
            s[(*i, j)] = if k < reactants { -coef } else { coef };
        }
    }
    Network::from_matrix(
        (0..n).map(|i| format!("S{i}")).collect(),
        (0..r).map(|j| format!("R{j}")).collect(),
        s,
    )
    .expect("generated network is valid")
}

/// Concentrations log-uniform in (0.01, 100).
pub fn random_concentrations<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| 10f64.powf(rng.random_range(-2.0..2.0)))
}

/// Largest componentwise relative error.
pub fn max_rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Reference scalar RK4 on `dx/dt = f(t, x)` with `steps` equal steps.
pub fn rk4_scalar(f: impl Fn(f64, f64) -> f64, x0: f64, t_end: f64, steps: usize) -> f64 {
    let h = t_end / steps as f64;
    let mut x = x0;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, x);
        let k2 = f(t + h / 2.0, x + h / 2.0 * k1);
        let k3 = f(t + h / 2.0, x + h / 2.0 * k2);
        let k4 = f(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}
