use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::Scalar;

/// Molar gas constant, J/(mol·K).
pub const GAS_CONSTANT: f64 = 8.314_462_618;

/// Reaction Gibbs energies `ΔG_i = R T x_i` (J/mol) from log-deviations.
pub fn gibbs_deviation<T: Scalar>(
    x: &DVector<T>,
    gas_constant: T,
    temperature: T,
) -> Result<DVector<T>> {
    if !(temperature > T::zero()) {
        return Err(invalid("temperature", "must be positive"));
    }
    Ok(x * (gas_constant * temperature))
}

/// Standard Gibbs energies `ΔG° = −R T ln K_eq` (J/mol).
pub fn standard_gibbs<T: Scalar>(
    k_eq: &DVector<T>,
    gas_constant: T,
    temperature: T,
) -> Result<DVector<T>> {
    if !(temperature > T::zero()) {
        return Err(invalid("temperature", "must be positive"));
    }
    if k_eq.iter().any(|k| !(*k > T::zero())) {
        return Err(invalid("K_eq", "equilibrium constants must be positive"));
    }
    Ok(k_eq.map(|k| -gas_constant * temperature * k.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibrium_has_zero_gibbs() {
        let g = gibbs_deviation(&DVector::<f64>::zeros(3), 8.314, 298.15).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tenfold_quotient() {
        let g = gibbs_deviation(&DVector::from_vec(vec![10f64.ln()]), 8.314, 298.15).unwrap();
        // 8.314 · 298.15 · ln 10
        assert!((g[0] - 5707.7).abs() < 0.1, "{}", g[0]);
    }

    #[test]
    fn gibbs_split_is_consistent() {
        // ΔG = ΔG° + RT ln Q
        let (r, t) = (GAS_CONSTANT, 310.0);
        let k = DVector::from_vec(vec![0.5f64, 20.0]);
        let q = DVector::from_vec(vec![50.0f64, 3.0]);
        let x = q.zip_map(&k, |q, k| (q / k).ln());
        let dg = gibbs_deviation(&x, r, t).unwrap();
        let dg0 = standard_gibbs(&k, r, t).unwrap();
        for i in 0..2 {
            let alt = dg0[i] + r * t * q[i].ln();
            assert!((dg[i] - alt).abs() < 1e-9 * dg[i].abs().max(1.0));
        }
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(gibbs_deviation(&DVector::from_vec(vec![1.0]), 8.314, 0.0).is_err());
        assert!(gibbs_deviation(&DVector::from_vec(vec![1.0]), 8.314, -1.0).is_err());
    }
}
