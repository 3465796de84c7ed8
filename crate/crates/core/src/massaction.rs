//! Mass-action kinetics used as a reference model for the log-linear one.

use nalgebra::DVector;

use crate::dynamics::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::network::Network;
use crate::numerics::rk4;
use crate::Scalar;

/// Reversible `A ⇌ B` with forward rate `k_f` and reverse rate `k_r` (1/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassActionAB<T> {
    k_f: T,
    k_r: T,
}

impl<T: Scalar> MassActionAB<T> {
    pub fn new(k_f: T, k_r: T) -> Result<Self> {
        for (v, name) in [(k_f, "k_f"), (k_r, "k_r")] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, "rate constants must be positive and finite"));
            }
        }
        Ok(Self { k_f, k_r })
    }

    /// From the forward rate and `K_eq = k_f/k_r`.
    pub fn from_equilibrium(k_f: T, k_eq: T) -> Result<Self> {
        if !(k_eq > T::zero()) || !k_eq.is_finite() {
            return Err(invalid("K_eq", "must be positive and finite"));
        }
        Self::new(k_f, k_f / k_eq)
    }

    pub fn k_f(&self) -> T {
        self.k_f
    }

    pub fn k_r(&self) -> T {
        self.k_r
    }

    pub fn k_eq(&self) -> T {
        self.k_f / self.k_r
    }

    /// Log-linear rate `k = k_r(1 + K_eq)` with the same linearization at
    /// `Q = K_eq`.
    pub fn matched_rate(&self) -> T {
        self.k_r * (T::one() + self.k_eq())
    }

    /// `dQ/dt = k_r(1 + Q)(K_eq − Q)`.
    pub fn quotient_rate(&self, q: T) -> T {
        self.k_r * (T::one() + q) * (self.k_eq() - q)
    }

    /// RK4 integration of the quotient equation. `dt_max` defaults to
    /// `min(1e-3·(t_end − t₀), 1e-3)`.
    pub fn simulate_quotient(&self, q0: T, times: &[T], dt_max: Option<T>) -> Result<Trajectory<T>> {
        if !(q0 > T::zero()) || !q0.is_finite() {
            return Err(invalid("Q0", "must be positive and finite"));
        }
        if times.is_empty() {
            return Err(Error::InvalidTimeGrid);
        }
        let k_eq = DVector::from_element(1, self.k_eq());
        let x0 = DVector::from_element(1, q0);
        let qs = if times.len() == 1 {
            vec![x0]
        } else {
            let dt = dt_max.unwrap_or_else(|| default_step(times));
            rk4(
                |_, q: &DVector<T>| DVector::from_element(1, self.quotient_rate(q[0])),
                &x0,
                times,
                dt,
            )?
        };
        Trajectory::from_quotients(times.to_vec(), qs, &k_eq)
    }
}

fn default_step<T: Scalar>(times: &[T]) -> T {
    let span = times[times.len() - 1] - times[0];
    (span * T::lit(1e-3)).min(T::lit(1e-3))
}

/// Per-reaction forward and reverse rate constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversibleRates<T: Scalar> {
    pub forward: DVector<T>,
    pub reverse: DVector<T>,
}

impl<T: Scalar> ReversibleRates<T> {
    /// `K_eq,j = k_f,j / k_r,j`.
    pub fn equilibrium_constants(&self) -> DVector<T> {
        self.forward.component_div(&self.reverse)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassActionTrajectory<T: Scalar> {
    pub times: Vec<T>,
    pub concentrations: Vec<DVector<T>>,
    pub quotients: Vec<DVector<T>>,
}

/// Elementary reversible fluxes `v_j = k_f,j ∏ c_i^{−S_ij} − k_r,j ∏ c_i^{S_ij}`
/// (reactant product over `S_ij < 0`, product product over `S_ij > 0`).
pub fn mass_action_fluxes<T: Scalar>(
    net: &Network<T>,
    rates: &ReversibleRates<T>,
    c: &DVector<T>,
) -> DVector<T> {
    let s = net.stoichiometry();
    DVector::from_fn(net.n_reactions(), |j, _| {
        let mut fwd = rates.forward[j];
        let mut rev = rates.reverse[j];
        for i in 0..net.n_species() {
            let coef = s[(i, j)];
            if coef < T::zero() {
                fwd *= c[i].powf(-coef);
            } else if coef > T::zero() {
                rev *= c[i].powf(coef);
            }
        }
        fwd - rev
    })
}

/// RK4 integration of `dc/dt = S v(c)` with quotients computed from `c`.
pub fn simulate_mass_action_network<T: Scalar>(
    net: &Network<T>,
    rates: &ReversibleRates<T>,
    c0: &DVector<T>,
    times: &[T],
    dt_max: Option<T>,
) -> Result<MassActionTrajectory<T>> {
    let r = net.n_reactions();
    for (v, ctx) in [(&rates.forward, "forward rates"), (&rates.reverse, "reverse rates")] {
        if v.len() != r {
            return Err(Error::DimensionMismatch {
                context: ctx,
                expected: r,
                actual: v.len(),
            });
        }
        if v.iter().any(|k| !(*k > T::zero()) || !k.is_finite()) {
            return Err(invalid(ctx, "rate constants must be positive and finite"));
        }
    }
    if c0.len() != net.n_species() {
        return Err(Error::DimensionMismatch {
            context: "initial concentrations",
            expected: net.n_species(),
            actual: c0.len(),
        });
    }
    if c0.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(invalid("c0", "initial concentrations must be positive"));
    }
    if times.is_empty() {
        return Err(Error::InvalidTimeGrid);
    }
    let s = net.stoichiometry();
    let concentrations = if times.len() == 1 {
        vec![c0.clone()]
    } else {
        let dt = dt_max.unwrap_or_else(|| default_step(times));
        rk4(|_, c| s * mass_action_fluxes(net, rates, c), c0, times, dt)?
    };
    let quotients = concentrations
        .iter()
        .zip(times)
        .map(|(c, t)| {
            net.quotients(c).map_err(|_| Error::Numerical {
                operation: "mass-action simulation",
                reason: format!("a concentration left the positive orthant by t = {t}"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MassActionTrajectory {
        times: times.to_vec(),
        concentrations,
        quotients,
    })
}
