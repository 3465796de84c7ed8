//! Positive concentrations from target log-quotients and conserved totals.
//!
//! Given `x* ∈ Im(Sᵀ)` and totals `y*`, pick `u₀` with `Sᵀu₀ = x*` and set
//! `c₀ = exp(u₀)`. Moving along `c(α) = exp(Lα) ∘ c₀` leaves the quotients
//! unchanged (since `SᵀL = 0`), and the totals are matched by minimizing the
//! strictly convex
//!
//! ```text
//! f(α) = Σ_i c₀_i exp((Lα)_i) − y*ᵀα,   ∇f = Lᵀc(α) − y*,   ∇²f = Lᵀ diag(c(α)) L
//! ```
//!
//! with damped Newton. The minimizer is unique whenever `y*` is attainable.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::network::{Network, ACHIEVABILITY_TOL};
use crate::numerics::{lstsq_min_norm, newton_minimize, NewtonError, NewtonOptions, ObjectiveEval};
use crate::Scalar;

/// Target quotients and totals for a network.
#[derive(Debug, Clone)]
pub struct ReconstructionProblem<'a, T: Scalar> {
    pub network: &'a Network<T>,
    /// Target `ln Q` (one entry per reaction).
    pub x_star: DVector<T>,
    /// Target `Lᵀc` (one entry per conservation law of
    /// [`Network::conservation_basis`]).
    pub y_star: DVector<T>,
}

impl<'a, T: Scalar> ReconstructionProblem<'a, T> {
    pub fn new(network: &'a Network<T>, x_star: DVector<T>, y_star: DVector<T>) -> Result<Self> {
        if x_star.len() != network.n_reactions() {
            return Err(Error::DimensionMismatch {
                context: "target log-quotients",
                expected: network.n_reactions(),
                actual: x_star.len(),
            });
        }
        let m = network.conservation_basis().dim();
        if y_star.len() != m {
            return Err(Error::DimensionMismatch {
                context: "target totals",
                expected: m,
                actual: y_star.len(),
            });
        }
        if x_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target log-quotients"));
        }
        if y_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target totals"));
        }
        Ok(Self {
            network,
            x_star,
            y_star,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult<T: Scalar> {
    /// Positive concentrations achieving both targets.
    pub c_star: DVector<T>,
    /// Kernel coordinates with `c* = exp(Lα*) ∘ c₀`.
    pub alpha_star: DVector<T>,
    pub iterations: usize,
    /// `‖Lᵀc* − y*‖`.
    pub residual_totals: T,
    /// `‖Sᵀ ln c* − x*‖`.
    pub residual_quotients: T,
    /// Objective value at every Newton iterate.
    pub objective_history: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct ReconstructOptions<T: Scalar> {
    /// Converged once `‖∇f‖ ≤ gradient_tol·max(1, ‖y*‖)`.
    pub gradient_tol: T,
    pub max_iter: usize,
    /// Iterates with `‖α‖∞ > divergence_factor·max(1, ‖u₀‖∞)` count as
    /// divergent, which signals unattainable totals.
    pub divergence_factor: T,
}

impl<T: Scalar> Default for ReconstructOptions<T> {
    fn default() -> Self {
        Self {
            gradient_tol: T::tol(1e-10),
            max_iter: 200,
            divergence_factor: T::lit(1e3),
        }
    }
}

/// Minimum-norm solution `u₀` of `Sᵀu = x*`.
///
/// Fails with [`Error::Unachievable`] when `x*` is not in `Im(Sᵀ)`.
pub fn base_log_point<T: Scalar>(net: &Network<T>, x_star: &DVector<T>) -> Result<DVector<T>> {
    if x_star.len() != net.n_reactions() {
        return Err(Error::DimensionMismatch {
            context: "target log-quotients",
            expected: net.n_reactions(),
            actual: x_star.len(),
        });
    }
    let s_t = net.stoichiometry().transpose();
    let u0 = lstsq_min_norm(&s_t, x_star)?;
    let residual = (&s_t * &u0 - x_star).norm();
    let tolerance = T::tol(ACHIEVABILITY_TOL) * x_star.norm().max(T::one());
    if residual > tolerance {
        return Err(Error::Unachievable {
            residual: residual.to_f64_lossy(),
            tolerance: tolerance.to_f64_lossy(),
        });
    }
    Ok(u0)
}

/// Base point `c₀ = exp(u₀)` reproducing the target quotients.
pub fn base_point<T: Scalar>(net: &Network<T>, x_star: &DVector<T>) -> Result<DVector<T>> {
    Ok(base_log_point(net, x_star)?.map(|v| v.exp()))
}

/// The strictly convex objective `f(α) = Φ(α) − y*ᵀα`.
#[derive(Debug, Clone)]
pub struct Objective<'a, T: Scalar> {
    pub l: &'a DMatrix<T>,
    pub c0: &'a DVector<T>,
    pub y_star: &'a DVector<T>,
}

impl<T: Scalar> Objective<'_, T> {
    /// Concentrations `exp(Lα) ∘ c₀` along the kernel family.
    pub fn concentrations(&self, alpha: &DVector<T>) -> DVector<T> {
        (self.l * alpha).zip_map(self.c0, |s, c| c * s.exp())
    }

    /// Value, gradient and Hessian at `alpha`; `None` on overflow.
    pub fn evaluate(&self, alpha: &DVector<T>) -> Option<ObjectiveEval<T>> {
        let c = self.concentrations(alpha);
        if c.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let value = c.sum() - self.y_star.dot(alpha);
        let gradient = self.l.transpose() * &c - self.y_star;
        let weighted = DMatrix::from_fn(self.l.nrows(), self.l.ncols(), |i, j| self.l[(i, j)] * c[i]);
        let hessian = self.l.transpose() * weighted;
        let eval = ObjectiveEval {
            value,
            gradient,
            hessian,
        };
        if eval.value.is_finite() {
            Some(eval)
        } else {
            None
        }
    }
}

/// Finds the unique positive `c*` with `Sᵀ ln c* = x*` and `Lᵀc* = y*`.
pub fn reconstruct_concentrations<T: Scalar>(
    problem: &ReconstructionProblem<'_, T>,
    opts: &ReconstructOptions<T>,
) -> Result<ReconstructionResult<T>> {
    let net = problem.network;
    let u0 = base_log_point(net, &problem.x_star)?;
    let c0 = u0.map(|v| v.exp());
    if c0.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(Error::Numerical {
            operation: "reconstruct",
            reason: "base point concentrations are out of floating-point range".into(),
        });
    }
    let l = net.conservation_basis().l;
    let m = l.ncols();

    let finish = |alpha: DVector<T>, iterations: usize, history: Vec<T>| {
        let c_star = (&l * &alpha).zip_map(&c0, |s, c| c * s.exp());
        if c_star.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::Numerical {
                operation: "reconstruct",
                reason: "reconstructed concentrations are out of floating-point range".into(),
            });
        }
        let residual_totals = (l.transpose() * &c_star - &problem.y_star).norm();
        let residual_quotients =
            (net.stoichiometry().transpose() * c_star.map(|v| v.ln()) - &problem.x_star).norm();
        Ok(ReconstructionResult {
            c_star,
            alpha_star: alpha,
            iterations,
            residual_totals,
            residual_quotients,
            objective_history: history,
        })
    };

    if m == 0 {
        return finish(DVector::zeros(0), 0, Vec::new());
    }

    if !(opts.gradient_tol > T::zero()) {
        return Err(invalid("gradient_tol", "must be positive"));
    }
    let objective = Objective {
        l: &l,
        c0: &c0,
        y_star: &problem.y_star,
    };
    let scale = u0.amax().max(T::one());
    let newton_opts = NewtonOptions {
        gradient_tol: opts.gradient_tol * problem.y_star.norm().max(T::one()),
        max_iter: opts.max_iter,
        divergence_radius: opts.divergence_factor * scale,
        ..NewtonOptions::default()
    };
    match newton_minimize(|a| objective.evaluate(a), DVector::zeros(m), &newton_opts) {
        Ok(out) => finish(out.argmin, out.iterations, out.history),
        Err(NewtonError::Diverged { iterations, norm }) => Err(Error::InfeasibleTotals {
            reason: format!("Newton iterates diverged (|alpha| = {norm:e} after {iterations} iterations)"),
        }),
        Err(NewtonError::MaxIterations {
            iterations,
            gradient_norm,
        }) => Err(Error::InfeasibleTotals {
            reason: format!(
                "no convergence in {iterations} iterations (gradient norm {gradient_norm:e})"
            ),
        }),
        Err(NewtonError::LineSearch {
            iterations,
            gradient_norm,
        }) => Err(Error::Numerical {
            operation: "reconstruct",
            reason: format!(
                "line search failed at iteration {iterations} (gradient norm {gradient_norm:e})"
            ),
        }),
        Err(NewtonError::BadStart) => Err(Error::Numerical {
            operation: "reconstruct",
            reason: "objective not finite at the base point".into(),
        }),
    }
}
