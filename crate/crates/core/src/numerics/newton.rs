use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::Scalar;

/// Value, gradient and Hessian of a twice-differentiable objective.
#[derive(Debug, Clone)]
pub struct ObjectiveEval<T: Scalar> {
    pub value: T,
    pub gradient: DVector<T>,
    pub hessian: DMatrix<T>,
}

impl<T: Scalar> ObjectiveEval<T> {
    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|v| v.is_finite())
            && self.hessian.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOptions<T: Scalar> {
    /// Converged once `‖∇f‖ ≤ gradient_tol`.
    pub gradient_tol: T,
    pub max_iter: usize,
    /// Armijo sufficient-decrease parameter.
    pub armijo: T,
    /// Step shrink factor for backtracking.
    pub backtrack: T,
    pub max_backtracks: usize,
    /// Iterates with `‖α‖∞` beyond this are declared divergent.
    pub divergence_radius: T,
    /// Full Newton steps taken after the gradient test passes, each kept
    /// only while it still lowers the gradient norm.
    pub polish_steps: usize,
}

impl<T: Scalar> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            gradient_tol: T::tol(1e-10),
            max_iter: 200,
            armijo: T::lit(1e-4),
            backtrack: T::lit(0.5),
            max_backtracks: 60,
            divergence_radius: T::lit(1e3),
            polish_steps: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome<T: Scalar> {
    pub argmin: DVector<T>,
    pub value: T,
    pub gradient_norm: T,
    pub iterations: usize,
    /// Objective value at every iterate, starting with the initial point.
    pub history: Vec<T>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NewtonError {
    #[error("objective is not finite at the starting point")]
    BadStart,
    #[error("iterate left the divergence radius after {iterations} iterations (|alpha| = {norm})")]
    Diverged { iterations: usize, norm: f64 },
    #[error("no convergence in {iterations} iterations (gradient norm {gradient_norm:e})")]
    MaxIterations { iterations: usize, gradient_norm: f64 },
    #[error("line search failed at iteration {iterations} (gradient norm {gradient_norm:e})")]
    LineSearch { iterations: usize, gradient_norm: f64 },
}

/// Damped Newton minimization with Armijo backtracking.
///
/// `objective` returns `None` (or non-finite values) where the function
/// cannot be evaluated, e.g. on overflow; such trial points are rejected by
/// the line search. When the Hessian is not positive definite, or the Newton
/// direction admits no acceptable step, steepest descent is used instead.
///
/// Close to the minimizer the predicted decrease can sink below the rounding
/// noise of `f`; a full step is then accepted if it reduces the gradient norm.
/// The history is therefore non-increasing only up to that noise.
pub fn newton_minimize<T, F>(
    mut objective: F,
    start: DVector<T>,
    opts: &NewtonOptions<T>,
) -> Result<NewtonOutcome<T>, NewtonError>
where
    T: Scalar,
    F: FnMut(&DVector<T>) -> Option<ObjectiveEval<T>>,
{
    let mut alpha = start;
    let mut cur = objective(&alpha)
        .filter(ObjectiveEval::is_finite)
        .ok_or(NewtonError::BadStart)?;
    let mut history = vec![cur.value];

    for iter in 0..=opts.max_iter {
        let gnorm = cur.gradient.norm();
        if gnorm <= opts.gradient_tol {
            // An absolute gradient test is loose for tiny components of the
            // gradient; a couple of unit steps recover full precision.
            let mut iterations = iter;
            let mut gnorm = gnorm;
            for _ in 0..opts.polish_steps {
                let Some(d) = cur.hessian.clone().cholesky().map(|ch| -ch.solve(&cur.gradient)) else {
                    break;
                };
                let trial = &alpha + d;
                match objective(&trial).filter(ObjectiveEval::is_finite) {
                    Some(ev) if ev.gradient.norm() < gnorm => {
                        gnorm = ev.gradient.norm();
                        alpha = trial;
                        cur = ev;
                        history.push(cur.value);
                        iterations += 1;
                    }
                    _ => break,
                }
            }
            return Ok(NewtonOutcome {
                argmin: alpha,
                value: cur.value,
                gradient_norm: gnorm,
                iterations,
                history,
            });
        }
        if iter == opts.max_iter {
            return Err(NewtonError::MaxIterations {
                iterations: iter,
                gradient_norm: gnorm.to_f64_lossy(),
            });
        }

        let newton_dir = cur
            .hessian
            .clone()
            .cholesky()
            .map(|ch| -ch.solve(&cur.gradient))
            .filter(|d| d.iter().all(|v| v.is_finite()));
        let steepest = -cur.gradient.clone();
        let noise = T::tol(1e-13) * (T::one() + cur.value.abs());

        let mut accepted = None;
        for direction in newton_dir.iter().chain(std::iter::once(&steepest)) {
            let slope = cur.gradient.dot(direction);
            let mut step = T::one();
            for _ in 0..opts.max_backtracks {
                let trial = &alpha + direction * step;
                if let Some(ev) = objective(&trial).filter(ObjectiveEval::is_finite) {
                    if ev.value <= cur.value + opts.armijo * step * slope {
                        accepted = Some((trial, ev));
                        break;
                    }
                    if step == T::one() && -slope <= noise && ev.gradient.norm() < gnorm {
                        accepted = Some((trial, ev));
                        break;
                    }
                }
                step *= opts.backtrack;
            }
            if accepted.is_some() {
                break;
            }
        }

        let (next, ev) = accepted.ok_or(NewtonError::LineSearch {
            iterations: iter,
            gradient_norm: gnorm.to_f64_lossy(),
        })?;
        let radius = next.amax();
        if radius > opts.divergence_radius {
            return Err(NewtonError::Diverged {
                iterations: iter + 1,
                norm: radius.to_f64_lossy(),
            });
        }
        alpha = next;
        cur = ev;
        history.push(cur.value);
    }
    unreachable!("loop returns on its final iteration")
}
