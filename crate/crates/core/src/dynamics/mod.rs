//! Log-linear quotient dynamics `d ln Q/dt = −K ln(Q/K_eq) + u(t)`.
//!
//! In the log-deviation `x = ln(Q/K_eq)` the system is linear,
//! `dx/dt = −K x + u`, so undriven trajectories are `x(t) = e^{−Kt} x₀`.

mod control;
mod modes;
mod thermo;

pub use control::{ControlInput, Segment};
pub use modes::{eigenmodes, mode_coordinates, oscillation_parameters, Oscillation};
pub use thermo::{gibbs_deviation, standard_gibbs, GAS_CONSTANT};

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::numerics::{eig, expm, rk4, solve};
use crate::Scalar;

/// Relaxation matrix `K` (1/s) and equilibrium constants `K_eq`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearSystem<T: Scalar> {
    k: DMatrix<T>,
    k_eq: DVector<T>,
}

impl<T: Scalar> LogLinearSystem<T> {
    pub fn new(k: DMatrix<T>, k_eq: DVector<T>) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::NotSquare {
                rows: k.nrows(),
                cols: k.ncols(),
            });
        }
        if k.nrows() == 0 {
            return Err(invalid("K", "system must have at least one reaction"));
        }
        if k_eq.len() != k.nrows() {
            return Err(Error::DimensionMismatch {
                context: "equilibrium constants",
                expected: k.nrows(),
                actual: k_eq.len(),
            });
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("relaxation matrix"));
        }
        if k_eq.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(invalid("K_eq", "equilibrium constants must be positive and finite"));
        }
        Ok(Self { k, k_eq })
    }

    /// Single reaction with rate `k`.
    pub fn scalar(k: T, k_eq: T) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, k), DVector::from_element(1, k_eq))
    }

    /// Independent reactions, `K = diag(rates)`.
    pub fn diagonal(rates: &[T], k_eq: &[T]) -> Result<Self> {
        Self::new(
            DMatrix::from_diagonal(&DVector::from_row_slice(rates)),
            DVector::from_row_slice(k_eq),
        )
    }

    pub fn dim(&self) -> usize {
        self.k_eq.len()
    }

    pub fn relaxation(&self) -> &DMatrix<T> {
        &self.k
    }

    pub fn equilibrium(&self) -> &DVector<T> {
        &self.k_eq
    }

    /// `x = ln(Q/K_eq)`.
    pub fn log_deviation(&self, q: &DVector<T>) -> Result<DVector<T>> {
        self.check_len(q.len(), "quotients")?;
        if q.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(invalid("Q", "reaction quotients must be positive and finite"));
        }
        Ok(q.zip_map(&self.k_eq, |q, k| (q / k).ln()))
    }

    /// `Q = K_eq ∘ exp(x)`, rejecting values that under- or overflow.
    pub fn quotients(&self, x: &DVector<T>) -> Result<DVector<T>> {
        self.quotients_at(x, T::zero())
    }

    fn quotients_at(&self, x: &DVector<T>, time: T) -> Result<DVector<T>> {
        self.check_len(x.len(), "log-deviation")?;
        let mut q = DVector::zeros(x.len());
        for i in 0..x.len() {
            let v = self.k_eq[i] * x[i].exp();
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::QuotientRange {
                    time: time.to_f64_lossy(),
                    value: x[i].to_f64_lossy(),
                });
            }
            q[i] = v;
        }
        Ok(q)
    }

    /// All eigenvalues of `K` have positive real part, so `x → 0` without drive.
    pub fn is_stable(&self) -> Result<bool> {
        Ok(eig(&self.k)?.values.iter().all(|v| v.re > T::zero()))
    }

    /// Smallest real part among the eigenvalues of `K`.
    pub fn spectral_abscissa(&self) -> Result<T> {
        Ok(eig(&self.k)?
            .values
            .iter()
            .fold(T::max_value().unwrap(), |m, v| m.min(v.re)))
    }

    fn check_len(&self, len: usize, context: &'static str) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Sampled solution: times, log-deviations and quotients.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Scalar> {
    times: Vec<T>,
    x: Vec<DVector<T>>,
    q: Vec<DVector<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Builds a trajectory from log-deviation samples; `Q = K_eq ∘ exp(x)`.
    pub fn from_log_deviations(
        times: Vec<T>,
        x: Vec<DVector<T>>,
        k_eq: &DVector<T>,
    ) -> Result<Self> {
        check_grid(&times)?;
        if x.len() != times.len() {
            return Err(Error::DimensionMismatch {
                context: "trajectory samples",
                expected: times.len(),
                actual: x.len(),
            });
        }
        let sys_like = LogLinearSystem {
            k: DMatrix::zeros(0, 0),
            k_eq: k_eq.clone(),
        };
        let q = times
            .iter()
            .zip(&x)
            .map(|(&t, xi)| sys_like.quotients_at(xi, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { times, x, q })
    }

    /// Builds a trajectory from quotient samples; `x = ln(Q/K_eq)`.
    pub fn from_quotients(times: Vec<T>, q: Vec<DVector<T>>, k_eq: &DVector<T>) -> Result<Self> {
        check_grid(&times)?;
        if q.len() != times.len() {
            return Err(Error::DimensionMismatch {
                context: "trajectory samples",
                expected: times.len(),
                actual: q.len(),
            });
        }
        let x = q
            .iter()
            .map(|qi| {
                if qi.len() != k_eq.len() {
                    return Err(Error::DimensionMismatch {
                        context: "quotient sample",
                        expected: k_eq.len(),
                        actual: qi.len(),
                    });
                }
                if qi.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
                    return Err(invalid("Q", "quotient samples must be positive and finite"));
                }
                Ok(qi.zip_map(k_eq, |q, k| (q / k).ln()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { times, x, q })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn log_deviations(&self) -> &[DVector<T>] {
        &self.x
    }

    pub fn quotients(&self) -> &[DVector<T>] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, |v| v.len())
    }

    /// Time series of `x_i`.
    pub fn x_series(&self, i: usize) -> Vec<T> {
        self.x.iter().map(|v| v[i]).collect()
    }

    /// Time series of `Q_i`.
    pub fn q_series(&self, i: usize) -> Vec<T> {
        self.q.iter().map(|v| v[i]).collect()
    }

    pub fn last_x(&self) -> &DVector<T> {
        self.x.last().expect("trajectories are nonempty")
    }

    pub fn last_q(&self) -> &DVector<T> {
        self.q.last().expect("trajectories are nonempty")
    }
}

fn check_grid<T: Scalar>(times: &[T]) -> Result<()> {
    if times.is_empty()
        || times.iter().any(|t| !t.is_finite())
        || times.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}

/// `samples` evenly spaced times on `[t0, t_end]`.
///
/// A zero-length interval yields the single point `t0`.
pub fn uniform_grid<T: Scalar>(t0: T, t_end: T, samples: usize) -> Result<Vec<T>> {
    if !t0.is_finite() || !t_end.is_finite() || t_end < t0 {
        return Err(Error::InvalidTimeGrid);
    }
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    if t_end == t0 || samples == 1 {
        return Ok(vec![t0]);
    }
    let step = (t_end - t0) / T::lit((samples - 1) as f64);
    let mut grid: Vec<T> = (0..samples)
        .map(|i| t0 + step * T::lit(i as f64))
        .collect();
    grid[samples - 1] = t_end;
    Ok(grid)
}

fn positive<T: Scalar>(v: T, name: &str) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be positive and finite"))
    }
}

/// Closed-form single-reaction solution `Q(t) = K_eq·(Q₀/K_eq)^{e^{−kt}}`.
pub fn single_solution<T: Scalar>(k: T, k_eq: T, q0: T, t: T) -> Result<T> {
    single_controlled_solution(k, k_eq, q0, T::zero(), t)
}

/// Closed-form single-reaction solution under constant drive `u`:
/// `Q(t) = K_eq·exp{[ln(Q₀/K_eq) − u/k]·e^{−kt} + u/k}`.
pub fn single_controlled_solution<T: Scalar>(k: T, k_eq: T, q0: T, u: T, t: T) -> Result<T> {
    positive(k, "k")?;
    positive(k_eq, "K_eq")?;
    positive(q0, "Q0")?;
    if !u.is_finite() {
        return Err(Error::NonFinite("drive"));
    }
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(invalid("t", "must be nonnegative and finite"));
    }
    let x_ss = u / k;
    let x0 = (q0 / k_eq).ln();
    let x = (x0 - x_ss) * (-k * t).exp() + x_ss;
    let q = k_eq * x.exp();
    if !(q > T::zero()) || !q.is_finite() {
        return Err(Error::QuotientRange {
            time: t.to_f64_lossy(),
            value: x.to_f64_lossy(),
        });
    }
    Ok(q)
}

fn check_state<T: Scalar>(sys: &LogLinearSystem<T>, x0: &DVector<T>) -> Result<()> {
    sys.check_len(x0.len(), "initial log-deviation")?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial log-deviation"));
    }
    Ok(())
}

/// Undriven solution `x(t) = e^{−Kt} x₀` via the matrix exponential.
pub fn analytic_solution<T: Scalar>(
    sys: &LogLinearSystem<T>,
    x0: &DVector<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    check_state(sys, x0)?;
    check_grid(times)?;
    let xs = times
        .iter()
        .map(|&t| {
            if t == T::zero() {
                Ok(x0.clone())
            } else {
                Ok(expm(&(sys.relaxation() * -t))? * x0)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_log_deviations(times.to_vec(), xs, sys.equilibrium())
}

/// Constant-drive closed form `x(t) = e^{−Kt}(x₀ − x_ss) + x_ss` with
/// `x_ss = K⁻¹u`. Requires invertible `K`.
pub fn affine_solution<T: Scalar>(
    sys: &LogLinearSystem<T>,
    x0: &DVector<T>,
    u: &DVector<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    check_state(sys, x0)?;
    check_grid(times)?;
    let x_ss = steady_state(sys, u)?.x;
    let offset = x0 - &x_ss;
    let xs = times
        .iter()
        .map(|&t| Ok(expm(&(sys.relaxation() * -t))? * &offset + &x_ss))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::from_log_deviations(times.to_vec(), xs, sys.equilibrium())
}

/// Integration settings for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateOptions<T> {
    /// Internal RK4 step cap. Defaults to `min(1e-3·(t_end − t₀), 1e-3)`.
    pub dt_max: Option<T>,
    /// Rerun with half the step and report the largest change in `x`.
    pub self_check: bool,
}

impl<T> Default for SimulateOptions<T> {
    fn default() -> Self {
        Self {
            dt_max: None,
            self_check: false,
        }
    }
}

impl<T> SimulateOptions<T> {
    pub fn with_dt_max(dt_max: Option<T>) -> Self {
        Self {
            dt_max,
            self_check: false,
        }
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation<T: Scalar> {
    pub trajectory: Trajectory<T>,
    /// Some eigenvalue of `K` has nonpositive real part.
    pub unstable: bool,
    /// Internal step size actually used as the cap.
    pub dt_max: T,
    /// With [`SimulateOptions::self_check`]: `max_t ‖x_h − x_{h/2}‖∞ / max(1, ‖x_h‖∞)`.
    pub step_halving_change: Option<T>,
}

/// RK4 integration of `dx/dt = −K x + u(t)` sampled on `times`.
///
/// Unstable `K` is integrated as given and flagged in the result.
pub fn simulate<T: Scalar>(
    sys: &LogLinearSystem<T>,
    x0: &DVector<T>,
    control: &ControlInput<T>,
    times: &[T],
    opts: SimulateOptions<T>,
) -> Result<Simulation<T>> {
    check_state(sys, x0)?;
    check_grid(times)?;
    sys.check_len(control.dim(), "control input")?;
    let unstable = !sys.is_stable()?;
    let span = times[times.len() - 1] - times[0];
    let dt_max = opts
        .dt_max
        .unwrap_or_else(|| (span * T::lit(1e-3)).min(T::lit(1e-3)));
    let k = sys.relaxation();
    let run = |h: T| {
        if times.len() == 1 {
            Ok(vec![x0.clone()])
        } else {
            rk4(|t, x| control.eval(t) - k * x, x0, times, h)
        }
    };
    let xs = run(dt_max)?;
    let step_halving_change = if opts.self_check {
        let fine = run(dt_max * T::lit(0.5))?;
        Some(xs.iter().zip(&fine).fold(T::zero(), |acc, (a, b)| {
            acc.max((a - b).amax() / a.amax().max(T::one()))
        }))
    } else {
        None
    };
    Ok(Simulation {
        trajectory: Trajectory::from_log_deviations(times.to_vec(), xs, sys.equilibrium())?,
        unstable,
        dt_max,
        step_halving_change,
    })
}

/// Steady state under constant drive.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState<T: Scalar> {
    /// `x_ss = K⁻¹u`.
    pub x: DVector<T>,
    /// `Q_ss = K_eq ∘ exp(x_ss)`.
    pub q: DVector<T>,
}

/// Solves `K x_ss = u`; singular `K` is reported with its condition number.
pub fn steady_state<T: Scalar>(sys: &LogLinearSystem<T>, u: &DVector<T>) -> Result<SteadyState<T>> {
    sys.check_len(u.len(), "control input")?;
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("control input"));
    }
    let x = solve(sys.relaxation(), u).map_err(|e| match e {
        Error::SingularMatrix { condition, .. } => Error::SingularMatrix {
            context: "steady state (K is singular)",
            condition,
        },
        other => other,
    })?;
    let q = sys.quotients(&x)?;
    Ok(SteadyState { x, q })
}
