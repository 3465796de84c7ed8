//! Damped and driven oscillations from a rotational coupling matrix.
//!
//! Under `u(t) = [u₀ sin(ωt), 0]ᵀ` the periodic response of `x₁` has
//! amplitude `u₀·|((K + iωI)⁻¹)₁₁|`.

use nalgebra::{Complex, DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};

use super::{params, require, Pool, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport, Series};
use crate::dynamics::{oscillation_parameters, simulate, ControlInput, LogLinearSystem, SimulateOptions};
use crate::error::{Error, Result};
use crate::network::{Network, ReactionSpec};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    k: Vec<Vec<f64>>,
    #[serde(default = "unit_pair")]
    k_eq: Vec<f64>,
    x0: Vec<f64>,
    u0: f64,
    /// Drive frequency; defaults to the natural frequency of `K`.
    #[serde(default)]
    omega: Option<f64>,
    #[serde(default = "yes")]
    driven: bool,
    #[serde(default = "one")]
    total: f64,
    #[serde(default)]
    dt_max: Option<f64>,
}

fn unit_pair() -> Vec<f64> {
    vec![1.0, 1.0]
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

impl Params {
    fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let p: Self = params(cfg)?;
        require(
            p.k.len() == 2 && p.k.iter().all(|row| row.len() == 2),
            "glycolysis: k must be a 2x2 matrix",
        )?;
        require(p.k_eq.len() == 2, "glycolysis: k_eq needs two entries")?;
        require(p.x0.len() == 2, "glycolysis: x0 needs two entries")?;
        require(p.u0 >= 0.0 && p.u0.is_finite(), "glycolysis: u0 must be nonnegative")?;
        require(p.total > 0.0 && p.total.is_finite(), "glycolysis: total must be positive")?;
        if let Some(w) = p.omega {
            require(w > 0.0 && w.is_finite(), "glycolysis: omega must be positive")?;
        }
        Ok(p)
    }

    fn system(&self) -> Result<LogLinearSystem<f64>> {
        let k = DMatrix::from_fn(2, 2, |i, j| self.k[i][j]);
        LogLinearSystem::new(k, DVector::from_column_slice(&self.k_eq))
    }

    fn omega(&self, sys: &LogLinearSystem<f64>) -> Result<f64> {
        if let Some(w) = self.omega {
            return Ok(w);
        }
        oscillation_parameters(sys)?
            .first()
            .map(|o| o.frequency)
            .ok_or_else(|| Error::Config("glycolysis: K has a real spectrum, so omega must be given".into()))
    }
}

/// `F6P ⇌ FBP` (phosphofructokinase) and `FBP ⇌ Products`.
pub fn glycolysis_network() -> Network<f64> {
    let species = ["F6P", "FBP", "Products"].map(String::from).to_vec();
    Network::new(
        species,
        vec![
            ReactionSpec::new("PFK", &[("F6P", -1.0), ("FBP", 1.0)]),
            ReactionSpec::new("downstream", &[("FBP", -1.0), ("Products", 1.0)]),
        ],
    )
    .expect("glycolysis network is valid")
}

/// Periodic-response amplitude of `x₁` under `u₀ sin(ωt)` on the first
/// component: `u₀·|((K + iωI)⁻¹)₁₁|`.
pub fn driven_amplitude(k: &DMatrix<f64>, omega: f64, u0: f64) -> Result<f64> {
    let n = k.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex::new(k[(i, j)], if i == j { omega } else { 0.0 })
    });
    let mut e1 = DVector::from_element(n, Complex::new(0.0, 0.0));
    e1[0] = Complex::new(1.0, 0.0);
    let z = a.lu().solve(&e1).ok_or(Error::SingularMatrix {
        context: "driven response (K + iωI)",
        condition: f64::INFINITY,
    })?;
    Ok(u0 * z[0].re.hypot(z[0].im))
}

/// Half the peak-to-peak range of `x` over the final `period` of samples.
/// `None` when the record is shorter than one period.
pub fn measured_amplitude(times: &[f64], x: &[f64], period: f64) -> Option<f64> {
    let t_end = *times.last()?;
    if t_end - times[0] < period {
        return None;
    }
    let (lo, hi) = times
        .iter()
        .zip(x)
        .filter(|(t, _)| **t >= t_end - period)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, v)| (lo.min(*v), hi.max(*v)));
    Some(0.5 * (hi - lo))
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p = Params::load(cfg)?;
    let system = p.system()?;
    let control = if p.driven {
        ControlInput::sinusoidal(
            DVector::from_vec(vec![p.u0, 0.0]),
            p.omega(&system)?,
            DVector::zeros(2),
        )?
    } else {
        ControlInput::zero(2)
    };
    Ok(Scenario {
        kind: ScenarioKind::Glycolysis,
        system,
        control,
        x0: DVector::from_column_slice(&p.x0),
        times,
        channels: vec!["PFK".into(), "downstream".into()],
        pool: Some(Pool {
            network: glycolysis_network(),
            totals: DVector::from_element(1, p.total),
        }),
        dt_max: p.dt_max,
    })
}

pub(super) fn extend(cfg: &ScenarioConfig, sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let p = Params::load(cfg)?;
    let osc = oscillation_parameters(&sc.system)?;
    let omega = p.omega(&sc.system)?;
    let drive_period = std::f64::consts::TAU / omega;
    let damped = if p.driven {
        simulate(
            &sc.system,
            &sc.x0,
            &ControlInput::zero(2),
            &sc.times,
            SimulateOptions::with_dt_max(sc.dt_max),
        )?
        .trajectory
    } else {
        report.trajectory.clone()
    };

    let s = &mut report.summary;
    if let Some(o) = osc.first() {
        s.insert("eigenvalues".into(), json!([[o.damping, -o.frequency], [o.damping, o.frequency]]));
        s.insert("damping".into(), json!(o.damping));
        s.insert("frequency".into(), json!(o.frequency));
        s.insert("period".into(), json!(o.period));
    }
    s.insert("u0".into(), json!(p.u0));
    s.insert("driven".into(), json!(p.driven));
    s.insert("omega_drive".into(), json!(omega));
    s.insert("final_norm_damped".into(), json!(damped.last_x().norm()));
    if p.driven {
        let predicted = driven_amplitude(sc.system.relaxation(), omega, p.u0)?;
        let measured =
            measured_amplitude(report.trajectory.times(), &report.trajectory.x_series(0), drive_period);
        s.insert("amplitude_predicted".into(), json!(predicted));
        s.insert("amplitude_measured".into(), json!(measured));
    } else {
        s.insert("amplitude_predicted".into(), Value::Null);
        s.insert("amplitude_measured".into(), Value::Null);
    }

    if cfg.wants("phase") {
        let mut cols = vec!["t", "x1_damped", "x2_damped"];
        if p.driven {
            cols.extend(["x1_driven", "x2_driven"]);
        }
        let mut series = Series::new("phase", cols.into_iter().map(String::from).collect());
        for (j, t) in sc.times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(damped.log_deviations()[j].iter());
            if p.driven {
                row.extend(report.trajectory.log_deviations()[j].iter());
            }
            series.rows.push(row);
        }
        report.series.push(series);
    }
    Ok(())
}
