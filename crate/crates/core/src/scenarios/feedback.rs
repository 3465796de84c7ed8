//! Product inhibition: the feedback strength `α` raises the relaxation rate
//! from `k` to `k + α`, so `Q_ss = K_eq·exp(u/(k + α))`.

use nalgebra::DVector;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{lin_space, parallel_pools, params, require, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport, Series, Sweep};
use crate::dynamics::{ControlInput, LogLinearSystem};
use crate::error::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    k: f64,
    k_eq: f64,
    total: f64,
    u: f64,
    q0: f64,
    alpha: Vec<f64>,
    #[serde(default = "default_sweep")]
    sweep: Sweep,
    #[serde(default)]
    dt_max: Option<f64>,
}

fn default_sweep() -> Sweep {
    Sweep {
        min: -3.0,
        max: 3.0,
        points: 61,
    }
}

impl Params {
    fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let p: Self = params(cfg)?;
        require(!p.alpha.is_empty(), "feedback: alpha must list at least one value")?;
        require(
            p.alpha.iter().all(|a| a.is_finite() && p.k + a > 0.0),
            "feedback: k + alpha must be positive for every alpha",
        )?;
        require(p.total > 0.0 && p.total.is_finite(), "feedback: total must be positive")?;
        require(p.q0 > 0.0 && p.q0.is_finite(), "feedback: q0 must be positive")?;
        require(p.u.is_finite(), "feedback: u must be finite")?;
        p.sweep.check("feedback")?;
        Ok(p)
    }
}

/// `K_eq·exp(u/(k + α))`.
pub fn feedback_steady_state(k: f64, alpha: f64, k_eq: f64, u: f64) -> f64 {
    k_eq * (u / (k + alpha)).exp()
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p = Params::load(cfg)?;
    let r = p.alpha.len();
    let rates: Vec<f64> = p.alpha.iter().map(|a| p.k + a).collect();
    Ok(Scenario {
        kind: ScenarioKind::Feedback,
        system: LogLinearSystem::diagonal(&rates, &vec![p.k_eq; r])?,
        control: ControlInput::constant(DVector::from_element(r, p.u))?,
        x0: DVector::from_element(r, (p.q0 / p.k_eq).ln()),
        times,
        channels: p.alpha.iter().map(|a| format!("alpha={a}")).collect(),
        pool: Some(parallel_pools("A", "B", r, p.total)?),
        dt_max: p.dt_max,
    })
}

pub(super) fn extend(cfg: &ScenarioConfig, _sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let p = Params::load(cfg)?;
    let bound = |q: f64| p.total * q / (1.0 + q);
    let per_alpha: Vec<Value> = p
        .alpha
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let q_ss = feedback_steady_state(p.k, *a, p.k_eq, p.u);
            json!({
                "alpha": a,
                "effective_rate": p.k + a,
                "Q_ss": q_ss,
                "B_ss": bound(q_ss),
                "dQss_du": q_ss / (p.k + a),
                "final_B": bound(report.trajectory.last_q()[i]),
            })
        })
        .collect();
    let s = &mut report.summary;
    s.insert("u".into(), json!(p.u));
    s.insert("total".into(), json!(p.total));
    s.insert("per_alpha".into(), Value::Array(per_alpha));

    if cfg.wants("steady_state_curve") {
        let mut cols = vec!["u".to_string()];
        cols.extend((1..=p.alpha.len()).map(|i| format!("Q_ss_{i}")));
        let mut series = Series::new("steady_state_curve", cols);
        for u in lin_space(p.sweep.min, p.sweep.max, p.sweep.points) {
            let mut row = vec![u];
            row.extend(p.alpha.iter().map(|a| feedback_steady_state(p.k, *a, p.k_eq, u)));
            series.rows.push(row);
        }
        report.series.push(series);
    }
    Ok(())
}
