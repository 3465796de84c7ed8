//! Log-linear vs mass action for `A ⇌ B` with the matched rate
//! `k = k_r(1 + K_eq)`.

use nalgebra::DVector;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{parallel_pools, params, require, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport, Series};
use crate::dynamics::{single_solution, ControlInput, LogLinearSystem};
use crate::error::Result;
use crate::massaction::MassActionAB;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    k_f: f64,
    k_eq: f64,
    q0: Vec<f64>,
    #[serde(default)]
    near_equilibrium_q0: Vec<f64>,
    #[serde(default = "default_level")]
    crossing_level: f64,
    #[serde(default = "one")]
    total: f64,
    #[serde(default)]
    dt_max: Option<f64>,
}

fn default_level() -> f64 {
    4.0
}

fn one() -> f64 {
    1.0
}

impl Params {
    fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let p: Self = params(cfg)?;
        require(!p.q0.is_empty(), "mass_action_comparison: q0 must list at least one value")?;
        require(
            p.q0.iter().chain(&p.near_equilibrium_q0).all(|q| *q > 0.0 && q.is_finite()),
            "mass_action_comparison: initial quotients must be positive",
        )?;
        require(p.total > 0.0, "mass_action_comparison: total must be positive")?;
        require(p.crossing_level > 0.0, "mass_action_comparison: crossing_level must be positive")?;
        Ok(p)
    }

    fn model(&self) -> Result<MassActionAB<f64>> {
        MassActionAB::from_equilibrium(self.k_f, self.k_eq)
    }
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p = Params::load(cfg)?;
    let k = p.model()?.matched_rate();
    let r = p.q0.len();
    Ok(Scenario {
        kind: ScenarioKind::MassActionComparison,
        system: LogLinearSystem::diagonal(&vec![k; r], &vec![p.k_eq; r])?,
        control: ControlInput::zero(r),
        x0: DVector::from_iterator(r, p.q0.iter().map(|q| (q / p.k_eq).ln())),
        times,
        channels: p.q0.iter().map(|q| format!("Q0={q}")).collect(),
        pool: Some(parallel_pools("A", "B", r, p.total)?),
        dt_max: p.dt_max,
    })
}

/// Time at which `series` first reaches `level` coming from `series[0]`,
/// linearly interpolated between samples.
pub fn crossing_time(times: &[f64], series: &[f64], level: f64) -> Option<f64> {
    let above = series[0] > level;
    let reached = |v: f64| if above { v <= level } else { v >= level };
    let i = series.iter().position(|v| reached(*v))?;
    if i == 0 {
        return Some(times[0]);
    }
    let (t0, t1, v0, v1) = (times[i - 1], times[i], series[i - 1], series[i]);
    Some(t0 + (t1 - t0) * (level - v0) / (v1 - v0))
}

fn relative_gap(a: &[f64], b: &[f64]) -> (f64, f64) {
    a.iter().zip(b).fold((0.0f64, 0.0f64), |(abs, rel), (x, y)| {
        let d = (x - y).abs();
        (abs.max(d), rel.max(d / y.abs()))
    })
}

pub(super) fn extend(cfg: &ScenarioConfig, sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let p = Params::load(cfg)?;
    let ma = p.model()?;
    let times = &sc.times;
    let k = ma.matched_rate();

    let ma_runs = p
        .q0
        .iter()
        .map(|q0| Ok(ma.simulate_quotient(*q0, times, p.dt_max)?.q_series(0)))
        .collect::<Result<Vec<_>>>()?;

    let mut per_q0 = Vec::new();
    let mut crosses_first = Value::Null;
    let top = p.q0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (i, q0) in p.q0.iter().enumerate() {
        let ll = report.trajectory.q_series(i);
        let ma_q = &ma_runs[i];
        let (max_abs, max_rel) = relative_gap(&ll, ma_q);
        let settle = |v: f64| (v - p.k_eq).abs() <= 1e-3 * p.k_eq;
        let mut entry = json!({
            "q0": q0,
            "max_abs_deviation": max_abs,
            "max_relative_deviation": max_rel,
            "final_loglinear": ll[ll.len() - 1],
            "final_mass_action": ma_q[ma_q.len() - 1],
            "both_converged": settle(ll[ll.len() - 1]) && settle(ma_q[ma_q.len() - 1]),
        });
        if *q0 > p.crossing_level && p.crossing_level > p.k_eq {
            let t_ll = crossing_time(times, &ll, p.crossing_level);
            let t_ma = crossing_time(times, ma_q, p.crossing_level);
            let first = match (t_ll, t_ma) {
                (Some(a), Some(b)) => Value::Bool(a < b),
                (Some(_), None) => Value::Bool(true),
                _ => Value::Bool(false),
            };
            entry["loglinear_crossing_time"] = json!(t_ll);
            entry["mass_action_crossing_time"] = json!(t_ma);
            entry["loglinear_crosses_first"] = first.clone();
            if *q0 == top {
                crosses_first = first;
            }
        }
        per_q0.push(entry);
    }

    let s = &mut report.summary;
    s.insert("k_f".into(), json!(p.k_f));
    s.insert("k_r".into(), json!(ma.k_r()));
    s.insert("k_eq".into(), json!(p.k_eq));
    s.insert("matched_rate".into(), json!(k));
    s.insert("crossing_level".into(), json!(p.crossing_level));
    s.insert("loglinear_crosses_first".into(), crosses_first);
    s.insert("per_q0".into(), Value::Array(per_q0));

    if cfg.wants("mass_action") {
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=p.q0.len()).map(|i| format!("Q_ma_{i}")));
        let mut series = Series::new("mass_action", cols);
        for (j, t) in times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(ma_runs.iter().map(|run| run[j]));
            series.rows.push(row);
        }
        report.series.push(series);
    }

    if !p.near_equilibrium_q0.is_empty() {
        let mut worst = 0.0f64;
        let mut cols = vec!["t".to_string()];
        for i in 1..=p.near_equilibrium_q0.len() {
            cols.push(format!("Q_ll_{i}"));
            cols.push(format!("Q_ma_{i}"));
        }
        let mut series = Series::new("near_equilibrium", cols);
        let mut columns = Vec::new();
        for q0 in &p.near_equilibrium_q0 {
            let ll = times
                .iter()
                .map(|t| single_solution(k, p.k_eq, *q0, *t))
                .collect::<Result<Vec<_>>>()?;
            let ma_q = ma.simulate_quotient(*q0, times, p.dt_max)?.q_series(0);
            worst = worst.max(relative_gap(&ll, &ma_q).1);
            columns.push(ll);
            columns.push(ma_q);
        }
        for (j, t) in times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(columns.iter().map(|c| c[j]));
            series.rows.push(row);
        }
        report
            .summary
            .insert("near_equilibrium_max_relative_deviation".into(), json!(worst));
        if cfg.wants("near_equilibrium") {
            report.series.push(series);
        }
    }
    Ok(())
}
