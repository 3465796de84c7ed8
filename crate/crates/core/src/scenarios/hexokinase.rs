//! ATP-driven phosphorylation, `Q = [G6P]/[Glc]`, with drive
//! `u = k_ATP·ln([ATP]/[ADP])` and trapping efficiency `Q/(1 + Q)`.

use nalgebra::DVector;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{log_space, parallel_pools, params, require, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport, Series, Sweep};
use crate::dynamics::{steady_state, ControlInput, LogLinearSystem};
use crate::error::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    ratio: f64,
    #[serde(default)]
    compare_ratios: Vec<f64>,
    #[serde(default = "one")]
    k: f64,
    k_atp: f64,
    k_eq: f64,
    #[serde(default = "one")]
    q0: f64,
    #[serde(default = "one")]
    total: f64,
    #[serde(default = "default_sweep")]
    sweep: Sweep,
    #[serde(default)]
    dt_max: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_sweep() -> Sweep {
    Sweep {
        min: 0.01,
        max: 100.0,
        points: 81,
    }
}

impl Params {
    fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let p: Self = params(cfg)?;
        require(
            p.ratio > 0.0 && p.ratio.is_finite() && p.compare_ratios.iter().all(|r| *r > 0.0 && r.is_finite()),
            "hexokinase: ATP/ADP ratios must be positive",
        )?;
        require(p.k > 0.0, "hexokinase: k must be positive")?;
        require(p.k_atp.is_finite(), "hexokinase: k_atp must be finite")?;
        require(p.q0 > 0.0 && p.q0.is_finite(), "hexokinase: q0 must be positive")?;
        require(p.total > 0.0, "hexokinase: total must be positive")?;
        p.sweep.check("hexokinase")?;
        require(p.sweep.min > 0.0, "hexokinase: ratio sweep must stay positive")?;
        Ok(p)
    }

    /// `ratio` first, then the comparison ratios not equal to it.
    fn ratios(&self) -> Vec<f64> {
        let mut out = vec![self.ratio];
        for r in &self.compare_ratios {
            if !out.contains(r) {
                out.push(*r);
            }
        }
        out
    }

    fn drive(&self, ratio: f64) -> f64 {
        self.k_atp * ratio.ln()
    }

    fn q_ss(&self, ratio: f64) -> Result<f64> {
        let sys = LogLinearSystem::scalar(self.k, self.k_eq)?;
        Ok(steady_state(&sys, &DVector::from_element(1, self.drive(ratio)))?.q[0])
    }
}

/// Fraction of the pool held as product, `Q/(1 + Q)`.
pub fn trapping_efficiency(q: f64) -> f64 {
    q / (1.0 + q)
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p = Params::load(cfg)?;
    let ratios = p.ratios();
    let r = ratios.len();
    Ok(Scenario {
        kind: ScenarioKind::Hexokinase,
        system: LogLinearSystem::diagonal(&vec![p.k; r], &vec![p.k_eq; r])?,
        control: ControlInput::constant(DVector::from_iterator(r, ratios.iter().map(|x| p.drive(*x))))?,
        x0: DVector::from_element(r, (p.q0 / p.k_eq).ln()),
        times,
        channels: ratios.iter().map(|x| format!("ratio={x}")).collect(),
        pool: Some(parallel_pools("Glc", "G6P", r, p.total)?),
        dt_max: p.dt_max,
    })
}

pub(super) fn extend(cfg: &ScenarioConfig, _sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let p = Params::load(cfg)?;
    let q_ss = p.q_ss(p.ratio)?;
    let per_ratio = p
        .ratios()
        .iter()
        .map(|x| {
            let q = p.q_ss(*x)?;
            let direction = match p.drive(*x) {
                u if u > 0.0 => "forward",
                u if u < 0.0 => "backward",
                _ => "none",
            };
            Ok(json!({
                "ratio": x,
                "drive": p.drive(*x),
                "Q_ss": q,
                "efficiency": trapping_efficiency(q),
                "drive_direction": direction,
            }))
        })
        .collect::<Result<Vec<Value>>>()?;
    let s = &mut report.summary;
    s.insert("ratio".into(), json!(p.ratio));
    s.insert("k".into(), json!(p.k));
    s.insert("k_atp".into(), json!(p.k_atp));
    s.insert("k_eq".into(), json!(p.k_eq));
    s.insert("drive".into(), json!(p.drive(p.ratio)));
    s.insert("Q_ss".into(), json!(q_ss));
    s.insert("efficiency".into(), json!(trapping_efficiency(q_ss)));
    s.insert("per_ratio".into(), Value::Array(per_ratio));

    if cfg.wants("efficiency_curve") {
        let cols = ["ratio", "Q_ss", "efficiency"].map(String::from).to_vec();
        let mut series = Series::new("efficiency_curve", cols);
        for x in log_space(p.sweep.min, p.sweep.max, p.sweep.points) {
            let q = p.q_ss(x)?;
            series.rows.push(vec![x, q, trapping_efficiency(q)]);
        }
        report.series.push(series);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn run(ratio: f64) -> ScenarioReport {
        ScenarioConfig::preset(ScenarioKind::Hexokinase)
            .with_parameter("ratio", json!(ratio))
            .unwrap()
            .with_time(Some(1.0), Some(5))
            .run()
            .unwrap()
    }

    #[test]
    fn unit_ratio_is_zero_drive() {
        let r = run(1.0);
        assert_eq!(r.summary["Q_ss"], json!(0.5));
        let eff = r.summary["efficiency"].as_f64().unwrap();
        assert!((eff - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn starvation_runs_backward() {
        let r = run(0.1);
        let q = r.summary["Q_ss"].as_f64().unwrap();
        assert!((q - 0.005).abs() < 1e-15, "{q}");
        assert_eq!(r.summary["per_ratio"][0]["drive_direction"], json!("backward"));
    }

    #[test]
    fn channels_deduplicate_ratio() {
        let r = run(10.0);
        assert_eq!(r.trajectory.dim(), 3);
        let r = run(3.0);
        assert_eq!(r.trajectory.dim(), 4);
    }

    #[test]
    fn efficiency_curve_is_monotone_in_unit_interval() {
        let r = run(10.0);
        let eff = r.series("efficiency_curve").unwrap().column("efficiency").unwrap();
        assert!(eff.windows(2).all(|w| w[1] > w[0]));
        assert!(eff.iter().all(|e| *e > 0.0 && *e < 1.0));
    }

    #[test]
    fn nonpositive_ratio_rejected() {
        for bad in [0.0, -2.0] {
            let cfg = ScenarioConfig::preset(ScenarioKind::Hexokinase)
                .with_parameter("ratio", json!(bad))
                .unwrap();
            assert!(matches!(cfg.resolve(), Err(Error::Config(_))));
        }
    }
}
