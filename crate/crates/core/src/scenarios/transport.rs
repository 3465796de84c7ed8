//! Two transporters sharing the membrane potential through a symmetric
//! coupling matrix. The faster channel can overshoot its steady state.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};

use super::{params, require, Pool, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport, Series};
use crate::dynamics::{eigenmodes, simulate, ControlInput, LogLinearSystem, SimulateOptions};
use crate::error::Result;
use crate::network::{Network, ReactionSpec};

/// Per-component values tried, in order, when scanning for an initial
/// condition with an overshoot in `x₂` and monotone `x₁`.
pub const SCAN_CANDIDATES: [f64; 8] = [0.5, 1.0, 1.5, 2.0, -0.5, -1.0, -1.5, -2.0];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    k: Vec<Vec<f64>>,
    #[serde(default = "unit_pair")]
    k_eq: Vec<f64>,
    x0: Vec<f64>,
    #[serde(default = "unit_pair")]
    totals: Vec<f64>,
    #[serde(default)]
    dt_max: Option<f64>,
}

fn unit_pair() -> Vec<f64> {
    vec![1.0, 1.0]
}

impl Params {
    fn load(cfg: &ScenarioConfig) -> Result<Self> {
        let p: Self = params(cfg)?;
        require(
            p.k.len() == 2 && p.k.iter().all(|row| row.len() == 2),
            "coupled_transport: k must be a 2x2 matrix",
        )?;
        require(p.k_eq.len() == 2, "coupled_transport: k_eq needs two entries")?;
        require(p.x0.len() == 2, "coupled_transport: x0 needs two entries")?;
        require(
            p.totals.len() == 2 && p.totals.iter().all(|t| *t > 0.0 && t.is_finite()),
            "coupled_transport: totals needs two positive entries",
        )?;
        Ok(p)
    }

    fn system(&self) -> Result<LogLinearSystem<f64>> {
        let k = DMatrix::from_fn(2, 2, |i, j| self.k[i][j]);
        LogLinearSystem::new(k, DVector::from_column_slice(&self.k_eq))
    }
}

/// `Na⁺_out → Na⁺_in` and `H⁺_in → H⁺_out`, so that
/// `Q₁ = [Na_in]/[Na_out]` and `Q₂ = [H_out]/[H_in]`.
pub fn transport_network() -> Network<f64> {
    let species = ["Na_out", "Na_in", "H_in", "H_out"].map(String::from).to_vec();
    Network::new(
        species,
        vec![
            ReactionSpec::new("Na_transport", &[("Na_out", -1.0), ("Na_in", 1.0)]),
            ReactionSpec::new("H_pump", &[("H_in", -1.0), ("H_out", 1.0)]),
        ],
    )
    .expect("transport network is valid")
}

/// Overshoot analysis of one component relaxing toward zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overshoot {
    /// The samples change sign and then decay back toward zero.
    pub detected: bool,
    /// Interpolated time of the last sign change.
    pub crossing_time: Option<f64>,
    /// Largest `|x|` after the last sign change.
    pub peak: f64,
}

/// Sign change in `x` followed by decay: after the last crossing, `|x|`
/// reaches a peak and ends strictly below it.
pub fn detect_overshoot(times: &[f64], x: &[f64]) -> Overshoot {
    let mut last_cross = None;
    let mut prev: Option<(usize, f64)> = None;
    for (i, v) in x.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        if let Some((j, pv)) = prev {
            if pv.signum() != v.signum() {
                last_cross = Some((j, i));
            }
        }
        prev = Some((i, *v));
    }
    let Some((j, i)) = last_cross else {
        return Overshoot {
            detected: false,
            crossing_time: None,
            peak: 0.0,
        };
    };
    let t = times[j] + (times[i] - times[j]) * x[j] / (x[j] - x[i]);
    let tail = &x[i..];
    let (p, peak) = tail
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (k, v)| if v.abs() > bv { (k, v.abs()) } else { (bi, bv) });
    let end = tail[tail.len() - 1].abs();
    Overshoot {
        detected: p + 1 < tail.len() && end < peak,
        crossing_time: Some(t),
        peak,
    }
}

/// Non-increasing or non-decreasing over all samples.
pub fn is_monotone(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[1] <= w[0]) || x.windows(2).all(|w| w[1] >= w[0])
}

/// First `x₀` over [`SCAN_CANDIDATES`]² (lexicographic in `(x₁, x₂)`) whose
/// trajectory overshoots in `x₂` while `x₁` stays monotone.
pub fn scan_overshoot_x0(
    sys: &LogLinearSystem<f64>,
    times: &[f64],
    dt_max: Option<f64>,
) -> Result<Option<DVector<f64>>> {
    let control = ControlInput::zero(2);
    for a in SCAN_CANDIDATES {
        for b in SCAN_CANDIDATES {
            let x0 = DVector::from_vec(vec![a, b]);
            let traj = simulate(sys, &x0, &control, times, SimulateOptions::with_dt_max(dt_max))?.trajectory;
            if detect_overshoot(times, &traj.x_series(1)).detected && is_monotone(&traj.x_series(0)) {
                return Ok(Some(x0));
            }
        }
    }
    Ok(None)
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p = Params::load(cfg)?;
    Ok(Scenario {
        kind: ScenarioKind::CoupledTransport,
        system: p.system()?,
        control: ControlInput::zero(2),
        x0: DVector::from_column_slice(&p.x0),
        times,
        channels: vec!["Na_transport".into(), "H_pump".into()],
        pool: Some(Pool {
            network: transport_network(),
            totals: DVector::from_column_slice(&p.totals),
        }),
        dt_max: p.dt_max,
    })
}

pub(super) fn extend(cfg: &ScenarioConfig, sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let modes = eigenmodes(&sc.system)?;
    let traj = &report.trajectory;
    let over = detect_overshoot(traj.times(), &traj.x_series(1));
    let vectors: Vec<Vec<f64>> = (0..modes.dim())
        .map(|j| modes.vectors.column(j).iter().map(|c| c.re).collect())
        .collect();
    let s = &mut report.summary;
    s.insert("eigenvalues".into(), json!(modes.real_parts()));
    s.insert("eigenvalues_imag".into(), json!(modes.values.iter().map(|v| v.im).collect::<Vec<_>>()));
    s.insert("eigenvectors".into(), json!(vectors));
    s.insert("x0".into(), json!(sc.x0.as_slice()));
    s.insert("overshoot".into(), Value::Bool(over.detected));
    s.insert("x2_crossing_time".into(), json!(over.crossing_time));
    s.insert("x2_peak_after_crossing".into(), json!(over.peak));
    s.insert("q1_monotone".into(), Value::Bool(is_monotone(&traj.x_series(0))));

    if cfg.wants("modes") {
        let cols = (0..=modes.dim())
            .map(|j| if j == 0 { "t".to_string() } else { format!("z_{j}") })
            .collect();
        let mut series = Series::new("modes", cols);
        for (t, x) in traj.times().iter().zip(traj.log_deviations()) {
            let z = modes.coordinates(x)?;
            let mut row = vec![*t];
            row.extend(z.iter().map(|c| c.re));
            series.rows.push(row);
        }
        report.series.push(series);
    }
    Ok(())
}
