//! Config-driven presets for the worked examples.
//!
//! A [`ScenarioConfig`] is the JSON document
//! `{scenario, parameters, time: {t_end, samples}, outputs}`. Every preset
//! ships embedded (see [`ScenarioConfig::preset`]) and can be overridden key
//! by key. [`ScenarioConfig::resolve`] turns a config into a concrete
//! [`Scenario`] (system, drive, initial state, grid) and
//! [`ScenarioConfig::run`] produces the full [`ScenarioReport`].
//!
//! Scenarios with several initial conditions or parameter values are laid
//! out as block-diagonal systems with one independent channel per value, so
//! a single trajectory carries all of them.

mod comparison;
mod custom;
mod feedback;
mod glycolysis;
mod hexokinase;
mod transport;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dynamics::{simulate, uniform_grid, ControlInput, LogLinearSystem, SimulateOptions, Trajectory};
use crate::error::{Error, Result};
use crate::network::{Network, ReactionSpec};
use crate::reconstruct::{reconstruct_concentrations, ReconstructOptions, ReconstructionProblem};

pub use comparison::crossing_time;
pub use feedback::feedback_steady_state;
pub use glycolysis::{driven_amplitude, glycolysis_network, measured_amplitude};
pub use hexokinase::trapping_efficiency;
pub use transport::{detect_overshoot, is_monotone, scan_overshoot_x0, transport_network, Overshoot, SCAN_CANDIDATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    MassActionComparison,
    Feedback,
    Hexokinase,
    CoupledTransport,
    Glycolysis,
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::MassActionComparison,
        ScenarioKind::Feedback,
        ScenarioKind::Hexokinase,
        ScenarioKind::CoupledTransport,
        ScenarioKind::Glycolysis,
        ScenarioKind::Custom,
    ];

    /// The five worked examples, without `custom`.
    pub const PRESETS: [ScenarioKind; 5] = [
        ScenarioKind::MassActionComparison,
        ScenarioKind::Feedback,
        ScenarioKind::Hexokinase,
        ScenarioKind::CoupledTransport,
        ScenarioKind::Glycolysis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::MassActionComparison => "mass_action_comparison",
            Self::Feedback => "feedback",
            Self::Hexokinase => "hexokinase",
            Self::CoupledTransport => "coupled_transport",
            Self::Glycolysis => "glycolysis",
            Self::Custom => "custom",
        }
    }

    /// Optional series this scenario can emit besides `trajectory`.
    pub fn available_outputs(self) -> &'static [&'static str] {
        match self {
            Self::MassActionComparison => &["mass_action", "near_equilibrium", "concentrations"],
            Self::Feedback => &["steady_state_curve", "concentrations"],
            Self::Hexokinase => &["efficiency_curve", "concentrations"],
            Self::CoupledTransport => &["modes", "concentrations"],
            Self::Glycolysis => &["phase", "concentrations"],
            Self::Custom => &["concentrations"],
        }
    }

    fn preset_json(self) -> &'static str {
        match self {
            Self::MassActionComparison => include_str!("../../presets/mass_action_comparison.json"),
            Self::Feedback => include_str!("../../presets/feedback.json"),
            Self::Hexokinase => include_str!("../../presets/hexokinase.json"),
            Self::CoupledTransport => include_str!("../../presets/coupled_transport.json"),
            Self::Glycolysis => include_str!("../../presets/glycolysis.json"),
            Self::Custom => include_str!("../../presets/custom.json"),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_").to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!("unknown scenario `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    pub samples: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            samples: 500,
        }
    }
}

impl TimeSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(Error::Config(format!(
                "time.t_end must be finite and nonnegative, got {}",
                self.t_end
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("time.samples must be at least 1".into()));
        }
        uniform_grid(0.0, self.t_end, self.samples)
    }
}

/// Scenario JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    /// Optional series to emit; empty means all of them.
    #[serde(default)]
    pub outputs: Vec<String>,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

impl ScenarioConfig {
    /// Embedded default config for `kind`.
    pub fn preset(kind: ScenarioKind) -> Self {
        Self::from_json_str(kind.preset_json()).expect("embedded preset parses")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("scenario config: {e}")))?;
        if !cfg.parameters.is_object() {
            return Err(Error::Config("`parameters` must be a JSON object".into()));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn time_spec(&self) -> TimeSpec {
        self.time.unwrap_or_default()
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.time_spec().grid()
    }

    pub fn with_time(mut self, t_end: Option<f64>, samples: Option<usize>) -> Self {
        let mut spec = self.time_spec();
        if let Some(t) = t_end {
            spec.t_end = t;
        }
        if let Some(n) = samples {
            spec.samples = n;
        }
        self.time = Some(spec);
        self
    }

    /// Overrides `parameters.<key>`; dotted keys address nested objects.
    pub fn set_parameter(&mut self, key: &str, value: Value) -> Result<()> {
        let mut slot = &mut self.parameters;
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(Error::Config(format!("malformed parameter key `{key}`")));
        }
        for part in &parts[..parts.len() - 1] {
            let obj = slot
                .as_object_mut()
                .ok_or_else(|| Error::Config(format!("`{key}`: `{part}` is not inside an object")))?;
            slot = obj.entry(part.to_string()).or_insert_with(empty_object);
        }
        let obj = slot
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{key}` does not address an object field")))?;
        obj.insert(parts[parts.len() - 1].to_string(), value);
        Ok(())
    }

    pub fn with_parameter(mut self, key: &str, value: Value) -> Result<Self> {
        self.set_parameter(key, value)?;
        Ok(self)
    }

    /// Multiplies every conserved total (`total`, `totals`) by `factor`.
    pub fn scale_totals(&mut self, factor: f64) {
        let Some(obj) = self.parameters.as_object_mut() else {
            return;
        };
        for (key, value) in obj.iter_mut() {
            if key != "total" && key != "totals" {
                continue;
            }
            match value {
                Value::Number(n) => {
                    if let Some(v) = n.as_f64() {
                        *value = Value::from(v * factor);
                    }
                }
                Value::Array(items) => {
                    for item in items.iter_mut() {
                        if let Some(v) = item.as_f64() {
                            *item = Value::from(v * factor);
                        }
                    }
                }
                _ => {}
            }
        }
    }

    fn check_outputs(&self) -> Result<()> {
        let allowed = self.scenario.available_outputs();
        for name in &self.outputs {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "output `{name}` is not defined for {} (available: {})",
                    self.scenario,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// Whether the named optional series was requested.
    pub fn wants(&self, output: &str) -> bool {
        self.outputs.is_empty() || self.outputs.iter().any(|o| o == output)
    }

    /// Concrete system, drive, initial state and grid.
    pub fn resolve(&self) -> Result<Scenario> {
        self.check_outputs()?;
        let times = self.times()?;
        match self.scenario {
            ScenarioKind::MassActionComparison => comparison::resolve(self, times),
            ScenarioKind::Feedback => feedback::resolve(self, times),
            ScenarioKind::Hexokinase => hexokinase::resolve(self, times),
            ScenarioKind::CoupledTransport => transport::resolve(self, times),
            ScenarioKind::Glycolysis => glycolysis::resolve(self, times),
            ScenarioKind::Custom => custom::resolve(self, times),
        }
    }

    pub fn run(&self) -> Result<ScenarioReport> {
        let scenario = self.resolve()?;
        let sim = scenario.simulate()?;
        let mut report = ScenarioReport::new(self.clone(), &scenario, sim.trajectory);
        report.summary.insert("unstable".into(), Value::Bool(sim.unstable));
        match self.scenario {
            ScenarioKind::MassActionComparison => comparison::extend(self, &scenario, &mut report)?,
            ScenarioKind::Feedback => feedback::extend(self, &scenario, &mut report)?,
            ScenarioKind::Hexokinase => hexokinase::extend(self, &scenario, &mut report)?,
            ScenarioKind::CoupledTransport => transport::extend(self, &scenario, &mut report)?,
            ScenarioKind::Glycolysis => glycolysis::extend(self, &scenario, &mut report)?,
            ScenarioKind::Custom => custom::extend(self, &scenario, &mut report)?,
        }
        if self.wants("concentrations") {
            if let Some(pool) = &scenario.pool {
                let series = concentration_series(pool, &report.trajectory)?;
                report.summary.insert(
                    "max_reconstructed_quotient_error".into(),
                    Value::from(series.1),
                );
                report.series.push(series.0);
            }
        }
        Ok(report)
    }
}

/// A network together with the conserved totals used for reconstruction.
#[derive(Debug, Clone)]
pub struct Pool {
    pub network: Network<f64>,
    pub totals: DVector<f64>,
}

/// Resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub system: LogLinearSystem<f64>,
    pub control: ControlInput<f64>,
    pub x0: DVector<f64>,
    pub times: Vec<f64>,
    /// Label per channel, used in column names.
    pub channels: Vec<String>,
    pub pool: Option<Pool>,
    pub dt_max: Option<f64>,
}

impl Scenario {
    pub fn simulate(&self) -> Result<crate::dynamics::Simulation<f64>> {
        simulate(
            &self.system,
            &self.x0,
            &self.control,
            &self.times,
            SimulateOptions::with_dt_max(self.dt_max),
        )
    }
}

/// Tabular output: a header and rows of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Header `t, x_1..x_r, Q_1..Q_r` with one row per sample.
pub fn trajectory_series(traj: &Trajectory<f64>) -> Series {
    let r = traj.dim();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=r).map(|i| format!("x_{i}")));
    columns.extend((1..=r).map(|i| format!("Q_{i}")));
    let mut s = Series::new("trajectory", columns);
    for ((t, x), q) in traj.times().iter().zip(traj.log_deviations()).zip(traj.quotients()) {
        let mut row = Vec::with_capacity(2 * r + 1);
        row.push(*t);
        row.extend(x.iter());
        row.extend(q.iter());
        s.rows.push(row);
    }
    s
}

/// Everything produced by a scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub config: ScenarioConfig,
    pub trajectory: Trajectory<f64>,
    /// `trajectory` first, then the requested optional series.
    pub series: Vec<Series>,
    pub summary: BTreeMap<String, Value>,
}

impl ScenarioReport {
    fn new(config: ScenarioConfig, scenario: &Scenario, trajectory: Trajectory<f64>) -> Self {
        let mut summary = BTreeMap::new();
        summary.insert("scenario".into(), Value::from(config.scenario.name()));
        summary.insert("channels".into(), Value::from(scenario.channels.clone()));
        summary.insert("final_x".into(), Value::from(trajectory.last_x().as_slice().to_vec()));
        summary.insert("final_Q".into(), Value::from(trajectory.last_q().as_slice().to_vec()));
        Self {
            series: vec![trajectory_series(&trajectory)],
            config,
            trajectory,
            summary,
        }
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn summary_json(&self) -> Value {
        Value::Object(self.summary.clone().into_iter().collect())
    }
}

/// Reconstructed concentrations at every sample, plus the quotients
/// recomputed from them. Returns the series and the largest relative gap
/// between recomputed and simulated quotients.
fn concentration_series(pool: &Pool, traj: &Trajectory<f64>) -> Result<(Series, f64)> {
    let net = &pool.network;
    let mut columns = vec!["t".to_string()];
    columns.extend(net.species().iter().map(|s| format!("c_{s}")));
    columns.extend((1..=net.n_reactions()).map(|i| format!("Qrec_{i}")));
    let mut series = Series::new("concentrations", columns);
    let opts = ReconstructOptions::default();
    let mut worst = 0.0f64;
    for (t, q) in traj.times().iter().zip(traj.quotients()) {
        let x_star = q.map(f64::ln);
        let problem = ReconstructionProblem::new(net, x_star, pool.totals.clone())?;
        let res = reconstruct_concentrations(&problem, &opts)?;
        let q_rec = net.quotients(&res.c_star)?;
        for (a, b) in q_rec.iter().zip(q.iter()) {
            worst = worst.max((a - b).abs() / b.abs());
        }
        let mut row = vec![*t];
        row.extend(res.c_star.iter());
        row.extend(q_rec.iter());
        series.rows.push(row);
    }
    Ok((series, worst))
}

pub(crate) fn params<P: DeserializeOwned>(cfg: &ScenarioConfig) -> Result<P> {
    serde_json::from_value(cfg.parameters.clone())
        .map_err(|e| Error::Config(format!("{} parameters: {e}", cfg.scenario)))
}

pub(crate) fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

/// `r` independent copies of `reactant ⇌ product`, each with its own pool.
pub(crate) fn parallel_pools(reactant: &str, product: &str, r: usize, total: f64) -> Result<Pool> {
    let name = |base: &str, i: usize| {
        if r == 1 {
            base.to_string()
        } else {
            format!("{base}{}", i + 1)
        }
    };
    let mut species = Vec::with_capacity(2 * r);
    let mut reactions = Vec::with_capacity(r);
    for i in 0..r {
        let (a, b) = (name(reactant, i), name(product, i));
        reactions.push(ReactionSpec::new(
            format!("{a}<->{b}"),
            &[(a.as_str(), -1.0), (b.as_str(), 1.0)],
        ));
        species.push(a);
        species.push(b);
    }
    Ok(Pool {
        network: Network::new(species, reactions)?,
        totals: DVector::from_element(r, total),
    })
}

/// `n` log-spaced points on `[min, max]` (both positive).
pub(crate) fn log_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub(crate) fn lin_space(min: f64, max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![min];
    }
    (0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct Sweep {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Sweep {
    fn check(&self, what: &str) -> Result<()> {
        require(
            self.min.is_finite() && self.max.is_finite() && self.max >= self.min && self.points >= 1,
            format!("{what} sweep needs finite min <= max and at least one point"),
        )
    }
}
