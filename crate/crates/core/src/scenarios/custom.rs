//! User-specified system: any `K`, `K_eq`, initial state and drive, with an
//! optional network for concentration output.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Value};

use super::{params, require, Pool, Scenario, ScenarioConfig, ScenarioKind, ScenarioReport};
use crate::dynamics::{eigenmodes, oscillation_parameters, steady_state, ControlInput, LogLinearSystem, Segment, GAS_CONSTANT};
use crate::error::{Error, Result};
use crate::network::NetworkFile;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum VectorSpec {
    Scalar(f64),
    Values(Vec<f64>),
}

impl VectorSpec {
    fn len(&self) -> Option<usize> {
        match self {
            Self::Scalar(_) => None,
            Self::Values(v) => Some(v.len()),
        }
    }

    fn build(&self, dim: usize, what: &str) -> Result<DVector<f64>> {
        match self {
            Self::Scalar(v) => Ok(DVector::from_element(dim, *v)),
            Self::Values(v) if v.len() == dim => Ok(DVector::from_column_slice(v)),
            Self::Values(v) => Err(Error::Config(format!(
                "custom: {what} has {} entries, expected {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ControlSpec {
    Zero,
    Constant {
        u: VectorSpec,
    },
    Sinusoidal {
        amplitude: VectorSpec,
        omega: f64,
        #[serde(default)]
        phase: Option<VectorSpec>,
    },
    Piecewise {
        segments: Vec<SegmentSpec>,
    },
    /// `u = coupling ∘ ΔE / (R T)`.
    Energy {
        coupling: VectorSpec,
        delta_e: VectorSpec,
        temperature: f64,
        #[serde(default)]
        gas_constant: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentSpec {
    start: f64,
    end: f64,
    u: VectorSpec,
}

impl ControlSpec {
    fn build(&self, dim: usize) -> Result<ControlInput<f64>> {
        match self {
            Self::Zero => Ok(ControlInput::zero(dim)),
            Self::Constant { u } => ControlInput::constant(u.build(dim, "control u")?),
            Self::Sinusoidal {
                amplitude,
                omega,
                phase,
            } => ControlInput::sinusoidal(
                amplitude.build(dim, "control amplitude")?,
                *omega,
                match phase {
                    Some(p) => p.build(dim, "control phase")?,
                    None => DVector::zeros(dim),
                },
            ),
            Self::Piecewise { segments } => ControlInput::piecewise(
                segments
                    .iter()
                    .map(|s| {
                        Ok(Segment {
                            start: s.start,
                            end: s.end,
                            u: s.u.build(dim, "segment u")?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            Self::Energy {
                coupling,
                delta_e,
                temperature,
                gas_constant,
            } => ControlInput::from_energy(
                &coupling.build(dim, "energy coupling")?,
                &delta_e.build(dim, "delta_e")?,
                gas_constant.unwrap_or(GAS_CONSTANT),
                *temperature,
            ),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    k: MatrixSpec,
    k_eq: VectorSpec,
    #[serde(default)]
    x0: Option<VectorSpec>,
    #[serde(default)]
    q0: Option<VectorSpec>,
    #[serde(default)]
    control: Option<ControlSpec>,
    #[serde(default)]
    network: Option<NetworkFile>,
    #[serde(default)]
    totals: Option<Vec<f64>>,
    #[serde(default)]
    dt_max: Option<f64>,
}

impl Params {
    fn dim(&self) -> Result<usize> {
        let from_k = match &self.k {
            MatrixSpec::Scalar(_) => None,
            MatrixSpec::Rows(rows) => Some(rows.len()),
        };
        match (from_k, self.k_eq.len()) {
            (Some(a), Some(b)) if a != b => Err(Error::Config(format!(
                "custom: k is {a}x{a} but k_eq has {b} entries"
            ))),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Ok(1),
        }
    }

    fn system(&self) -> Result<LogLinearSystem<f64>> {
        let dim = self.dim()?;
        require(dim > 0, "custom: system must have at least one reaction")?;
        let k = match &self.k {
            MatrixSpec::Scalar(v) => DMatrix::from_diagonal_element(dim, dim, *v),
            MatrixSpec::Rows(rows) => {
                require(
                    rows.iter().all(|r| r.len() == dim),
                    format!("custom: k must be a square {dim}x{dim} matrix"),
                )?;
                DMatrix::from_fn(dim, dim, |i, j| rows[i][j])
            }
        };
        LogLinearSystem::new(k, self.k_eq.build(dim, "k_eq")?)
    }
}

pub(super) fn resolve(cfg: &ScenarioConfig, times: Vec<f64>) -> Result<Scenario> {
    let p: Params = params(cfg)?;
    let system = p.system()?;
    let dim = system.dim();
    let x0 = match (&p.x0, &p.q0) {
        (Some(_), Some(_)) => return Err(Error::Config("custom: give x0 or q0, not both".into())),
        (Some(x), None) => x.build(dim, "x0")?,
        (None, Some(q)) => system.log_deviation(&q.build(dim, "q0")?)?,
        (None, None) => DVector::zeros(dim),
    };
    let control = match &p.control {
        Some(c) => c.build(dim)?,
        None => ControlInput::zero(dim),
    };
    let pool = match (&p.network, &p.totals) {
        (Some(file), Some(totals)) => {
            let network = file.build::<f64>()?;
            require(
                network.n_reactions() == dim,
                format!("custom: network has {} reactions, system has {dim}", network.n_reactions()),
            )?;
            let m = network.conservation_basis().dim();
            require(
                totals.len() == m,
                format!("custom: network has {m} conservation laws but {} totals were given", totals.len()),
            )?;
            Some(Pool {
                network,
                totals: DVector::from_column_slice(totals),
            })
        }
        (None, None) => None,
        _ => return Err(Error::Config("custom: network and totals must be given together".into())),
    };
    Ok(Scenario {
        kind: ScenarioKind::Custom,
        system,
        control,
        x0,
        times,
        channels: (1..=dim).map(|i| format!("reaction_{i}")).collect(),
        pool,
        dt_max: p.dt_max,
    })
}

pub(super) fn extend(_cfg: &ScenarioConfig, sc: &Scenario, report: &mut ScenarioReport) -> Result<()> {
    let modes = eigenmodes(&sc.system)?;
    let osc = oscillation_parameters(&sc.system)?;
    let s = &mut report.summary;
    s.insert("eigenvalues".into(), json!(modes.values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>()));
    s.insert(
        "oscillations".into(),
        json!(osc
            .iter()
            .map(|o| json!({"damping": o.damping, "frequency": o.frequency, "period": o.period}))
            .collect::<Vec<_>>()),
    );
    let ss = match sc.control.as_constant() {
        Some(u) => match steady_state(&sc.system, u) {
            Ok(ss) => json!({"x": ss.x.as_slice(), "Q": ss.q.as_slice()}),
            Err(e) => json!({"error": e.to_string()}),
        },
        None => Value::Null,
    };
    s.insert("steady_state".into(), ss);
    Ok(())
}
