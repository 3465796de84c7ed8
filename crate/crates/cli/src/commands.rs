use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use rqdyn::dynamics::{eigenmodes, oscillation_parameters, steady_state, SimulateOptions};
use rqdyn::network::{Network, NetworkFile};
use rqdyn::reconstruct::{reconstruct_concentrations, ReconstructOptions, ReconstructionProblem};
use rqdyn::scenarios::{trajectory_series, ScenarioConfig, ScenarioKind};
use rqdyn::DVector;

use crate::error::{CliError, CliResult};
use crate::output::{series_csv, Bundle};

/// Flags shared by every subcommand that takes a scenario config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub set: Vec<String>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `key=value`; the value is parsed as JSON and falls back to a string.
pub fn parse_assignment(s: &str) -> CliResult<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("--set expects KEY=VALUE, got `{s}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

pub fn load_config(config: Option<&Path>, preset: Option<&str>, ov: &Overrides) -> CliResult<ScenarioConfig> {
    let mut cfg = match (config, preset) {
        (Some(path), _) => ScenarioConfig::from_json_str(&read(path)?)?,
        (None, Some(name)) => ScenarioConfig::preset(name.parse::<ScenarioKind>()?),
        (None, None) => return Err(CliError::Input("either --config or a preset name is required".into())),
    };
    for a in &ov.set {
        let (k, v) = parse_assignment(a)?;
        cfg.set_parameter(&k, v)?;
    }
    Ok(cfg.with_time(ov.t_end, ov.samples))
}

fn load_network(path: &Path) -> CliResult<Network<f64>> {
    let file: NetworkFile = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("network file {}: {e}", path.display())))?;
    Ok(file.build()?)
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(", ")
}

pub fn simulate(cfg: &ScenarioConfig) -> CliResult<Bundle> {
    let sc = cfg.resolve()?;
    let opts = SimulateOptions {
        dt_max: sc.dt_max,
        self_check: true,
    };
    let sim = rqdyn::dynamics::simulate(&sc.system, &sc.x0, &sc.control, &sc.times, opts)?;
    let traj = &sim.trajectory;
    let summary = json!({
        "subcommand": "simulate",
        "scenario": cfg.scenario.name(),
        "channels": sc.channels,
        "dim": sc.system.dim(),
        "samples": traj.len(),
        "t_end": traj.times()[traj.len() - 1],
        "dt_max": sim.dt_max,
        "step_halving_change": sim.step_halving_change,
        "unstable": sim.unstable,
        "final_x": vec_json(traj.last_x()),
        "final_Q": vec_json(traj.last_q()),
    });
    let mut report = format!(
        "simulated {} ({} reactions, {} samples)\nfinal Q: [{}]\n",
        cfg.scenario,
        sc.system.dim(),
        traj.len(),
        fmt_vec(traj.last_q().as_slice())
    );
    if let Some(change) = sim.step_halving_change {
        report.push_str(&format!("step-halving change: {change:.3e}\n"));
    }
    if sim.unstable {
        report.push_str("warning: K has an eigenvalue with nonpositive real part\n");
    }
    Ok(Bundle {
        config: cfg.to_json(),
        summary,
        files: vec![("trajectory.csv".into(), series_csv(&trajectory_series(traj))?)],
        report,
    })
}

pub fn steady(cfg: &ScenarioConfig, u: Option<&[f64]>) -> CliResult<Bundle> {
    let sc = cfg.resolve()?;
    let u = match u {
        Some(u) => DVector::from_column_slice(u),
        None => sc.control.as_constant().cloned().ok_or_else(|| {
            CliError::Input("the configured drive is not constant; pass --u".into())
        })?,
    };
    let ss = steady_state(&sc.system, &u)?;
    let summary = json!({
        "subcommand": "steady-state",
        "scenario": cfg.scenario.name(),
        "channels": sc.channels,
        "u": vec_json(&u),
        "x_ss": vec_json(&ss.x),
        "Q_ss": vec_json(&ss.q),
    });
    let report = format!(
        "x_ss: [{}]\nQ_ss: [{}]\n",
        fmt_vec(ss.x.as_slice()),
        fmt_vec(ss.q.as_slice())
    );
    Ok(Bundle {
        config: json!({"scenario": cfg.to_json(), "u": vec_json(&u)}),
        summary,
        files: Vec::new(),
        report,
    })
}

pub fn eigen(cfg: &ScenarioConfig) -> CliResult<Bundle> {
    let sc = cfg.resolve()?;
    let modes = eigenmodes(&sc.system)?;
    let osc = oscillation_parameters(&sc.system)?;
    let values: Vec<[f64; 2]> = modes.values.iter().map(|v| [v.re, v.im]).collect();
    let vectors: Vec<Vec<[f64; 2]>> = (0..modes.dim())
        .map(|j| modes.vectors.column(j).iter().map(|c| [c.re, c.im]).collect())
        .collect();
    let stable = modes.values.iter().all(|v| v.re > 0.0);
    let abscissa = modes.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let summary = json!({
        "subcommand": "eigen",
        "scenario": cfg.scenario.name(),
        "eigenvalues": values,
        "eigenvectors": vectors,
        "symmetric": modes.symmetric,
        "defective": modes.defective,
        "stable": stable,
        "spectral_abscissa": abscissa,
        "max_residual": modes.max_residual(sc.system.relaxation()),
        "oscillations": osc
            .iter()
            .map(|o| json!({"damping": o.damping, "frequency": o.frequency, "period": o.period}))
            .collect::<Vec<_>>(),
    });
    let mut report = String::new();
    for (i, v) in modes.values.iter().enumerate() {
        report.push_str(&format!("lambda_{} = {:.10} {:+.10}i\n", i + 1, v.re, v.im));
    }
    for o in &osc {
        report.push_str(&format!(
            "oscillation: damping {:.6} 1/s, frequency {:.6} rad/s, period {:.6} s\n",
            o.damping, o.frequency, o.period
        ));
    }
    report.push_str(if stable { "stable\n" } else { "not stable\n" });
    Ok(Bundle {
        config: cfg.to_json(),
        summary,
        files: Vec::new(),
        report,
    })
}

pub fn reconstruct(network: &Path, x_star: &[f64], y_star: &[f64]) -> CliResult<Bundle> {
    let net = load_network(network)?;
    let problem = ReconstructionProblem::new(
        &net,
        DVector::from_column_slice(x_star),
        DVector::from_column_slice(y_star),
    )?;
    let res = reconstruct_concentrations(&problem, &ReconstructOptions::default())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Input(format!("csv: {e}"));
    w.write_record(["species", "concentration"]).map_err(csv_err)?;
    for (name, c) in net.species().iter().zip(res.c_star.iter()) {
        w.write_record([name.clone(), crate::output::fmt_num(*c)]).map_err(csv_err)?;
    }
    let csv = w.into_inner().map_err(|e| CliError::Input(format!("csv: {e}")))?;
    let conc: serde_json::Map<String, Value> = net
        .species()
        .iter()
        .zip(res.c_star.iter())
        .map(|(s, c)| (s.clone(), json!(c)))
        .collect();
    let summary = json!({
        "subcommand": "reconstruct",
        "concentrations": conc,
        "alpha": vec_json(&res.alpha_star),
        "iterations": res.iterations,
        "residual_totals": res.residual_totals,
        "residual_quotients": res.residual_quotients,
    });
    let mut report = String::new();
    for (s, c) in net.species().iter().zip(res.c_star.iter()) {
        report.push_str(&format!("[{s}] = {c:.12}\n"));
    }
    report.push_str(&format!(
        "iterations {}, total residual {:.3e}, quotient residual {:.3e}\n",
        res.iterations, res.residual_totals, res.residual_quotients
    ));
    Ok(Bundle {
        config: json!({"network": network.display().to_string(), "x_star": x_star, "y_star": y_star}),
        summary,
        files: vec![("concentrations.csv".into(), csv)],
        report,
    })
}

pub fn scenario(cfg: &ScenarioConfig) -> CliResult<Bundle> {
    let report = cfg.run()?;
    let files = report
        .series
        .iter()
        .map(|s| Ok((format!("{}.csv", s.name), series_csv(s)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let mut summary = report.summary_json();
    summary["subcommand"] = json!("scenario");
    let text = format!(
        "scenario {}: {} samples, series: {}\n",
        cfg.scenario,
        report.trajectory.len(),
        report.series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
    );
    Ok(Bundle {
        config: cfg.to_json(),
        summary,
        files,
        report: text,
    })
}

pub fn check(network: &Path, k_eq: &[f64], x: Option<&[f64]>) -> CliResult<Bundle> {
    let net = load_network(network)?;
    let w = net.wegscheider_check(&DVector::from_column_slice(k_eq))?;
    let cycles: Vec<Value> = w
        .cycles
        .iter()
        .map(|c| json!({"cycle": vec_json(&c.cycle), "violation": c.violation, "tolerance": c.tolerance}))
        .collect();
    let verdict = if w.consistent { "consistent" } else { "inconsistent" };
    let mut summary = json!({
        "subcommand": "check",
        "wegscheider": verdict,
        "consistent": w.consistent,
        "worst_violation": w.worst_violation,
        "cycles": cycles,
        "rank": net.rank(),
        "conservation_laws": net.conservation_basis().dim(),
    });
    let mut report = format!(
        "Wegscheider: {verdict} (worst cycle violation {:.3e}, {} independent cycles)\n",
        w.worst_violation,
        w.cycles.len()
    );
    if let Some(x) = x {
        let a = net.check_quotient_achievable(&DVector::from_column_slice(x))?;
        summary["achievability"] = json!({
            "achievable": a.achievable,
            "residual": a.residual,
            "tolerance": a.tolerance,
        });
        report.push_str(&format!(
            "ln Q {} Im(S^T) (residual {:.3e})\n",
            if a.achievable { "lies in" } else { "is outside" },
            a.residual
        ));
    }
    Ok(Bundle {
        config: json!({"network": network.display().to_string(), "k_eq": k_eq, "x": x}),
        summary,
        files: Vec::new(),
        report,
    })
}
