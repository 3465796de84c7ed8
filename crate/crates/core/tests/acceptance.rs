//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed by the criteria, not tuned here.

mod common;

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use rqdyn::dynamics::{
    analytic_solution, eigenmodes, gibbs_deviation, oscillation_parameters, simulate, uniform_grid,
    ControlInput, LogLinearSystem, SimulateOptions, GAS_CONSTANT,
};
use rqdyn::massaction::MassActionAB;
use rqdyn::network::presets;
use rqdyn::numerics::{expm, rk4};
use rqdyn::reconstruct::{
    base_point, reconstruct_concentrations, Objective, ReconstructOptions, ReconstructionProblem,
};
use rqdyn::scenarios::{crossing_time, ScenarioConfig, ScenarioKind};
use rqdyn::{DMatrix, DVector};

use common::{max_rel, random_concentrations, random_network};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn all(parts: Vec<Verdict>) -> Self {
        Self {
            pass: parts.iter().all(|p| p.pass),
            detail: parts
                .iter()
                .map(|p| format!("{}{}", if p.pass { "" } else { "[failed] " }, p.detail))
                .collect::<Vec<_>>()
                .join("; "),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_matched_rate() -> Verdict {
    let k = MassActionAB::from_equilibrium(1.0, 2.0).unwrap().matched_rate();
    Verdict::new(k == 1.5, format!("k = {k:?} (expected exactly 1.5)"))
}

fn c2_hexokinase() -> Verdict {
    let report = ScenarioConfig::preset(ScenarioKind::Hexokinase)
        .with_parameter("ratio", json!(10.0))
        .unwrap()
        .run()
        .unwrap();
    let q = report.summary["Q_ss"].as_f64().unwrap();
    let eff = report.summary["efficiency"].as_f64().unwrap();
    let params = &report.config.parameters;
    let pinned = params["k"] == json!(1.0) && params["k_atp"] == json!(2.0) && params["k_eq"] == json!(0.5);
    // independent: 0.5·10^(2/1)
    let oracle = 0.5 * 10f64.powi(2);
    Verdict::all(vec![
        Verdict::new(pinned, "preset k = 1, k_ATP = 2, K_eq = 0.5"),
        Verdict::new(rel(q, oracle) <= 1e-9, format!("Q_ss = {q} (rel err {:.1e})", rel(q, oracle))),
        Verdict::new(
            rel(eff, 50.0 / 51.0) <= 1e-9,
            format!("efficiency = {eff:.8} (rel err {:.1e})", rel(eff, 50.0 / 51.0)),
        ),
    ])
}

/// Largest componentwise relative error between two eigenvalue lists.
fn eigen_err(got: &[(f64, f64)], want: &[(f64, f64)]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g.0 - w.0).hypot(g.1 - w.1) / w.0.hypot(w.1))
        .fold(0.0, f64::max)
}

fn c3_transport() -> Verdict {
    let cfg = ScenarioConfig::preset(ScenarioKind::CoupledTransport);
    let sc = cfg.resolve().unwrap();
    let modes = eigenmodes(&sc.system).unwrap();
    let got: Vec<(f64, f64)> = modes.values.iter().map(|v| (v.re, v.im)).collect();
    // closed form for a symmetric 2x2: mean ± sqrt(half-gap² + b²)
    let (mean, rad) = (1.5, (0.25f64 + 0.25).sqrt());
    let want = [(mean - rad, 0.0), (mean + rad, 0.0)];
    let err = eigen_err(&got, &want);
    let rounded: Vec<f64> = got.iter().map(|v| (v.0 * 10.0).round() / 10.0).collect();

    let report = cfg.run().unwrap();
    let flag = report.summary["overshoot"] == json!(true);
    // independent modal evaluation of x₂(t) on a fine grid
    let x0 = &sc.x0;
    let v1 = DVector::from_vec(vec![1.0, (want[0].0 - 1.0) / 0.5]).normalize();
    let v2 = DVector::from_vec(vec![1.0, (want[1].0 - 1.0) / 0.5]).normalize();
    let (z1, z2) = (v1.dot(x0), v2.dot(x0));
    let x2: Vec<f64> = (0..=10_000)
        .map(|i| {
            let t = i as f64 * 1e-3;
            z1 * (-want[0].0 * t).exp() * v1[1] + z2 * (-want[1].0 * t).exp() * v2[1]
        })
        .collect();
    let cross = x2.windows(2).position(|w| w[0].signum() != w[1].signum());
    let decays = cross.is_some_and(|i| {
        let tail = &x2[i + 1..];
        let peak = tail.iter().map(|v| v.abs()).fold(0.0, f64::max);
        tail[tail.len() - 1].abs() < peak
    });
    Verdict::all(vec![
        Verdict::new(err <= 1e-9, format!("eigenvalues {:.6}, {:.6} (err {err:.1e})", got[0].0, got[1].0)),
        Verdict::new(rounded == [0.8, 2.2], format!("rounded {rounded:?}")),
        Verdict::new(flag && decays, format!("overshoot for x0 = {:?}: flag {flag}, oracle {decays}", x0.as_slice())),
    ])
}

fn glycolysis_amplitude(u0: f64) -> f64 {
    ScenarioConfig::preset(ScenarioKind::Glycolysis)
        .with_parameter("u0", json!(u0))
        .unwrap()
        .run()
        .unwrap()
        .summary["amplitude_measured"]
        .as_f64()
        .unwrap()
}

fn c4_glycolysis() -> Verdict {
    let sc = ScenarioConfig::preset(ScenarioKind::Glycolysis).resolve().unwrap();
    let modes = eigenmodes(&sc.system).unwrap();
    let got: Vec<(f64, f64)> = modes.values.iter().map(|v| (v.re, v.im)).collect();
    let err = eigen_err(&got, &[(0.5, -2.0), (0.5, 2.0)]);
    let osc = oscillation_parameters(&sc.system).unwrap();
    let period = osc[0].period;
    let a1 = glycolysis_amplitude(1.0);
    let a2 = glycolysis_amplitude(2.0);
    let ratio = a2 / a1;
    Verdict::all(vec![
        Verdict::new(err <= 1e-9, format!("eigenvalues 0.5 ± 2i (err {err:.1e})")),
        Verdict::new(
            (period - PI).abs() <= 1e-9 && (period * 10.0).round() / 10.0 == 3.1,
            format!("period {period:.9} s"),
        ),
        Verdict::new((ratio - 2.0).abs() <= 0.02, format!("amplitude ratio {ratio:.6}")),
    ])
}

fn c5_closed_form_vs_integrator() -> Verdict {
    let mut configs: Vec<ScenarioConfig> = ScenarioKind::ALL.iter().map(|k| ScenarioConfig::preset(*k)).collect();
    configs.push(
        ScenarioConfig::preset(ScenarioKind::Glycolysis)
            .with_parameter("driven", json!(false))
            .unwrap(),
    );
    let mut worst = 0.0f64;
    let mut names = Vec::new();
    for cfg in configs {
        let sc = cfg.resolve().unwrap();
        let exact = analytic_solution(&sc.system, &sc.x0, &sc.times).unwrap();
        let num = simulate(&sc.system, &sc.x0, &ControlInput::zero(sc.system.dim()), &sc.times, SimulateOptions::default())
            .unwrap()
            .trajectory;
        for (a, b) in exact.log_deviations().iter().zip(num.log_deviations()) {
            let scale = a.norm();
            let e = (a - b).norm();
            worst = worst.max(if scale > 0.0 { e / scale } else { e });
        }
        names.push(cfg.scenario.name());
    }
    Verdict::new(worst <= 1e-6, format!("max relative gap {worst:.2e} over {}", names.join(", ")))
}

fn c6_mass_action_band() -> Verdict {
    let ma = MassActionAB::from_equilibrium(1.0, 2.0).unwrap();
    let k = ma.matched_rate();
    let sys = LogLinearSystem::scalar(k, 2.0).unwrap();
    let times = uniform_grid(0.0, 10.0, 2001).unwrap();
    let mut worst = 0.0f64;
    for q0 in [1.8, 1.9, 2.1, 2.2] {
        let x0 = DVector::from_element(1, (q0 / 2.0f64).ln());
        let ll = analytic_solution(&sys, &x0, &times).unwrap().q_series(0);
        let m = ma.simulate_quotient(q0, &times, None).unwrap().q_series(0);
        for (a, b) in ll.iter().zip(&m) {
            worst = worst.max(rel(*a, *b));
        }
    }
    let fine = uniform_grid(0.0, 2.0, 20_001).unwrap();
    let x0 = DVector::from_element(1, 4.0f64.ln());
    let ll = analytic_solution(&sys, &x0, &fine).unwrap().q_series(0);
    let m = ma.simulate_quotient(8.0, &fine, None).unwrap().q_series(0);
    let t_ll = crossing_time(&fine, &ll, 4.0).unwrap();
    let t_ma = crossing_time(&fine, &m, 4.0).unwrap();
    Verdict::all(vec![
        Verdict::new(worst <= 0.02, format!("near-equilibrium max deviation {:.3}%", 100.0 * worst)),
        Verdict::new(
            t_ll < t_ma,
            format!("Q0 = 8 reaches Q = 4 at t = {t_ll:.4} s (log-linear) vs {t_ma:.4} s (mass action)"),
        ),
    ])
}

fn c7_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    let opts = ReconstructOptions::default();
    let (mut worst, mut max_iter, mut failures) = (0.0f64, 0usize, Vec::new());
    for case in 0..100 {
        let n = rng.random_range(2..=8);
        let r = rng.random_range(1..=6);
        let net = random_network(&mut rng, n, r);
        let c = random_concentrations(&mut rng, n);
        let x = net.stoichiometry().transpose() * c.map(f64::ln);
        let y = net.conservation_basis().totals(&c);
        let problem = ReconstructionProblem::new(&net, x, y).unwrap();
        match reconstruct_concentrations(&problem, &opts) {
            Ok(res) => {
                worst = worst.max(max_rel(&res.c_star, &c));
                max_iter = max_iter.max(res.iterations);
            }
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    Verdict::all(vec![
        Verdict::new(failures.is_empty(), format!("{} solver failures {failures:?}", failures.len())),
        Verdict::new(worst <= 1e-8, format!("max relative error {worst:.2e}")),
        Verdict::new(max_iter <= 30, format!("max Newton iterations {max_iter}")),
    ])
}

fn c8_isomerization_closed_form() -> Verdict {
    let net = presets::isomerization::<f64>();
    let mut worst = 0.0f64;
    for q in [0.01, 0.5, 2.0, 10.0, 1e3] {
        for total in [1.0, 3.0, 250.0] {
            let problem = ReconstructionProblem::new(
                &net,
                DVector::from_element(1, f64::ln(q)),
                DVector::from_element(1, total),
            )
            .unwrap();
            let c = reconstruct_concentrations(&problem, &ReconstructOptions::default()).unwrap().c_star;
            let want = DVector::from_vec(vec![total / (1.0 + q), total * q / (1.0 + q)]);
            worst = worst.max(max_rel(&c, &want));
        }
    }
    Verdict::new(worst <= 1e-10, format!("max relative error {worst:.2e}"))
}

fn c9_decoupling() -> Verdict {
    let mut configs: Vec<ScenarioConfig> = ScenarioKind::PRESETS.iter().map(|k| ScenarioConfig::preset(*k)).collect();
    configs.push(
        ScenarioConfig::preset(ScenarioKind::Custom)
            .with_parameter(
                "network",
                json!({"species": ["A", "B", "C"], "reactions": [
                    {"name": "r1", "stoich": {"A": -1.0, "B": 1.0}},
                    {"name": "r2", "stoich": {"B": -1.0, "C": 1.0}}]}),
            )
            .unwrap()
            .with_parameter("totals", json!([2.0]))
            .unwrap(),
    );
    let mut worst = 0.0f64;
    let mut conc_scaled = true;
    for base in configs {
        let mut scaled = base.clone();
        scaled.scale_totals(10.0);
        assert_ne!(scaled, base, "{} has no totals to scale", base.scenario);
        let (a, b) = (base.run().unwrap(), scaled.run().unwrap());
        for (qa, qb) in a.trajectory.quotients().iter().zip(b.trajectory.quotients()) {
            worst = worst.max(max_rel(qb, qa));
        }
        let (ca, cb) = (a.series("concentrations").unwrap(), b.series("concentrations").unwrap());
        for (ra, rb) in ca.rows.iter().zip(&cb.rows) {
            for (j, name) in ca.columns.iter().enumerate() {
                if name.starts_with("Qrec_") {
                    worst = worst.max(rel(rb[j], ra[j]));
                } else if name.starts_with("c_") {
                    conc_scaled &= rel(rb[j], 10.0 * ra[j]) < 1e-8;
                }
            }
        }
    }
    Verdict::all(vec![
        Verdict::new(worst <= 1e-10, format!("max relative change in Q {worst:.2e}")),
        Verdict::new(conc_scaled, "concentrations scale by 10"),
    ])
}

fn c10_gibbs_decay() -> Verdict {
    let k = 1.5;
    let sys = LogLinearSystem::scalar(k, 2.0).unwrap();
    let times = uniform_grid(0.0, 10.0, 500).unwrap();
    let x0 = DVector::from_element(1, 4.0f64.ln());
    let traj = analytic_solution(&sys, &x0, &times).unwrap();
    let g0 = gibbs_deviation(&x0, GAS_CONSTANT, 298.15).unwrap()[0];
    let worst = traj
        .times()
        .iter()
        .zip(traj.log_deviations())
        .map(|(t, x)| {
            let g = gibbs_deviation(x, GAS_CONSTANT, 298.15).unwrap()[0];
            (g / g0 - (-k * t).exp()).abs()
        })
        .fold(0.0, f64::max);
    Verdict::new(worst <= 1e-9, format!("max |ΔG(t)/ΔG(0) − e^(−kt)| = {worst:.2e}"))
}

fn c11_wegscheider() -> Verdict {
    let net = presets::triangle::<f64>();
    let ok = net.wegscheider_check(&DVector::from_vec(vec![2.0, 3.0, 1.0 / 6.0])).unwrap();
    let bad = net.wegscheider_check(&DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
    let err = (bad.worst_violation - 6f64.ln()).abs();
    Verdict::all(vec![
        Verdict::new(ok.consistent, "product 1 passes"),
        Verdict::new(!bad.consistent && err <= 1e-9, format!("product 6 fails, violation err {err:.1e}")),
    ])
}

fn c12_kernels() -> Verdict {
    let theta: f64 = 2.3;
    let rot = expm(&DMatrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0])).unwrap();
    let want = DMatrix::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
    let expm_err = (rot - want).amax();

    let err_at = |h: f64| {
        let x = rk4(|_, x: &DVector<f64>| -x, &DVector::from_element(1, 1.0), &[0.0, 1.0], h).unwrap();
        (x[1][0] - (-1.0f64).exp()).abs()
    };
    let order = (err_at(0.1) / err_at(0.05)).log2();

    // objective derivatives on a network with two conservation laws
    let net = presets::chain::<f64>(&["A", "B", "C", "D"]);
    let net = rqdyn::network::Network::from_matrix(
        net.species().to_vec(),
        vec!["r1".into(), "r2".into()],
        net.stoichiometry().columns(0, 2).into_owned(),
    )
    .unwrap();
    let c = DVector::from_vec(vec![0.7, 1.3, 2.0, 0.4]);
    let x = net.stoichiometry().transpose() * c.map(f64::ln);
    let c0 = base_point(&net, &x).unwrap();
    let l = net.conservation_basis().l;
    let y = 0.6 * (l.transpose() * &c);
    let obj = Objective { l: &l, c0: &c0, y_star: &y };
    let alpha = DVector::from_vec(vec![0.3, -0.2]);
    let at = obj.evaluate(&alpha).unwrap();
    let h = 1e-6;
    let m = l.ncols();
    let mut fd_grad = DVector::zeros(m);
    let mut fd_hess = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = h;
        let (p, q) = (obj.evaluate(&(&alpha + &e)).unwrap(), obj.evaluate(&(&alpha - &e)).unwrap());
        fd_grad[i] = (p.value - q.value) / (2.0 * h);
        fd_hess.set_column(i, &((p.gradient - q.gradient) / (2.0 * h)));
    }
    let g_err = (&fd_grad - &at.gradient).norm() / at.gradient.norm();
    let h_err = (&fd_hess - &at.hessian).norm() / at.hessian.norm();
    Verdict::all(vec![
        Verdict::new(expm_err <= 1e-10, format!("expm rotation err {expm_err:.1e}")),
        Verdict::new((3.8..=4.2).contains(&order), format!("RK4 order {order:.3}")),
        Verdict::new(g_err <= 1e-6, format!("gradient FD rel err {g_err:.1e}")),
        Verdict::new(h_err <= 1e-5, format!("Hessian FD rel err {h_err:.1e}")),
    ])
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("matched rate k = k_r(1 + K_eq)", c1_matched_rate),
        ("hexokinase steady state and efficiency", c2_hexokinase),
        ("coupled-transport eigenvalues and overshoot", c3_transport),
        ("glycolysis spectrum, period, amplitude scaling", c4_glycolysis),
        ("closed form vs integrator on scenario matrices", c5_closed_form_vs_integrator),
        ("mass-action agreement band and Q0 = 8 ordering", c6_mass_action_band),
        ("reconstruction round trip on random networks", c7_round_trip),
        ("A<->B reconstruction closed form", c8_isomerization_closed_form),
        ("conservation decoupling of quotients", c9_decoupling),
        ("Gibbs energy decay", c10_gibbs_decay),
        ("Wegscheider cycle condition", c11_wegscheider),
        ("numerics kernels", c12_kernels),
    ];
    let quiet: fn(&panic::PanicHookInfo<'_>) = |_| {};
    panic::set_hook(Box::new(quiet));
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!verdict.pass);
        println!(
            "criterion {:>2} {}: {title}: {}",
            i + 1,
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail
        );
    }
    let _ = panic::take_hook();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
