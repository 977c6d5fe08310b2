//! End-to-end checks of the headline claims, one line per criterion.
//!
//! Run with `--nocapture` to see the PASS lines; on failure every
//! criterion still reports before the final assertion fires.

mod common;

use std::sync::Arc;

use graphnls::gn::{gn_ratio_critical, random_family, theta_min, Mode};
use graphnls::graph::MetricGraph;
use graphnls::mesh::{GraphFunction, Mesh};
use graphnls::rearrange::{
    decreasing_rearrangement, pl_lp_norm_p, pl_mass, two_sided_rearrangement,
};
use graphnls::scan::{mass_scan, DEFAULT_RESOLUTION, PROBE_LAMBDAS};
use graphnls::solve::{
    blowup_probe, bound_states, constant_state, ground_state, FlowStatus, SolveConfig,
};
use graphnls::{critical_mass_half_line, critical_mass_line};

type Check = std::result::Result<String, String>;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn run(name: &str, failures: &mut Vec<String>, body: impl FnOnce() -> Check) {
    match body() {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(why) => {
            println!("FAIL {name}: {why}");
            failures.push(format!("{name}: {why}"));
        }
    }
}

fn c1_threshold_brackets() -> Check {
    let mut parts = Vec::new();
    for name in common::ALL_FIXTURES {
        let graph = common::fixture(name);
        let tip = graph.has_terminal_edge();
        let target = if tip {
            critical_mass_half_line()
        } else {
            critical_mass_line()
        };
        let grid: &[f64] = if tip {
            &[0.8, 1.2, 1.6, 2.0]
        } else {
            &[2.0, 2.4, 2.8, 3.2]
        };
        let mut cfg = SolveConfig::new(6.0, grid[0]);
        cfg.h = common::min_edge_length(&graph) / 64.0;
        let result = mass_scan(&graph, 6.0, grid, DEFAULT_RESOLUTION, &cfg)
            .map_err(|e| format!("{name}: {e}"))?;
        let t = result
            .threshold
            .ok_or_else(|| format!("{name}: no bracket found; flags: {:?}", result.flags))?;
        let width = t.hi - t.lo;
        if !(t.lo <= target && target <= t.hi) {
            return Err(format!(
                "{name}: bracket [{:.4}, {:.4}] misses {target:.4}; flags: {:?}",
                t.lo, t.hi, result.flags
            ));
        }
        if width > 0.1 {
            return Err(format!("{name}: bracket width {width:.3} exceeds 0.1"));
        }
        parts.push(format!("{name} [{:.3},{:.3}]", t.lo, t.hi));
    }
    Ok(parts.join("; "))
}

fn c2_subcritical_existence() -> Check {
    let mut worst_res = 0.0_f64;
    let mut worst_mass = 0.0_f64;
    let mut count = 0;
    for name in common::ALL_FIXTURES {
        let graph = common::fixture(name);
        let len = graph.total_length();
        for p in [3.0, 4.0, 5.0] {
            for mu in [0.1, 1.0, 10.0] {
                let cfg = SolveConfig::new(p, mu);
                let out =
                    ground_state(&graph, &cfg).map_err(|e| format!("{name} p={p} mu={mu}: {e}"))?;
                let tag = format!("{name} p={p} mu={mu}");
                if out.status != FlowStatus::Converged {
                    return Err(format!(
                        "{tag}: {:?} with residual {:.2e}",
                        out.status, out.report.stationarity_residual
                    ));
                }
                if out.report.stationarity_residual > 1e-8 {
                    return Err(format!(
                        "{tag}: residual {:.2e} above 1e-8",
                        out.report.stationarity_residual
                    ));
                }
                let e_const = -mu.powf(p / 2.0) * len.powf(1.0 - p / 2.0) / p;
                if out.report.energy > e_const + 1e-9 * (1.0 + e_const.abs()) {
                    return Err(format!(
                        "{tag}: energy {:.6} above the constant state's {:.6}",
                        out.report.energy, e_const
                    ));
                }
                worst_res = worst_res.max(out.report.stationarity_residual);
                worst_mass = worst_mass.max((out.report.mass - mu).abs() / mu);
                count += 1;
            }
        }
    }
    if worst_mass > 1e-10 {
        return Err(format!("mass drift {worst_mass:.2e} above 1e-10 relative"));
    }
    Ok(format!(
        "{count}/54 converged; max residual {worst_res:.1e}, max mass drift {worst_mass:.1e}"
    ))
}

fn c3_constant_state_exactness() -> Check {
    let mu = critical_mass_half_line();
    let mut worst = 0.0_f64;
    for name in common::ALL_FIXTURES {
        let graph = common::fixture(name);
        let mesh = Mesh::build(Arc::clone(&graph), Mesh::default_spacing(&graph))
            .map_err(|e| e.to_string())?;
        let (_, report) = constant_state(&mesh, 6.0, mu).map_err(|e| e.to_string())?;
        let len = graph.total_length();
        let expected = -mu.powi(3) / (6.0 * len * len);
        let rel = (report.energy - expected).abs() / expected.abs();
        if rel > 1e-10 {
            return Err(format!("{name}: energy off by {rel:.2e} relative"));
        }
        if report.stationarity_residual > 1e-10 {
            return Err(format!(
                "{name}: stationarity residual {:.2e} above 1e-10",
                report.stationarity_residual
            ));
        }
        worst = worst.max(rel).max(report.stationarity_residual);
    }
    Ok(format!("all 6 fixtures exact; worst deviation {worst:.1e}"))
}

fn c4_gn_saturation() -> Check {
    // soliton at lambda = 1, centered on [-20, 20]; tails are ~e^-40
    let line = Arc::new(
        MetricGraph::build(&["a", "b"], &[("e", "a", "b", 40.0)]).map_err(|e| e.to_string())?,
    );
    let mesh = Mesh::build(line, 1e-3).map_err(|e| e.to_string())?;
    let phi = GraphFunction::from_edge_fn(&mesh, |_, x| {
        3.0_f64.powf(0.25) * sech(2.0 * (x - 20.0)).sqrt()
    });
    let ratio = gn_ratio_critical(&phi).map_err(|e| e.to_string())?;
    let k_line = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let rel_line = (ratio - k_line).abs() / k_line;
    if rel_line > 0.01 {
        return Err(format!(
            "line ratio {ratio:.6} vs {k_line:.6}: off by {rel_line:.2e}"
        ));
    }

    // half-soliton on [0, 20] with the peak at the boundary
    let half = Arc::new(
        MetricGraph::build(&["a", "b"], &[("e", "a", "b", 20.0)]).map_err(|e| e.to_string())?,
    );
    let mesh = Mesh::build(half, 1e-3).map_err(|e| e.to_string())?;
    let phi = GraphFunction::from_edge_fn(&mesh, |_, x| 3.0_f64.powf(0.25) * sech(2.0 * x).sqrt());
    let ratio_half = gn_ratio_critical(&phi).map_err(|e| e.to_string())?;
    let k_half = 4.0 * k_line;
    let rel_half = (ratio_half - k_half).abs() / k_half;
    if rel_half > 0.01 {
        return Err(format!(
            "half-line ratio {ratio_half:.6} vs {k_half:.6}: off by {rel_half:.2e}"
        ));
    }
    Ok(format!(
        "line {ratio:.6} (target {k_line:.6}), half-line {ratio_half:.6} (target {k_half:.6})"
    ))
}

fn c5_scaling_probe() -> Check {
    let graph = common::fixture("interval");
    let mass = 2.0 * critical_mass_half_line();
    let probe = blowup_probe(&graph, mass, &PROBE_LAMBDAS, None).map_err(|e| e.to_string())?;
    if probe.coefficient >= 0.0 {
        return Err(format!(
            "coefficient {:.3e} is not negative",
            probe.coefficient
        ));
    }
    if probe.r_squared < 0.999 {
        return Err(format!("R^2 {:.6} below 0.999", probe.r_squared));
    }
    Ok(format!(
        "a = {:.4e}, R^2 = {:.6} over lambda in {PROBE_LAMBDAS:?}",
        probe.coefficient, probe.r_squared
    ))
}

fn c6_bound_state_ladder() -> Check {
    let graph = common::fixture("loop");
    let mut cfg = SolveConfig::new(4.0, 1.0);
    cfg.k = 5;
    let set = bound_states(&graph, &cfg).map_err(|e| e.to_string())?;
    if set.states.len() < 4 {
        return Err(format!(
            "only {} distinct states (need >= 4); {} attempts, {} failed",
            set.states.len(),
            set.attempts,
            set.failed_attempts
        ));
    }
    let h_max = 2.0 * std::f64::consts::PI / 4.0 / 16.0; // default spacing on the loop
    let mut energies = Vec::new();
    for (i, s) in set.states.iter().enumerate() {
        if s.report.stationarity_residual > 1e-8 {
            return Err(format!(
                "state {i}: stationarity {:.2e} above 1e-8",
                s.report.stationarity_residual
            ));
        }
        if s.report.max_kirchhoff > 10.0 * h_max {
            return Err(format!(
                "state {i}: Kirchhoff residual {:.2e} above 10h = {:.2e}",
                s.report.max_kirchhoff,
                10.0 * h_max
            ));
        }
        if (s.report.lambda - s.lambda_newton).abs() > 1e-8 {
            return Err(format!(
                "state {i}: lambda mismatch {:.2e}",
                (s.report.lambda - s.lambda_newton).abs()
            ));
        }
        energies.push(s.report.energy);
    }
    if !energies.windows(2).all(|w| w[1] > w[0]) {
        return Err(format!("energies not strictly increasing: {energies:?}"));
    }
    let listed: Vec<String> = energies.iter().map(|e| format!("{e:.6}")).collect();
    Ok(format!(
        "{} states, energies {}",
        set.states.len(),
        listed.join(" < ")
    ))
}

/// Exact measure of {|u| > t} for the piecewise-linear interpolant,
/// written independently of the rearrangement code.
fn measure_above_pl(u: &GraphFunction, t: f64) -> f64 {
    let mut total = 0.0;
    u.mesh().for_each_cell(|a, b, h| {
        let (va, vb) = (u.values[a], u.values[b]);
        let segments: Vec<(f64, f64, f64)> = if va * vb < 0.0 {
            let s = va / (va - vb);
            vec![(va.abs(), 0.0, h * s), (0.0, vb.abs(), h * (1.0 - s))]
        } else {
            vec![(va.abs(), vb.abs(), h)]
        };
        for (y0, y1, len) in segments {
            let (lo, hi) = (y0.min(y1), y0.max(y1));
            total += if t >= hi {
                0.0
            } else if t < lo || hi == lo {
                len
            } else {
                len * (hi - t) / (hi - lo)
            };
        }
    });
    total
}

fn c7_property_suites() -> Check {
    let mut notes = Vec::new();

    // gradient of the discrete energy against central differences
    {
        let graph = common::fixture("tadpole");
        let mesh = Mesh::build(Arc::clone(&graph), Mesh::default_spacing(&graph))
            .map_err(|e| e.to_string())?;
        let p = 4.0;
        let u = random_family(&mesh, 11, 1, 0.8, 1.2)
            .map_err(|e| e.to_string())?
            .pop()
            .unwrap();
        let v = random_family(&mesh, 12, 1, 0.8, 1.2)
            .map_err(|e| e.to_string())?
            .pop()
            .unwrap();
        let w = mesh.lumped_weights();
        let mut g = vec![0.0; mesh.ndof()];
        mesh.stiffness_matvec(&u.values, &mut g);
        for i in 0..g.len() {
            let x = u.values[i];
            g[i] -= w[i] * x.abs().powf(p - 2.0) * x;
        }
        let gv: f64 = g.iter().zip(&v.values).map(|(a, b)| a * b).sum();
        let eps = 1e-6;
        let shifted = |sign: f64| {
            let vals: Vec<f64> = u
                .values
                .iter()
                .zip(&v.values)
                .map(|(a, b)| a + sign * eps * b)
                .collect();
            let f = GraphFunction::from_values(&mesh, vals).unwrap();
            graphnls::energy::energy(&f, p).unwrap()
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * eps);
        let rel = (gv - fd).abs() / (gv.abs() + fd.abs()).max(1e-12);
        if rel > 1e-5 {
            return Err(format!("gradient vs finite difference: {rel:.2e} relative"));
        }
        notes.push(format!("grad-fd {rel:.1e}"));
    }

    // rearrangements: equimeasurable, mass/L6 preserving, Dirichlet non-increasing
    {
        let star = common::fixture("star3");
        let mesh = Mesh::build(Arc::clone(&star), Mesh::default_spacing(&star))
            .map_err(|e| e.to_string())?;
        let u = random_family(&mesh, 23, 1, 0.9, 1.1)
            .map_err(|e| e.to_string())?
            .pop()
            .unwrap()
            .abs();
        let r = decreasing_rearrangement(&u).map_err(|e| e.to_string())?;
        check_rearranged("decreasing/star3", &u, &r)?;

        let loop_graph = common::fixture("loop");
        let mesh = Mesh::build(Arc::clone(&loop_graph), Mesh::default_spacing(&loop_graph))
            .map_err(|e| e.to_string())?;
        let u = random_family(&mesh, 29, 1, 0.9, 1.1)
            .map_err(|e| e.to_string())?
            .pop()
            .unwrap()
            .abs();
        let r = two_sided_rearrangement(&u).map_err(|e| e.to_string())?;
        check_rearranged("two-sided/loop", &u, &r)?;
        notes.push("rearrangements exact".to_string());
    }

    // theta_min: minimal and monotone in C, on the constant state where
    // the closed form (mu^3 / (C l^2))^2 makes the minimum positive
    {
        let graph = common::fixture("loop");
        let mesh = Mesh::build(Arc::clone(&graph), Mesh::default_spacing(&graph))
            .map_err(|e| e.to_string())?;
        let (u, _) = constant_state(&mesh, 6.0, 1.0).map_err(|e| e.to_string())?;
        let t1 = theta_min(&u, 1.0, Mode::NoTip).map_err(|e| e.to_string())?;
        let t2 = theta_min(&u, 2.0, Mode::NoTip).map_err(|e| e.to_string())?;
        let th1 = t1.theta_min.ok_or("theta_min(C=1) not found")?;
        let th2 = t2.theta_min.ok_or("theta_min(C=2) not found")?;
        if th1 <= 0.0 {
            return Err("constant state should force theta > 0".to_string());
        }
        if th2 > th1 + 1e-12 {
            return Err(format!(
                "theta_min not monotone in C: {th1:.3e} -> {th2:.3e}"
            ));
        }
        // independent feasibility: rhs(theta) >= int u^6 must fail just below
        let mu_star = critical_mass_line();
        let feasible = |theta: f64, c: f64| {
            let budget = (t1.mass - theta) / mu_star;
            3.0 * budget * budget * u.dirichlet_energy() + c * theta.sqrt() >= t1.lp6
        };
        if !feasible(th1 * (1.0 + 1e-6), 1.0) {
            return Err("theta_min(C=1) is not feasible".to_string());
        }
        if feasible(th1 * (1.0 - 1e-3), 1.0) {
            return Err("theta below theta_min(C=1) should be infeasible".to_string());
        }
        notes.push(format!("theta_min {th1:.2e} > {th2:.2e}, minimal"));
    }

    // flow descent and mass conservation on a representative solve
    {
        let graph = common::fixture("star3");
        let cfg = SolveConfig::new(4.0, 1.0);
        let out = ground_state(&graph, &cfg).map_err(|e| e.to_string())?;
        for w in out.history.windows(2) {
            if w[1].energy > w[0].energy + 1e-12 * (1.0 + w[0].energy.abs()) {
                return Err(format!(
                    "energy rose at iteration {}: {} -> {}",
                    w[1].iteration, w[0].energy, w[1].energy
                ));
            }
        }
        let drift = (out.report.mass - 1.0).abs();
        if drift > 1e-10 {
            return Err(format!("mass drift {drift:.2e} above 1e-10"));
        }
        notes.push(format!(
            "descent monotone over {} iterates, mass drift {drift:.1e}",
            out.history.len()
        ));
    }

    Ok(notes.join("; "))
}

fn check_rearranged(
    tag: &str,
    u: &GraphFunction,
    r: &graphnls::rearrange::RearrangedFunction,
) -> std::result::Result<(), String> {
    let mass_u = pl_mass(u);
    let mass_r = r.mass();
    if (mass_u - mass_r).abs() > 1e-8 * mass_u {
        return Err(format!("{tag}: mass {mass_u} -> {mass_r}"));
    }
    let l6_u = pl_lp_norm_p(u, 6.0);
    let l6_r = r.lp_norm_p(6.0);
    if (l6_u - l6_r).abs() > 1e-8 * l6_u {
        return Err(format!("{tag}: L6 {l6_u} -> {l6_r}"));
    }
    let vmax = u.max_abs();
    for j in 0..12 {
        let t = vmax * (j as f64 + 0.37) / 12.0;
        let mu_u = measure_above_pl(u, t);
        let mu_r = r.measure_above(t);
        if (mu_u - mu_r).abs() > 1e-8 * (1.0 + mu_u) {
            return Err(format!(
                "{tag}: measure above {t:.4} is {mu_u:.10} on the graph, {mu_r:.10} rearranged"
            ));
        }
    }
    let h = u.mesh().max_spacing();
    let (du, dr) = (u.dirichlet_energy(), r.dirichlet_energy());
    if dr > du * (1.0 + 10.0 * h) {
        return Err(format!("{tag}: Dirichlet rose {du:.6} -> {dr:.6}"));
    }
    Ok(())
}

#[test]
fn acceptance() {
    let mut failures = Vec::new();
    run(
        "criterion 1 (threshold brackets at h = min/64)",
        &mut failures,
        c1_threshold_brackets,
    );
    run(
        "criterion 2 (subcritical existence, p in {3,4,5})",
        &mut failures,
        c2_subcritical_existence,
    );
    run(
        "criterion 3 (constant state exactness)",
        &mut failures,
        c3_constant_state_exactness,
    );
    run(
        "criterion 4 (GN saturation by solitons)",
        &mut failures,
        c4_gn_saturation,
    );
    run(
        "criterion 5 (lambda^2 scaling probe)",
        &mut failures,
        c5_scaling_probe,
    );
    run(
        "criterion 6 (bound state ladder on the loop)",
        &mut failures,
        c6_bound_state_ladder,
    );
    run(
        "criterion 7 (property suites)",
        &mut failures,
        c7_property_suites,
    );
    assert!(
        failures.is_empty(),
        "{} criterion(s) failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
