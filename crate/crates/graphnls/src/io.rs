//! Deterministic serialization of results.
//!
//! Everything here is byte-reproducible: object keys are emitted in a
//! fixed order and every float is written with 17 significant digits
//! (`{:.16e}`), which round-trips f64 exactly. Rerunning a computation
//! with the same inputs therefore produces identical files, so output
//! diffs mean the numbers changed, not the formatting.
//!
//! Functions are exchanged as CSV with columns (edge id, local
//! coordinate, value), one row per mesh node, edges in graph order.
//! Edge ids must not contain commas, quotes, or newlines.

use std::sync::Arc;

use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::gn::{CEstimate, Mode, ThetaResult};
use crate::graph::{MetricGraph, TopologyReport};
use crate::mesh::{GraphFunction, Mesh};
use crate::rearrange::{RearrangedFunction, Rearrangement};
use crate::scan::{PointStatus, ScanResult};
use crate::solve::{
    BoundStateSet, FlowStatus, HistoryEntry, ProbeResult, SolveConfig, SolveOutcome,
};

/// 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered JSON document tree. Keys keep insertion order; non-finite
/// numbers render as null.
#[derive(Debug, Clone)]
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<JsonValue>),
    Obj(Vec<(String, JsonValue)>),
}

fn escape_into(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl JsonValue {
    pub fn opt_num(x: Option<f64>) -> JsonValue {
        match x {
            Some(v) => JsonValue::Num(v),
            None => JsonValue::Null,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            JsonValue::Null => out.push_str("null"),
            JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JsonValue::Int(i) => out.push_str(&i.to_string()),
            JsonValue::Num(x) if x.is_finite() => out.push_str(&fmt_f64(*x)),
            JsonValue::Num(_) => out.push_str("null"),
            JsonValue::Str(s) => escape_into(s, out),
            JsonValue::Arr(items) => {
                out.push('[');
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    v.write(out);
                }
                out.push(']');
            }
            JsonValue::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    escape_into(k, out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }

    /// Single line, no trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }
}

fn obj(fields: Vec<(&str, JsonValue)>) -> JsonValue {
    JsonValue::Obj(
        fields
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    )
}

pub fn mode_str(mode: Mode) -> &'static str {
    match mode {
        Mode::Tip => "tip",
        Mode::NoTip => "no_tip",
    }
}

pub fn status_str(status: FlowStatus) -> &'static str {
    match status {
        FlowStatus::Converged => "converged",
        FlowStatus::DivergedUnbounded => "diverged_unbounded",
        FlowStatus::MaxIters => "max_iters",
    }
}

pub fn point_status_str(status: PointStatus) -> &'static str {
    match status {
        PointStatus::Bounded => "bounded",
        PointStatus::Diverged => "diverged",
        PointStatus::AtThreshold => "at_threshold",
    }
}

pub fn topology_report_value(report: &TopologyReport) -> JsonValue {
    obj(vec![
        ("vertex_count", JsonValue::Int(report.vertex_count as i64)),
        ("edge_count", JsonValue::Int(report.edge_count as i64)),
        ("total_length", JsonValue::Num(report.total_length)),
        (
            "degrees",
            JsonValue::Obj(
                report
                    .degrees
                    .iter()
                    .map(|(v, d)| (v.clone(), JsonValue::Int(*d as i64)))
                    .collect(),
            ),
        ),
        (
            "terminal_edges",
            JsonValue::Arr(
                report
                    .terminal_edges
                    .iter()
                    .map(|e| JsonValue::Str(e.clone()))
                    .collect(),
            ),
        ),
        (
            "has_terminal_edge",
            JsonValue::Bool(report.has_terminal_edge),
        ),
        (
            "shortest_cycle_length",
            JsonValue::opt_num(report.shortest_cycle_length),
        ),
        ("critical_mass", JsonValue::Num(report.critical_mass)),
    ])
}

pub fn energy_report_value(report: &EnergyReport) -> JsonValue {
    obj(vec![
        ("p", JsonValue::Num(report.p)),
        ("mass", JsonValue::Num(report.mass)),
        ("kinetic", JsonValue::Num(report.kinetic)),
        ("lp_norm_p", JsonValue::Num(report.lp_norm_p)),
        ("energy", JsonValue::Num(report.energy)),
        ("lambda", JsonValue::Num(report.lambda)),
        (
            "stationarity_residual",
            JsonValue::Num(report.stationarity_residual),
        ),
        (
            "kirchhoff",
            JsonValue::Obj(
                report
                    .kirchhoff
                    .iter()
                    .map(|(v, r)| (v.clone(), JsonValue::Num(*r)))
                    .collect(),
            ),
        ),
        ("max_kirchhoff", JsonValue::Num(report.max_kirchhoff)),
    ])
}

/// Full solver configuration, for embedding into run outputs so every
/// result file records what produced it. NaN floor renders as null (auto).
pub fn config_value(cfg: &SolveConfig) -> JsonValue {
    obj(vec![
        ("p", JsonValue::Num(cfg.p)),
        ("mass", JsonValue::Num(cfg.mass)),
        ("h", JsonValue::Num(cfg.h)),
        ("dt", JsonValue::Num(cfg.dt)),
        ("tol", JsonValue::Num(cfg.tol)),
        ("max_iters", JsonValue::Int(cfg.max_iters as i64)),
        ("energy_floor", JsonValue::Num(cfg.energy_floor)),
        ("k", JsonValue::Int(cfg.k as i64)),
        ("deflation_power", JsonValue::Num(cfg.deflation_power)),
        ("deflation_shift", JsonValue::Num(cfg.deflation_shift)),
        ("seed", JsonValue::Int(cfg.seed as i64)),
    ])
}

pub fn outcome_json(outcome: &SolveOutcome, cfg: &SolveConfig) -> String {
    obj(vec![
        (
            "status",
            JsonValue::Str(status_str(outcome.status).to_string()),
        ),
        ("iterations", JsonValue::Int(outcome.iterations as i64)),
        (
            "newton_polish_iters",
            JsonValue::Int(outcome.newton_polish_iters as i64),
        ),
        ("seed_label", JsonValue::Str(outcome.seed_label.clone())),
        ("report", energy_report_value(&outcome.report)),
        ("config", config_value(cfg)),
    ])
    .render()
}

pub fn history_csv(history: &[HistoryEntry]) -> String {
    let mut out = String::from("iteration,energy,residual\n");
    for h in history {
        out.push_str(&format!(
            "{},{},{}\n",
            h.iteration,
            fmt_f64(h.energy),
            fmt_f64(h.residual)
        ));
    }
    out
}

pub fn function_csv(u: &GraphFunction) -> String {
    let mesh = u.mesh();
    let graph = mesh.graph();
    let mut out = String::from("edge,x,value\n");
    for (e, ge) in graph.edges().iter().enumerate() {
        let em = &mesh.edge_meshes()[e];
        for i in 0..em.n {
            out.push_str(&format!(
                "{},{},{}\n",
                ge.id,
                fmt_f64(i as f64 * em.h),
                fmt_f64(u.node_value(e, i))
            ));
        }
    }
    out
}

fn format_err(origin: &str, msg: String) -> Error {
    Error::Format {
        file: origin.to_string(),
        msg,
    }
}

/// Rebuild a function from `function_csv` output. Rows must be grouped by
/// edge in graph order with ascending uniform coordinates; shared vertex
/// values must agree across edges.
pub fn read_function_csv(
    graph: &Arc<MetricGraph>,
    text: &str,
    origin: &str,
) -> Result<GraphFunction> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "edge,x,value")) => {}
        _ => {
            return Err(format_err(
                origin,
                "expected header `edge,x,value`".to_string(),
            ))
        }
    }
    let mut rows: Vec<Vec<(f64, f64)>> = vec![Vec::new(); graph.edge_count()];
    let mut current: Option<usize> = None;
    for (lineno, line) in lines {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (id, x, value) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(format_err(
                    origin,
                    format!("line {}: expected 3 comma-separated fields", lineno + 1),
                ))
            }
        };
        let e = graph.edge_index(id).ok_or_else(|| {
            format_err(
                origin,
                format!("line {}: unknown edge id `{id}`", lineno + 1),
            )
        })?;
        if current != Some(e) {
            if !rows[e].is_empty() {
                return Err(format_err(
                    origin,
                    format!(
                        "line {}: edge `{id}` appears in two separate blocks",
                        lineno + 1
                    ),
                ));
            }
            current = Some(e);
        }
        let parse = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| format_err(origin, format!("line {}: bad {what} `{s}`", lineno + 1)))
        };
        rows[e].push((parse(x, "coordinate")?, parse(value, "value")?));
    }

    let mut counts = Vec::with_capacity(graph.edge_count());
    for (e, ge) in graph.edges().iter().enumerate() {
        let n = rows[e].len();
        if n < 2 {
            return Err(format_err(
                origin,
                format!("edge `{}` has {n} rows; need at least 2", ge.id),
            ));
        }
        let h = ge.length / (n - 1) as f64;
        for (i, (x, _)) in rows[e].iter().enumerate() {
            if (x - i as f64 * h).abs() > 1e-9 * (1.0 + ge.length) {
                return Err(format_err(
                    origin,
                    format!(
                        "edge `{}`: coordinate {} is not on the uniform grid with spacing {}",
                        ge.id, x, h
                    ),
                ));
            }
        }
        counts.push(n);
    }

    let mesh = Mesh::with_counts(Arc::clone(graph), &counts)?;
    let mut values = vec![0.0; mesh.ndof()];
    let mut seen = vec![false; mesh.ndof()];
    for e in 0..graph.edge_count() {
        for (i, &(_, v)) in rows[e].iter().enumerate() {
            let dof = mesh.node_dof(e, i);
            if seen[dof] && (values[dof] - v).abs() > 1e-9 * (1.0 + values[dof].abs()) {
                return Err(format_err(
                    origin,
                    format!(
                        "edge `{}`: endpoint value {} disagrees with {} already read for the shared vertex",
                        graph.edges()[e].id,
                        v,
                        values[dof]
                    ),
                ));
            }
            values[dof] = v;
            seen[dof] = true;
        }
    }
    GraphFunction::from_values(&mesh, values)
}

pub fn probe_json(probe: &ProbeResult) -> String {
    obj(vec![
        ("edge", JsonValue::Str(probe.edge.clone())),
        ("mode", JsonValue::Str(mode_str(probe.mode).to_string())),
        ("profile_scale", JsonValue::Num(probe.profile_scale)),
        ("profile_energy", JsonValue::Num(probe.profile_energy)),
        (
            "samples",
            JsonValue::Arr(
                probe
                    .samples
                    .iter()
                    .map(|(l, e)| JsonValue::Arr(vec![JsonValue::Num(*l), JsonValue::Num(*e)]))
                    .collect(),
            ),
        ),
        ("coefficient", JsonValue::Num(probe.coefficient)),
        ("r_squared", JsonValue::Num(probe.r_squared)),
    ])
    .render()
}

pub fn theta_json(theta: &ThetaResult) -> String {
    obj(vec![
        ("mode", JsonValue::Str(mode_str(theta.mode).to_string())),
        ("c", JsonValue::Num(theta.c)),
        ("mass", JsonValue::Num(theta.mass)),
        ("theta_min", JsonValue::opt_num(theta.theta_min)),
        ("rhs_max", JsonValue::Num(theta.rhs_max)),
        ("lp6", JsonValue::Num(theta.lp6)),
    ])
    .render()
}

/// The sampling parameters ride along so the family (and hence the
/// estimate) can be regenerated exactly.
pub fn c_estimate_json(est: &CEstimate, seed: u64, mass_lo: f64, mass_hi: f64) -> String {
    obj(vec![
        ("mode", JsonValue::Str(mode_str(est.mode).to_string())),
        ("c", JsonValue::Num(est.c)),
        ("witness", JsonValue::Int(est.witness as i64)),
        ("family_size", JsonValue::Int(est.family_size as i64)),
        ("seed", JsonValue::Int(seed as i64)),
        (
            "mass_range",
            JsonValue::Arr(vec![JsonValue::Num(mass_lo), JsonValue::Num(mass_hi)]),
        ),
    ])
    .render()
}

pub fn bound_states_json(set: &BoundStateSet, cfg: &SolveConfig) -> String {
    obj(vec![
        ("attempts", JsonValue::Int(set.attempts as i64)),
        (
            "failed_attempts",
            JsonValue::Int(set.failed_attempts as i64),
        ),
        ("duplicates", JsonValue::Int(set.duplicates as i64)),
        (
            "states",
            JsonValue::Arr(
                set.states
                    .iter()
                    .map(|s| {
                        obj(vec![
                            ("energy", JsonValue::Num(s.report.energy)),
                            ("lambda", JsonValue::Num(s.report.lambda)),
                            ("lambda_newton", JsonValue::Num(s.lambda_newton)),
                            (
                                "stationarity_residual",
                                JsonValue::Num(s.report.stationarity_residual),
                            ),
                            ("max_kirchhoff", JsonValue::Num(s.report.max_kirchhoff)),
                            ("mass", JsonValue::Num(s.report.mass)),
                            ("newton_iters", JsonValue::Int(s.newton_iters as i64)),
                            ("seed_label", JsonValue::Str(s.seed_label.clone())),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("config", config_value(cfg)),
    ])
    .render()
}

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = String::from("p,mass,status,energy\n");
    for pt in &result.points {
        let energy = pt.energy.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(result.p),
            fmt_f64(pt.mass),
            point_status_str(pt.status),
            energy
        ));
    }
    out
}

/// Bounded points only, for plotting energy against mass.
pub fn scan_plot_csv(result: &ScanResult) -> String {
    let mut out = String::from("mass,energy\n");
    for pt in &result.points {
        if let Some(e) = pt.energy {
            out.push_str(&format!("{},{}\n", fmt_f64(pt.mass), fmt_f64(e)));
        }
    }
    out
}

pub fn scan_summary_json(result: &ScanResult, resolution: f64, cfg: &SolveConfig) -> String {
    let threshold = match &result.threshold {
        Some(t) => obj(vec![
            ("mu_hat", JsonValue::Num(t.mu_hat)),
            ("lo", JsonValue::Num(t.lo)),
            ("hi", JsonValue::Num(t.hi)),
        ]),
        None => JsonValue::Null,
    };
    obj(vec![
        ("p", JsonValue::Num(result.p)),
        ("mode", JsonValue::Str(mode_str(result.mode).to_string())),
        ("points", JsonValue::Int(result.points.len() as i64)),
        ("resolution", JsonValue::Num(resolution)),
        ("threshold", threshold),
        (
            "flags",
            JsonValue::Arr(
                result
                    .flags
                    .iter()
                    .map(|f| JsonValue::Str(f.clone()))
                    .collect(),
            ),
        ),
        ("config", config_value(cfg)),
    ])
    .render()
}

/// Same column layout as `function_csv`; the profile lives on a single
/// synthetic edge named `rearranged`.
pub fn rearranged_csv(r: &RearrangedFunction) -> String {
    let mut out = String::from("edge,x,value\n");
    for (x, v) in &r.breakpoints {
        out.push_str(&format!("rearranged,{},{}\n", fmt_f64(*x), fmt_f64(*v)));
    }
    out
}

pub fn rearranged_sidecar_json(r: &RearrangedFunction) -> String {
    let (kind, gamma, max_loc, min_loc) = match &r.kind {
        Rearrangement::Decreasing => (
            "decreasing",
            JsonValue::Null,
            JsonValue::Null,
            JsonValue::Null,
        ),
        Rearrangement::TwoSided {
            gamma,
            max_location,
            min_location,
        } => {
            let loc = |l: &(String, f64)| {
                JsonValue::Arr(vec![JsonValue::Str(l.0.clone()), JsonValue::Num(l.1)])
            };
            (
                "two_sided",
                JsonValue::Num(*gamma),
                loc(max_location),
                loc(min_location),
            )
        }
    };
    let (lo, hi) = r.domain();
    obj(vec![
        ("kind", JsonValue::Str(kind.to_string())),
        ("gamma", gamma),
        ("max_location", max_loc),
        ("min_location", min_loc),
        (
            "domain",
            JsonValue::Arr(vec![JsonValue::Num(lo), JsonValue::Num(hi)]),
        ),
        ("breakpoints", JsonValue::Int(r.breakpoints.len() as i64)),
    ])
    .render()
}

pub fn topology_report_json(report: &TopologyReport) -> String {
    topology_report_value(report).render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_report;
    use crate::graph::MetricGraph;
    use crate::mesh::{GraphFunction, Mesh};
    use std::sync::Arc;

    fn tadpole() -> Arc<MetricGraph> {
        Arc::new(
            MetricGraph::build(
                &["v", "w", "t"],
                &[
                    ("c1", "v", "w", 1.0),
                    ("c2", "w", "v", 1.0),
                    ("stem", "v", "t", 1.0),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn floats_roundtrip_exactly() {
        for &x in &[
            0.1 + 0.2,
            1.0 / 3.0,
            std::f64::consts::PI,
            crate::graph::critical_mass_half_line(),
            -1.2345678901234567e-300,
            6.02e23,
            0.0,
        ] {
            let back: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(
                back.to_bits(),
                x.to_bits(),
                "{x} reformatted as {}",
                fmt_f64(x)
            );
        }
    }

    #[test]
    fn json_is_valid_and_key_ordered() {
        let doc = obj(vec![
            ("zeta", JsonValue::Num(1.5)),
            (
                "alpha",
                JsonValue::Arr(vec![JsonValue::Int(1), JsonValue::Null]),
            ),
            ("quote\"in\\key", JsonValue::Str("line\nbreak".to_string())),
            ("nan_is_null", JsonValue::Num(f64::NAN)),
        ]);
        let text = doc.render();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["zeta"], serde_json::json!(1.5));
        assert_eq!(parsed["quote\"in\\key"], serde_json::json!("line\nbreak"));
        assert!(parsed["nan_is_null"].is_null());
        // zeta precedes alpha: insertion order, not alphabetical
        assert!(text.find("zeta").unwrap() < text.find("alpha").unwrap());
    }

    #[test]
    fn function_csv_roundtrips_bitwise() {
        let graph = tadpole();
        let mesh = Mesh::build(Arc::clone(&graph), 0.11).unwrap();
        let u = GraphFunction::from_edge_fn(&mesh, |e, x| (x * (e as f64 + 1.0)).sin() + 0.3);
        let text = function_csv(&u);
        let back = read_function_csv(&graph, &text, "test").unwrap();
        for (a, b) in u.mesh().edge_meshes().iter().zip(back.mesh().edge_meshes()) {
            assert_eq!(a.n, b.n);
        }
        for (a, b) in u.values.iter().zip(&back.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // and the emitted text is stable under a write-read-write cycle
        assert_eq!(text, function_csv(&back));
    }

    #[test]
    fn function_csv_rejects_malformed_input() {
        let graph = tadpole();
        let mesh = Mesh::build(Arc::clone(&graph), 0.5).unwrap();
        let u = GraphFunction::constant(&mesh, 1.0);
        let good = function_csv(&u);

        let cases: Vec<(String, &str)> = vec![
            (good.replace("edge,x,value", "a,b,c"), "header"),
            (good.replace("c1,", "nope,"), "unknown edge"),
            (
                good.replacen("5.0000000000000000e-1", "4.0000000000000000e-1", 1),
                "off-grid coordinate",
            ),
            (
                {
                    // move one stem row up between the cycle blocks
                    let mut lines: Vec<&str> = good.lines().collect();
                    let row = lines.pop().unwrap();
                    lines.insert(2, row);
                    lines.join("\n")
                },
                "split edge block",
            ),
        ];
        for (text, what) in cases {
            assert!(
                read_function_csv(&graph, &text, "test").is_err(),
                "{what} should be rejected"
            );
        }
    }

    #[test]
    fn vertex_disagreement_is_rejected() {
        let graph = tadpole();
        let mesh = Mesh::build(Arc::clone(&graph), 0.5).unwrap();
        let u = GraphFunction::constant(&mesh, 2.0);
        let mut text = function_csv(&u);
        // stem starts at v, shared with both cycle edges; corrupt its first row
        let needle = "stem,0.0000000000000000e0,2.0000000000000000e0";
        assert!(text.contains(needle));
        text = text.replace(needle, "stem,0.0000000000000000e0,2.1000000000000000e0");
        let err = read_function_csv(&graph, &text, "test").unwrap_err();
        assert!(err.to_string().contains("shared vertex"), "{err}");
    }

    #[test]
    fn report_json_parses_with_expected_fields() {
        let graph = tadpole();
        let mesh = Mesh::build(Arc::clone(&graph), 0.25).unwrap();
        let u = GraphFunction::constant(&mesh, 1.0);
        let report = energy_report(&u, 4.0).unwrap();
        let text = energy_report_value(&report).render();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["p"], serde_json::json!(4.0));
        assert!(parsed["kirchhoff"].get("v").is_some());
        assert!(parsed["kirchhoff"].get("t").is_some());

        let topo = graph.topology_report();
        let parsed: serde_json::Value = serde_json::from_str(&topology_report_json(&topo)).unwrap();
        assert_eq!(parsed["degrees"]["v"], serde_json::json!(3));
        assert_eq!(parsed["has_terminal_edge"], serde_json::json!(true));
    }
}
