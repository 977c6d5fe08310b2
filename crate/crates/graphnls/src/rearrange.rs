//! Symmetric rearrangements of nonnegative piecewise-linear functions.
//!
//! The decreasing rearrangement u*(x) = inf { t >= 0 : |{u > t}| <= x } is
//! computed exactly: the distribution function of a P1 function is piecewise
//! linear in t between nodal values, so u* is piecewise linear in x and is
//! represented by its breakpoints, not by resampling. Plateaus of u become
//! flat segments, and a gap in the range (possible when the complement of
//! the two-sided path is disconnected) becomes a jump, which carries
//! infinite Dirichlet energy and is reported as such.
//!
//! The two-sided rearrangement follows the cut construction for graphs
//! without terminal edges: gamma is half the shortest cycle length, the
//! function is split along a path of length gamma leaving the maximum away
//! from the minimum, and the two parts are rearranged monotonically onto
//! [0, gamma] and (gamma - L, 0], glued at the shared maximum.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::mesh::{GraphFunction, Mesh};

/// One linear cell of values: endpoints `a`, `b` over length `len`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    len: f64,
}

impl Piece {
    fn lo(&self) -> f64 {
        self.a.min(self.b)
    }
    fn hi(&self) -> f64 {
        self.a.max(self.b)
    }
    /// Measure of {value > t} inside the piece; right-continuous in t.
    fn measure_above(&self, t: f64) -> f64 {
        let (lo, hi) = (self.lo(), self.hi());
        if t >= hi {
            0.0
        } else if hi > lo {
            self.len * ((hi - t) / (hi - lo)).min(1.0)
        } else {
            // flat piece below the level
            self.len
        }
    }
}

/// Exact integral of value^p over a linear piece with both endpoints >= 0.
fn piece_powp(a: f64, b: f64, len: f64, p: f64) -> f64 {
    if len == 0.0 {
        return 0.0;
    }
    let d = (b - a).abs();
    if d <= 1e-12 * (a.abs() + b.abs()) || d == 0.0 {
        return len * (0.5 * (a + b)).powf(p);
    }
    len * (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a))
}

/// Exact integral of |value|^p over a linear piece of either sign.
fn piece_abs_powp(a: f64, b: f64, len: f64, p: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        piece_powp(a, b, len, p)
    } else if a <= 0.0 && b <= 0.0 {
        piece_powp(-a, -b, len, p)
    } else {
        // sign change: split at the zero crossing
        let s = a / (a - b);
        piece_powp(a.abs(), 0.0, len * s, p) + piece_powp(0.0, b.abs(), len * (1.0 - s), p)
    }
}

/// Exact integral of |u|^p of the piecewise-linear interpolant (contrast
/// with GraphFunction::lp_norm_p, which is the trapezoid rule on nodal
/// values). Rearrangement identities hold exactly for these integrals.
pub fn pl_lp_norm_p(u: &GraphFunction, p: f64) -> f64 {
    let mut total = 0.0;
    u.mesh().for_each_cell(|a, b, h| {
        total += piece_abs_powp(u.values[a], u.values[b], h, p);
    });
    total
}

pub fn pl_mass(u: &GraphFunction) -> f64 {
    pl_lp_norm_p(u, 2.0)
}

#[derive(Debug, Clone)]
pub enum Rearrangement {
    Decreasing,
    TwoSided {
        gamma: f64,
        /// (edge id, arc length) of the chosen maximum point.
        max_location: (String, f64),
        /// (edge id, arc length) of the chosen minimum point.
        min_location: (String, f64),
    },
}

/// A rearranged profile on an interval, stored by breakpoints with
/// non-decreasing x. Decreasing rearrangements live on [0, L]; two-sided
/// ones on [gamma - L, gamma] with the maximum at 0.
#[derive(Debug, Clone)]
pub struct RearrangedFunction {
    pub kind: Rearrangement,
    /// (x, value) with x non-decreasing; equal consecutive x is a jump.
    pub breakpoints: Vec<(f64, f64)>,
}

impl RearrangedFunction {
    pub fn domain(&self) -> (f64, f64) {
        (
            self.breakpoints.first().map(|b| b.0).unwrap_or(0.0),
            self.breakpoints.last().map(|b| b.0).unwrap_or(0.0),
        )
    }

    pub fn total_length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    pub fn value_at(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if x <= bp[0].0 {
            return bp[0].1;
        }
        if x >= bp[bp.len() - 1].0 {
            return bp[bp.len() - 1].1;
        }
        let mut i = match bp.binary_search_by(|probe| probe.0.partial_cmp(&x).unwrap()) {
            Ok(i) => return bp[i].1,
            Err(i) => i - 1,
        };
        while bp[i + 1].0 == bp[i].0 {
            i += 1; // step over a jump marker
        }
        let (x0, v0) = bp[i];
        let (x1, v1) = bp[i + 1];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    pub fn mass(&self) -> f64 {
        self.lp_norm_p(2.0)
    }

    pub fn lp_norm_p(&self, p: f64) -> f64 {
        self.segments()
            .map(|(a, b, len)| piece_abs_powp(a, b, len, p))
            .sum()
    }

    /// Exact Dirichlet integral; infinite if the profile has a jump.
    pub fn dirichlet_energy(&self) -> f64 {
        let mut total = 0.0;
        for (a, b, len) in self.segments() {
            if len == 0.0 {
                if a != b {
                    return f64::INFINITY;
                }
            } else {
                let g = b - a;
                total += g * g / len;
            }
        }
        total
    }

    pub fn measure_above(&self, t: f64) -> f64 {
        self.segments()
            .map(|(a, b, len)| Piece { a, b, len }.measure_above(t))
            .sum()
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .map(|w| (w[0].1, w[1].1, w[1].0 - w[0].0))
    }

    /// Resample onto a single-edge interval graph with uniform spacing.
    pub fn to_graph_function(&self, h_target: f64) -> Result<GraphFunction> {
        let (x0, _) = self.domain();
        let len = self.total_length();
        let graph = Arc::new(MetricGraph::build(
            &["left", "right"],
            &[("interval", "left", "right", len)],
        )?);
        let mesh = Mesh::build(graph, h_target)?;
        Ok(GraphFunction::from_edge_fn(&mesh, |_, x| {
            self.value_at(x0 + x)
        }))
    }
}

/// Breakpoints of the decreasing rearrangement of a set of pieces, on
/// [0, total length]. Values must be >= 0.
fn decreasing_profile(pieces: &[Piece]) -> Vec<(f64, f64)> {
    let total: f64 = pieces.iter().map(|p| p.len).sum();
    let mut levels: Vec<f64> = pieces.iter().flat_map(|p| [p.a, p.b]).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();

    let mut out: Vec<(f64, f64)> = Vec::with_capacity(levels.len() + 2);
    let push = |x: f64, v: f64, out: &mut Vec<(f64, f64)>| {
        if out.last() != Some(&(x, v)) {
            out.push((x, v));
        }
    };
    for &t in &levels {
        let m: f64 = pieces.iter().map(|p| p.measure_above(t)).sum();
        let plateau: f64 = pieces
            .iter()
            .filter(|p| p.a == t && p.b == t)
            .map(|p| p.len)
            .sum();
        push(m.min(total), t, &mut out);
        if plateau > 0.0 {
            push((m + plateau).min(total), t, &mut out);
        }
    }
    // close the profile at the full length with the minimum value
    let vmin = *levels.last().unwrap();
    push(total, vmin, &mut out);
    out
}

fn check_nonnegative(u: &GraphFunction) -> Result<()> {
    if u.values.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeValues);
    }
    Ok(())
}

fn cell_pieces(u: &GraphFunction) -> Vec<Piece> {
    let mut pieces = Vec::new();
    u.mesh().for_each_cell(|a, b, h| {
        pieces.push(Piece {
            a: u.values[a],
            b: u.values[b],
            len: h,
        });
    });
    pieces
}

/// Decreasing rearrangement onto [0, total length].
pub fn decreasing_rearrangement(u: &GraphFunction) -> Result<RearrangedFunction> {
    check_nonnegative(u)?;
    Ok(RearrangedFunction {
        kind: Rearrangement::Decreasing,
        breakpoints: decreasing_profile(&cell_pieces(u)),
    })
}

/// One traversal option out of a mesh node.
#[derive(Debug, Clone, Copy)]
struct Step {
    to: usize,
    len: f64,
    /// (edge index, cell index) identifying the traversed cell.
    cell: (usize, usize),
}

fn node_adjacency(mesh: &Mesh) -> Vec<Vec<Step>> {
    let mut adj = vec![Vec::new(); mesh.ndof()];
    for (e, em) in mesh.edge_meshes().iter().enumerate() {
        for i in 0..em.n - 1 {
            let a = mesh.node_dof(e, i);
            let b = mesh.node_dof(e, i + 1);
            adj[a].push(Step {
                to: b,
                len: em.h,
                cell: (e, i),
            });
            adj[b].push(Step {
                to: a,
                len: em.h,
                cell: (e, i),
            });
        }
    }
    adj
}

/// Dijkstra over mesh nodes; returns (distances, predecessor steps).
fn node_distances(adj: &[Vec<Step>], source: usize) -> (Vec<f64>, Vec<Option<Step>>) {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<Step>> = vec![None; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = None;
        let mut du = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < du {
                du = dist[v];
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        for s in &adj[u] {
            if dist[u] + s.len < dist[s.to] {
                dist[s.to] = dist[u] + s.len;
                pred[s.to] = Some(Step {
                    to: u,
                    len: s.len,
                    cell: s.cell,
                });
            }
        }
    }
    (dist, pred)
}

/// Canonical (edge index, node index) incidence of a DOF: the first edge in
/// edge order that touches it. Deterministic tie-breaking hangs off this.
fn canonical_incidence(mesh: &Mesh, dof: usize) -> (usize, usize) {
    for (e, em) in mesh.edge_meshes().iter().enumerate() {
        for i in 0..em.n {
            if mesh.node_dof(e, i) == dof {
                return (e, i);
            }
        }
    }
    unreachable!("dof {dof} not reachable from any edge");
}

fn location_of(mesh: &Mesh, dof: usize) -> (String, f64) {
    let (e, i) = canonical_incidence(mesh, dof);
    let em = &mesh.edge_meshes()[e];
    (mesh.graph().edges()[e].id.clone(), i as f64 * em.h)
}

/// Two-sided rearrangement for graphs without terminal edges.
pub fn two_sided_rearrangement(u: &GraphFunction) -> Result<RearrangedFunction> {
    let mesh = u.mesh().clone();
    let graph = mesh.graph();
    if graph.has_terminal_edge() {
        return Err(Error::TerminalEdgePresent(
            "the two-sided rearrangement needs minimum degree 2",
        ));
    }
    check_nonnegative(u)?;
    let gamma = 0.5 * graph.shortest_cycle_length()?;

    // Extremal nodes; ties resolved by canonical (edge, node) order.
    let mut order: Vec<usize> = Vec::new();
    for (e, em) in mesh.edge_meshes().iter().enumerate() {
        for i in 0..em.n {
            let d = mesh.node_dof(e, i);
            if !order.contains(&d) {
                order.push(d);
            }
        }
    }
    let vmax = order
        .iter()
        .map(|&d| u.values[d])
        .fold(f64::NEG_INFINITY, f64::max);
    let vmin = order
        .iter()
        .map(|&d| u.values[d])
        .fold(f64::INFINITY, f64::min);
    if vmax == vmin {
        return Err(Error::ConstantFunction(
            "two-sided rearrangement needs a non-constant function",
        ));
    }
    // First maximal node in canonical order.
    let x0 = *order.iter().find(|&&d| u.values[d] == vmax).unwrap();

    let adj = node_adjacency(&mesh);
    let (dist_from_max, pred_from_max) = node_distances(&adj, x0);
    // Nearest minimizer, ties by canonical order.
    let m_star = *order
        .iter()
        .filter(|&&d| u.values[d] == vmin)
        .min_by(|&&a, &&b| dist_from_max[a].partial_cmp(&dist_from_max[b]).unwrap())
        .unwrap();
    let (dist_from_min, _) = node_distances(&adj, m_star);

    // First cell of the shortest path x0 -> m_star: follow predecessors of
    // the Dijkstra run rooted at x0 back from m_star until the step that
    // leaves x0.
    let mut at = m_star;
    let mut sigma_first_cell = None;
    while let Some(step) = pred_from_max[at] {
        if step.to == x0 {
            sigma_first_cell = Some(step.cell);
            break;
        }
        at = step.to;
    }
    let sigma_first_cell =
        sigma_first_cell.expect("minimizer is distinct from the maximum but has no path");

    // Walk of length gamma from x0, never backtracking over the cell just
    // traversed, starting away from the minimum (Sigma's first cell is
    // excluded), greedily maximizing distance from the minimizer.
    let mut taken: HashMap<(usize, usize), ()> = HashMap::new();
    let mut gamma_pieces: Vec<Piece> = Vec::new();
    let mut partials: Vec<Piece> = Vec::new();
    let mut here = x0;
    let mut budget = gamma;
    let mut last_cell = Some(sigma_first_cell);
    let cell_count: usize = mesh.edge_meshes().iter().map(|em| em.n - 1).sum();
    let mut steps = 0usize;
    while budget > 1e-14 * gamma {
        steps += 1;
        assert!(
            steps <= 2 * cell_count + 2,
            "two-sided walk failed to terminate"
        );
        let step = adj[here]
            .iter()
            .filter(|s| Some(s.cell) != last_cell)
            .max_by(|p, q| {
                dist_from_min[p.to]
                    .partial_cmp(&dist_from_min[q.to])
                    .unwrap()
            })
            .copied()
            .expect("no terminal edges, so the walk can always continue");
        // max_by keeps the last of equals; prefer the first in adjacency
        // order (lowest edge id) instead.
        let step = *adj[here]
            .iter()
            .filter(|s| Some(s.cell) != last_cell)
            .find(|s| dist_from_min[s.to] == dist_from_min[step.to])
            .unwrap();
        debug_assert!(
            !taken.contains_key(&step.cell),
            "walk of length half the girth revisited a cell"
        );
        let va = u.values[here];
        let vb = u.values[step.to];
        if step.len <= budget {
            gamma_pieces.push(Piece {
                a: va,
                b: vb,
                len: step.len,
            });
            taken.insert(step.cell, ());
            budget -= step.len;
            last_cell = Some(step.cell);
            here = step.to;
        } else {
            let s = budget / step.len;
            let v_cut = va + (vb - va) * s;
            gamma_pieces.push(Piece {
                a: va,
                b: v_cut,
                len: budget,
            });
            partials.push(Piece {
                a: v_cut,
                b: vb,
                len: step.len - budget,
            });
            // the remainder is already accounted for; keep the complement
            // loop from re-adding the whole cell
            taken.insert(step.cell, ());
            budget = 0.0;
        }
    }

    // Complement: every cell not fully taken, plus the partial remainder.
    let mut rest_pieces = partials;
    for (e, em) in mesh.edge_meshes().iter().enumerate() {
        for i in 0..em.n - 1 {
            if !taken.contains_key(&(e, i)) {
                rest_pieces.push(Piece {
                    a: u.values[mesh.node_dof(e, i)],
                    b: u.values[mesh.node_dof(e, i + 1)],
                    len: em.h,
                });
            }
        }
    }

    let right = decreasing_profile(&gamma_pieces);
    let left = decreasing_profile(&rest_pieces);

    // Reflect the complement profile onto [gamma - total, 0] and glue.
    let mut breakpoints: Vec<(f64, f64)> = left.iter().rev().map(|&(x, v)| (-x, v)).collect();
    debug_assert_eq!(breakpoints.last().map(|b| b.0), Some(0.0));
    for &(x, v) in &right {
        if breakpoints.last() != Some(&(x, v)) {
            breakpoints.push((x, v));
        }
    }
    Ok(RearrangedFunction {
        kind: Rearrangement::TwoSided {
            gamma,
            max_location: location_of(&mesh, x0),
            min_location: location_of(&mesh, m_star),
        },
        breakpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MetricGraph;
    use crate::mesh::Mesh;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn interval_mesh(len: f64, h: f64) -> Arc<Mesh> {
        let g = Arc::new(MetricGraph::build(&["a", "b"], &[("e1", "a", "b", len)]).unwrap());
        Mesh::build(g, h).unwrap()
    }

    #[test]
    fn tent_function_oracle() {
        // u = 1 - |x - 1| on [0, 2]; u* = 1 - x/2, |u*'|^2 integral = 1/2.
        let mesh = interval_mesh(2.0, 0.01);
        let u = GraphFunction::from_edge_fn(&mesh, |_, x| 1.0 - (x - 1.0).abs());
        let star = decreasing_rearrangement(&u).unwrap();
        for x in [0.0, 0.31, 1.0, 1.57, 2.0] {
            assert_relative_eq!(star.value_at(x), 1.0 - x / 2.0, epsilon = 1e-12);
        }
        assert_relative_eq!(star.dirichlet_energy(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(u.dirichlet_energy(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(star.mass(), pl_mass(&u), max_relative = 1e-13);
        assert_relative_eq!(
            star.lp_norm_p(6.0),
            pl_lp_norm_p(&u, 6.0),
            max_relative = 1e-13
        );
    }

    #[test]
    fn plateau_becomes_a_flat_segment() {
        let mesh = interval_mesh(2.0, 0.025);
        let u = GraphFunction::from_edge_fn(&mesh, |_, x| x.min(0.5).min(2.0 - x));
        let star = decreasing_rearrangement(&u).unwrap();
        assert_relative_eq!(star.value_at(0.0), 0.5, epsilon = 1e-13);
        assert_relative_eq!(star.value_at(0.99), 0.5, epsilon = 1e-13);
        assert_relative_eq!(star.value_at(1.5), 0.25, epsilon = 1e-13);
        assert_relative_eq!(star.value_at(2.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(star.mass(), pl_mass(&u), max_relative = 1e-13);
    }

    #[test]
    fn rearrangement_rejects_negative_values() {
        let mesh = interval_mesh(1.0, 0.1);
        let u = GraphFunction::from_edge_fn(&mesh, |_, x| x - 0.5);
        assert!(matches!(
            decreasing_rearrangement(&u),
            Err(Error::NegativeValues)
        ));
        assert!(decreasing_rearrangement(&u.abs()).is_ok());
    }

    #[test]
    fn two_sided_needs_no_terminal_edge_and_nonconstant() {
        let star_graph = Arc::new(
            MetricGraph::build(
                &["c", "x", "y"],
                &[("e1", "c", "x", 1.0), ("e2", "c", "y", 1.0)],
            )
            .unwrap(),
        );
        let mesh = Mesh::build(star_graph, 0.1).unwrap();
        let u = GraphFunction::constant(&mesh, 1.0);
        assert!(matches!(
            two_sided_rearrangement(&u),
            Err(Error::TerminalEdgePresent(_))
        ));

        let loop_graph = Arc::new(MetricGraph::build(&["v"], &[("loop", "v", "v", 2.0)]).unwrap());
        let mesh = Mesh::build(loop_graph, 0.1).unwrap();
        let c = GraphFunction::constant(&mesh, 1.0);
        assert!(matches!(
            two_sided_rearrangement(&c),
            Err(Error::ConstantFunction(_))
        ));
    }

    #[test]
    fn loop_example_splits_evenly() {
        // u = sin^2(pi x / 2) + 0.1 on a loop of length 2: gamma = 1 and the
        // profile is cos^2(pi x / 2) + 0.1 on [-1, 1].
        let g = Arc::new(MetricGraph::build(&["v"], &[("loop", "v", "v", 2.0)]).unwrap());
        let mesh = Mesh::build(g, 2.0 / 64.0).unwrap();
        let u = GraphFunction::from_edge_fn(&mesh, |_, x| (PI * x / 2.0).sin().powi(2) + 0.1);
        let phi = two_sided_rearrangement(&u).unwrap();
        let Rearrangement::TwoSided { gamma, .. } = &phi.kind else {
            panic!("wrong kind");
        };
        assert_relative_eq!(*gamma, 1.0, epsilon = 1e-13);
        let (lo, hi) = phi.domain();
        assert_relative_eq!(lo, -1.0, epsilon = 1e-13);
        assert_relative_eq!(hi, 1.0, epsilon = 1e-13);
        for k in 0..=64 {
            let x = -1.0 + 2.0 * k as f64 / 64.0;
            assert_relative_eq!(
                phi.value_at(x),
                (PI * x / 2.0).cos().powi(2) + 0.1,
                epsilon = 1e-12
            );
        }
        assert_relative_eq!(phi.mass(), pl_mass(&u), max_relative = 1e-12);
        assert!(phi.dirichlet_energy() <= u.dirichlet_energy() * (1.0 + 1e-10));
    }

    #[test]
    fn idempotence_on_the_sampled_profile() {
        let mesh = interval_mesh(2.0, 0.02);
        let u = GraphFunction::from_edge_fn(&mesh, |_, x| {
            (1.3 * x).sin().abs() + 0.2 * (5.0 * x).cos().abs()
        });
        let star = decreasing_rearrangement(&u).unwrap();
        let resampled = star.to_graph_function(0.02).unwrap();
        let again = decreasing_rearrangement(&resampled).unwrap();
        let n = 101;
        let len = star.total_length();
        for k in 0..n {
            let x = len * k as f64 / (n - 1) as f64;
            assert_relative_eq!(again.value_at(x), resampled.value_at(0, x), epsilon = 1e-12);
        }
    }

    #[test]
    fn equimeasurability_on_a_theta_graph() {
        let g = Arc::new(
            MetricGraph::build(
                &["a", "b"],
                &[
                    ("e1", "a", "b", 1.0),
                    ("e2", "a", "b", 1.5),
                    ("e3", "a", "b", 2.0),
                ],
            )
            .unwrap(),
        );
        let mesh = Mesh::build(g, 0.02).unwrap();
        let u = GraphFunction::from_edge_fn(&mesh, |e, x| {
            let e = e as f64;
            (1.1 + e * 0.7 + (2.0 + e) * x).sin().abs() + 0.05 * e
        });
        let star = decreasing_rearrangement(&u).unwrap();
        let phi = two_sided_rearrangement(&u).unwrap();
        let vmax = u.values.iter().cloned().fold(0.0f64, f64::max);
        for k in 0..20 {
            let t = vmax * k as f64 / 20.0;
            let mu = {
                let mut m = 0.0;
                u.mesh().for_each_cell(|a, b, h| {
                    m += Piece {
                        a: u.values[a],
                        b: u.values[b],
                        len: h,
                    }
                    .measure_above(t)
                });
                m
            };
            assert_relative_eq!(star.measure_above(t), mu, epsilon = 1e-10);
            assert_relative_eq!(phi.measure_above(t), mu, epsilon = 1e-10);
        }
        // Polya-Szego both ways, exact arithmetic up to rounding.
        assert!(star.dirichlet_energy() <= u.dirichlet_energy() * (1.0 + 1e-10));
        assert!(phi.dirichlet_energy() <= u.dirichlet_energy() * (1.0 + 1e-10));
        // Mass and L6 preservation.
        assert_relative_eq!(star.mass(), pl_mass(&u), max_relative = 1e-12);
        assert_relative_eq!(phi.mass(), pl_mass(&u), max_relative = 1e-12);
        assert_relative_eq!(
            star.lp_norm_p(6.0),
            pl_lp_norm_p(&u, 6.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            phi.lp_norm_p(6.0),
            pl_lp_norm_p(&u, 6.0),
            max_relative = 1e-12
        );
    }
}
