//! Gagliardo-Nirenberg diagnostics.
//!
//! Compact-graph form: int |u|^p <= K ||u||_2^{p/2+1} ||u||_{H^1}^{p/2-1};
//! any admissible u gives a lower bound on the optimal K, and a family
//! supremum is the working estimate. Critical line form (p = 6):
//! int u^6 <= K ||u||_2^4 ||u'||_2^2 with K = 3/mass^2 at the critical mass.
//!
//! The modified critical inequality trades mass against kinetic term:
//! int u^6 <= 3 ((mu - theta)/mu_*)^2 ||u'||^2 + C sqrt(theta) for some
//! theta in [0, mu], where mu_* is the half-line or line critical mass and
//! C depends only on the graph. theta_min finds the smallest admissible
//! theta; estimate_c finds the smallest C that serves a whole sample family.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::validate_exponent;
use crate::error::{Error, Result};
use crate::graph::{critical_mass_half_line, critical_mass_line};
use crate::mesh::{GraphFunction, Mesh};

const THETA_GRID: usize = 2048;
const THETA_ABS_TOL: f64 = 1e-10; // times mass
const C_REL_TOL: f64 = 1e-6;

/// Which critical mass anchors the modified inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Graph with a terminal edge: mu_* = sqrt(3) pi / 4.
    Tip,
    /// No terminal edge: mu_* = sqrt(3) pi / 2.
    NoTip,
}

impl Mode {
    pub fn critical_mass(self) -> f64 {
        match self {
            Mode::Tip => critical_mass_half_line(),
            Mode::NoTip => critical_mass_line(),
        }
    }

    pub fn for_graph(graph: &crate::graph::MetricGraph) -> Mode {
        if graph.has_terminal_edge() {
            Mode::Tip
        } else {
            Mode::NoTip
        }
    }
}

/// Ratio int|u|^p / (||u||_2^{p/2+1} ||u||_{H^1}^{p/2-1}); a lower bound on
/// the compact GN constant of the graph.
pub fn gn_ratio_compact(u: &GraphFunction, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    let m = u.mass();
    if m <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let d = u.dirichlet_energy();
    let num = u.lp_norm_p(p);
    Ok(num / (m.powf(p / 4.0 + 0.5) * (m + d).powf((p - 2.0) / 4.0)))
}

/// Ratio int u^6 / (||u||_2^4 ||u'||_2^2); undefined on constants.
pub fn gn_ratio_critical(u: &GraphFunction) -> Result<f64> {
    let m = u.mass();
    if m <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let d = u.dirichlet_energy();
    if d == 0.0 {
        return Err(Error::ConstantFunction(
            "critical GN ratio divides by the Dirichlet integral",
        ));
    }
    Ok(u.lp_norm_p(6.0) / (m * m * d))
}

/// Same ratio from explicit integrals (used for rearranged profiles).
pub fn gn_ratio_critical_parts(mass: f64, lp6: f64, dirichlet: f64) -> Result<f64> {
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    if dirichlet == 0.0 {
        return Err(Error::ConstantFunction(
            "critical GN ratio divides by the Dirichlet integral",
        ));
    }
    Ok(lp6 / (mass * mass * dirichlet))
}

#[derive(Debug, Clone)]
pub struct ThetaResult {
    pub mode: Mode,
    pub c: f64,
    pub mass: f64,
    /// Smallest admissible theta, None when even the best theta fails.
    pub theta_min: Option<f64>,
    /// Largest value of the right-hand side over theta in [0, mass].
    pub rhs_max: f64,
    /// int u^6 that the right-hand side has to dominate.
    pub lp6: f64,
}

fn theta_rhs(theta: f64, mass: f64, dirichlet: f64, c: f64, mu_star: f64) -> f64 {
    let r = (mass - theta) / mu_star;
    3.0 * r * r * dirichlet + c * theta.sqrt()
}

fn rhs_max(mass: f64, dirichlet: f64, c: f64, mu_star: f64) -> f64 {
    // RHS = a (mu - theta)^2 + C sqrt(theta) has at most two interior
    // critical points; a grid scan plus local refinement is exact enough.
    let mut best = f64::NEG_INFINITY;
    let mut best_i = 0;
    for i in 0..=THETA_GRID {
        let theta = mass * i as f64 / THETA_GRID as f64;
        let v = theta_rhs(theta, mass, dirichlet, c, mu_star);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section polish around the best grid point
    let mut lo = mass * best_i.saturating_sub(1) as f64 / THETA_GRID as f64;
    let mut hi = mass * (best_i + 1).min(THETA_GRID) as f64 / THETA_GRID as f64;
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if theta_rhs(m1, mass, dirichlet, c, mu_star) >= theta_rhs(m2, mass, dirichlet, c, mu_star)
        {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(theta_rhs(0.5 * (lo + hi), mass, dirichlet, c, mu_star))
}

/// Smallest theta in [0, mass] satisfying the modified inequality for the
/// given C, to absolute tolerance 1e-10 * mass.
pub fn theta_min(u: &GraphFunction, c: f64, mode: Mode) -> Result<ThetaResult> {
    // c = 0 is allowed: the inequality then only has a chance at theta = 0.
    if !c.is_finite() || c < 0.0 {
        return Err(Error::BadConstant(c));
    }
    let mass = u.mass();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let mu_star = mode.critical_mass();
    if mass > mu_star * (1.0 + 1e-12) {
        return Err(Error::MassAboveBound {
            mass,
            bound: mu_star,
        });
    }
    let d = u.dirichlet_energy();
    let lp6 = u.lp_norm_p(6.0);
    let f = |theta: f64| theta_rhs(theta, mass, d, c, mu_star) - lp6;

    let max = rhs_max(mass, d, c, mu_star);
    let mut result = ThetaResult {
        mode,
        c,
        mass,
        theta_min: None,
        rhs_max: max,
        lp6,
    };
    if max < lp6 {
        return Ok(result);
    }
    if f(0.0) >= 0.0 {
        result.theta_min = Some(0.0);
        return Ok(result);
    }
    // First sign change on the grid, then bisect. f has at most three
    // roots, so this grid cannot skip the first feasible interval.
    let mut prev = 0.0;
    for i in 1..=THETA_GRID {
        let theta = mass * i as f64 / THETA_GRID as f64;
        if f(theta) >= 0.0 {
            let (mut lo, mut hi) = (prev, theta);
            while hi - lo > THETA_ABS_TOL * mass {
                let mid = 0.5 * (lo + hi);
                if f(mid) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            result.theta_min = Some(hi);
            return Ok(result);
        }
        prev = theta;
    }
    // Numerically possible when max barely clears lp6 between grid points.
    Ok(result)
}

#[derive(Debug, Clone)]
pub struct CEstimate {
    pub mode: Mode,
    pub c: f64,
    /// Index of the family member that forces the estimate.
    pub witness: usize,
    pub family_size: usize,
}

/// Smallest C (1e-6 relative) such that every family member admits a
/// feasible theta, found by per-member bisection; the witness is the member
/// whose requirement binds.
pub fn estimate_c_over(family: &[GraphFunction], mode: Mode) -> Result<CEstimate> {
    if family.is_empty() {
        return Err(Error::BadMassGrid);
    }
    let mu_star = mode.critical_mass();
    let mut c_best = 0.0;
    let mut witness = 0;
    for (i, u) in family.iter().enumerate() {
        let mass = u.mass();
        if mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        if mass > mu_star * (1.0 + 1e-12) {
            return Err(Error::MassAboveBound {
                mass,
                bound: mu_star,
            });
        }
        let d = u.dirichlet_energy();
        let lp6 = u.lp_norm_p(6.0);
        let feasible = |c: f64| rhs_max(mass, d, c, mu_star) >= lp6;
        let c_u = if feasible(0.0) || lp6 <= 3.0 * (mass / mu_star).powi(2) * d {
            0.0
        } else {
            let mut hi = 1.0;
            while !feasible(hi) {
                hi *= 2.0;
                if hi > 1e150 {
                    return Err(Error::BadConstant(hi));
                }
            }
            let mut lo = 0.0;
            while hi - lo > C_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        if c_u > c_best {
            c_best = c_u;
            witness = i;
        }
    }
    Ok(CEstimate {
        mode,
        c: c_best,
        witness,
        family_size: family.len(),
    })
}

/// Deterministic pseudo-random sample family: truncated Fourier series per
/// edge (modes up to 6, 1/(1+k) decay), vertex values averaged across
/// incident edge ends, then rescaled to a mass drawn from
/// [mass_lo, mass_hi]. Sample i only depends on (seed, i), so enlarging the
/// family keeps earlier members.
pub fn random_family(
    mesh: &Arc<Mesh>,
    seed: u64,
    count: usize,
    mass_lo: f64,
    mass_hi: f64,
) -> Result<Vec<GraphFunction>> {
    if !(mass_lo > 0.0 && mass_hi >= mass_lo) {
        return Err(Error::BadMass(mass_lo));
    }
    let mut family = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let graph = mesh.graph().clone();
        let mut coeffs = Vec::with_capacity(graph.edge_count());
        for _ in 0..graph.edge_count() {
            let a0: f64 = rng.gen_range(-1.0..1.0);
            let mut ab = Vec::with_capacity(6);
            for k in 1..=6usize {
                let scale = 1.0 / (1.0 + k as f64);
                ab.push((rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)));
            }
            coeffs.push((a0, ab));
        }
        let mass = rng.gen_range(mass_lo..=mass_hi);

        // raw per-incidence samples, then average shared vertex DOFs
        let mut sums = vec![0.0; mesh.ndof()];
        let mut hits = vec![0usize; mesh.ndof()];
        for (e, em) in mesh.edge_meshes().iter().enumerate() {
            let len = graph.edges()[e].length;
            let (a0, ab) = &coeffs[e];
            for j in 0..em.n {
                let x = j as f64 * em.h;
                let mut v = *a0;
                for (k, (a, b)) in ab.iter().enumerate() {
                    let w = (k + 1) as f64 * std::f64::consts::PI * x / len;
                    v += a * w.cos() + b * w.sin();
                }
                let dof = mesh.node_dof(e, j);
                sums[dof] += v;
                hits[dof] += 1;
            }
        }
        let values: Vec<f64> = sums
            .iter()
            .zip(&hits)
            .map(|(s, &n)| s / n.max(1) as f64)
            .collect();
        let mut u = GraphFunction::from_values(mesh, values)?;
        u.renormalize_mass(mass)?;
        family.push(u);
    }
    Ok(family)
}

/// Working estimate of the compact GN constant: the family supremum of
/// gn_ratio_compact, with the index attaining it.
pub fn estimate_k_compact(family: &[GraphFunction], p: f64) -> Result<(f64, usize)> {
    if family.is_empty() {
        return Err(Error::BadMassGrid);
    }
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, u) in family.iter().enumerate() {
        let r = gn_ratio_compact(u, p)?;
        if r > best {
            best = r;
            arg = i;
        }
    }
    Ok((best, arg))
}

/// Constants (C1, C2) of the subcritical coercivity bound
/// E >= 1/2 ||u'||^2 (1 - C1 mu^{p/4+1/2} ||u'||^{p/2-3}) - C2 mu^{p/2}
/// induced by a compact GN constant K via (a+b)^q <= a^q + b^q, q <= 1.
pub fn subcritical_bound_constants(k_compact: f64, p: f64) -> (f64, f64) {
    (2.0 * k_compact / p, k_compact / p)
}
