//! The focusing NLS energy E(u) = 1/2 int |u'|^2 - (1/p) int |u|^p on a
//! metric graph, its Lagrange multiplier, and stationarity diagnostics. All
//! integrals reuse the mesh quadrature so that algebraic identities (e.g.
//! residual orthogonal to u) hold to rounding, not just to O(h^2).

use crate::error::{Error, Result};
use crate::mesh::GraphFunction;

pub fn validate_exponent(p: f64) -> Result<()> {
    if !(p > 2.0 && p <= 6.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    Ok(())
}

pub fn kinetic(u: &GraphFunction) -> f64 {
    0.5 * u.dirichlet_energy()
}

pub fn energy(u: &GraphFunction, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    Ok(0.5 * u.dirichlet_energy() - u.lp_norm_p(p) / p)
}

/// lambda(u) = (int |u|^p - int |u'|^2) / mass. For u solving the stationary
/// equation this is the multiplier; it is defined for any u with mass > 0.
pub fn lambda_of(u: &GraphFunction, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    let m = u.mass();
    if m <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok((u.lp_norm_p(p) - u.dirichlet_energy()) / m)
}

/// Assembled weak residual r = K u - W |u|^{p-2} u + lambda W u with
/// lambda = lambda_of(u). Kirchhoff conditions are natural here: they enter
/// through the vertex rows of K, not as extra equations.
pub fn residual_vector(u: &GraphFunction, p: f64) -> Result<(Vec<f64>, f64)> {
    let lambda = lambda_of(u, p)?;
    let mesh = u.mesh();
    let w = mesh.lumped_weights();
    let mut r = vec![0.0; mesh.ndof()];
    mesh.stiffness_matvec(&u.values, &mut r);
    for i in 0..r.len() {
        let v = u.values[i];
        r[i] += w[i] * v * (lambda - v.abs().powf(p - 2.0));
    }
    Ok((r, lambda))
}

/// Euclidean norm of the residual after projecting out the direction of the
/// discrete mass gradient W u (the tangent-space residual).
pub fn stationarity_residual(u: &GraphFunction, p: f64) -> Result<f64> {
    let (r, _) = residual_vector(u, p)?;
    Ok(projected_norm(&r, u))
}

pub(crate) fn projected_norm(r: &[f64], u: &GraphFunction) -> f64 {
    let w = u.mesh().lumped_weights();
    let mut gg = 0.0;
    let mut rg = 0.0;
    for i in 0..r.len() {
        let g = w[i] * u.values[i];
        gg += g * g;
        rg += r[i] * g;
    }
    let c = if gg > 0.0 { rg / gg } else { 0.0 };
    let mut s = 0.0;
    for i in 0..r.len() {
        let t = r[i] - c * w[i] * u.values[i];
        s += t * t;
    }
    s.sqrt()
}

/// Residual as a function on the mesh (the Riesz representative in the
/// Euclidean DOF product) together with the tangent-space norm.
pub fn residual(u: &GraphFunction, p: f64) -> Result<(GraphFunction, f64)> {
    let (r, _) = residual_vector(u, p)?;
    let norm = projected_norm(&r, u);
    Ok((GraphFunction::from_values(u.mesh(), r)?, norm))
}

/// Signed derivative of u at the `i = 0` end of edge `e`, oriented into the
/// edge; second-order one-sided stencil when three nodes are available.
fn derivative_into_edge(u: &GraphFunction, e: usize, from_start: bool) -> f64 {
    let em = &u.mesh().edge_meshes()[e];
    let n = em.n;
    let v = |i: usize| u.node_value(e, i);
    if from_start {
        if n >= 3 {
            (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * em.h)
        } else {
            (v(1) - v(0)) / em.h
        }
    } else if n >= 3 {
        (-3.0 * v(n - 1) + 4.0 * v(n - 2) - v(n - 3)) / (2.0 * em.h)
    } else {
        (v(n - 2) - v(n - 1)) / em.h
    }
}

/// Per vertex, the signed sum of outgoing derivatives du_e/dx_e(v): u'(0)
/// at a from-end, -u'(len) at a to-end. Zero for exact Kirchhoff states.
pub fn kirchhoff_residual(u: &GraphFunction) -> Vec<(String, f64)> {
    let graph = u.mesh().graph();
    let mut sums = vec![0.0; graph.vertex_count()];
    for (e, ge) in graph.edges().iter().enumerate() {
        sums[ge.from] += derivative_into_edge(u, e, true);
        sums[ge.to] += derivative_into_edge(u, e, false);
    }
    graph.vertices().iter().cloned().zip(sums).collect()
}

/// One-stop diagnostic record for a state.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub p: f64,
    pub mass: f64,
    pub kinetic: f64,
    /// int |u|^p (not yet divided by p).
    pub lp_norm_p: f64,
    pub energy: f64,
    pub lambda: f64,
    pub stationarity_residual: f64,
    pub kirchhoff: Vec<(String, f64)>,
    pub max_kirchhoff: f64,
}

pub fn energy_report(u: &GraphFunction, p: f64) -> Result<EnergyReport> {
    validate_exponent(p)?;
    let mass = u.mass();
    if mass <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let d = u.dirichlet_energy();
    let pp = u.lp_norm_p(p);
    let kirchhoff = kirchhoff_residual(u);
    let max_kirchhoff = kirchhoff.iter().fold(0.0, |m, (_, r)| r.abs().max(m));
    Ok(EnergyReport {
        p,
        mass,
        kinetic: 0.5 * d,
        lp_norm_p: pp,
        energy: 0.5 * d - pp / p,
        lambda: (pp - d) / mass,
        stationarity_residual: stationarity_residual(u, p)?,
        kirchhoff,
        max_kirchhoff,
    })
}
