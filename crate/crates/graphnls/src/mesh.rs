//! Per-edge uniform P1 discretization with shared vertex DOFs (continuity
//! across vertices is built into the numbering) and trapezoid quadrature,
//! i.e. a lumped mass matrix. The Dirichlet integral of the interpolant is
//! computed exactly.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

#[derive(Debug, Clone)]
pub struct EdgeMesh {
    /// Node count along the edge, endpoints included. At least 2; at least 3
    /// on self-loops, where both endpoints are the same DOF.
    pub n: usize,
    pub h: f64,
    interior_offset: usize,
}

#[derive(Debug)]
pub struct Mesh {
    graph: Arc<MetricGraph>,
    edges: Vec<EdgeMesh>,
    lumped: Vec<f64>,
    ndof: usize,
}

impl Mesh {
    /// Default spacing target: min edge length / 16.
    pub fn default_spacing(graph: &MetricGraph) -> f64 {
        graph
            .edges()
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
            / 16.0
    }

    pub fn build(graph: Arc<MetricGraph>, h_target: f64) -> Result<Arc<Mesh>> {
        if !h_target.is_finite() || h_target <= 0.0 {
            return Err(Error::BadMeshSpacing(h_target));
        }
        let counts: Vec<usize> = graph
            .edges()
            .iter()
            .map(|e| {
                let floor = if e.is_self_loop() { 3 } else { 2 };
                ((e.length / h_target).ceil() as usize + 1).max(floor)
            })
            .collect();
        Self::with_counts(graph, &counts)
    }

    /// Build with an explicit node count per edge (endpoints included), as
    /// when reconstructing the mesh a serialized function was sampled on.
    pub fn with_counts(graph: Arc<MetricGraph>, counts: &[usize]) -> Result<Arc<Mesh>> {
        if counts.len() != graph.edge_count() {
            return Err(Error::MeshMismatch);
        }
        let nv = graph.vertex_count();
        let mut edges = Vec::with_capacity(graph.edge_count());
        let mut next = nv;
        for (e, &n) in graph.edges().iter().zip(counts) {
            let floor = if e.is_self_loop() { 3 } else { 2 };
            if n < floor {
                return Err(Error::MeshMismatch);
            }
            edges.push(EdgeMesh {
                n,
                h: e.length / (n - 1) as f64,
                interior_offset: next,
            });
            next += n - 2;
        }
        let mut mesh = Mesh {
            graph,
            edges,
            lumped: Vec::new(),
            ndof: next,
        };
        let mut w = vec![0.0; next];
        mesh.for_each_cell(|a, b, h| {
            w[a] += 0.5 * h;
            w[b] += 0.5 * h;
        });
        mesh.lumped = w;
        Ok(Arc::new(mesh))
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn edge_meshes(&self) -> &[EdgeMesh] {
        &self.edges
    }

    /// Largest cell size over all edges.
    pub fn max_spacing(&self) -> f64 {
        self.edges.iter().map(|e| e.h).fold(0.0, f64::max)
    }

    /// Global DOF of node `i` on edge `e`; endpoints map to vertex DOFs.
    pub fn node_dof(&self, e: usize, i: usize) -> usize {
        let em = &self.edges[e];
        let ge = &self.graph.edges()[e];
        if i == 0 {
            ge.from
        } else if i == em.n - 1 {
            ge.to
        } else {
            em.interior_offset + i - 1
        }
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    /// Trapezoid weights, one per DOF. Positive on connected meshes.
    pub fn lumped_weights(&self) -> &[f64] {
        &self.lumped
    }

    pub fn for_each_cell(&self, mut f: impl FnMut(usize, usize, f64)) {
        for e in 0..self.edges.len() {
            let em = &self.edges[e];
            for i in 0..em.n - 1 {
                f(self.node_dof(e, i), self.node_dof(e, i + 1), em.h);
            }
        }
    }

    /// Dense P1 stiffness matrix (cell contribution [[1,-1],[-1,1]]/h).
    pub fn stiffness_dense(&self) -> DMatrix<f64> {
        let n = self.ndof;
        let mut k = DMatrix::zeros(n, n);
        self.for_each_cell(|a, b, h| {
            let w = 1.0 / h;
            k[(a, a)] += w;
            k[(b, b)] += w;
            k[(a, b)] -= w;
            k[(b, a)] -= w;
        });
        k
    }

    /// y = K u without materializing K.
    pub fn stiffness_matvec(&self, u: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.for_each_cell(|a, b, h| {
            let g = (u[b] - u[a]) / h;
            y[a] -= g;
            y[b] += g;
        });
    }

    pub fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
        Arc::ptr_eq(a, b)
    }
}

/// Nodal values of a continuous piecewise-linear function on a mesh.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    mesh: Arc<Mesh>,
    pub values: Vec<f64>,
}

impl GraphFunction {
    pub fn zeros(mesh: &Arc<Mesh>) -> Self {
        GraphFunction {
            mesh: mesh.clone(),
            values: vec![0.0; mesh.ndof()],
        }
    }

    pub fn constant(mesh: &Arc<Mesh>, c: f64) -> Self {
        GraphFunction {
            mesh: mesh.clone(),
            values: vec![c; mesh.ndof()],
        }
    }

    pub fn from_values(mesh: &Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.ndof() {
            return Err(Error::MeshMismatch);
        }
        Ok(GraphFunction {
            mesh: mesh.clone(),
            values,
        })
    }

    /// Sample `f(edge index, arc length)` at every node. The function is
    /// assumed consistent where edges meet; the last edge writing a vertex
    /// node wins.
    pub fn from_edge_fn(mesh: &Arc<Mesh>, f: impl Fn(usize, f64) -> f64) -> Self {
        let mut u = Self::zeros(mesh);
        for (e, em) in mesh.edge_meshes().iter().enumerate() {
            for i in 0..em.n {
                u.values[mesh.node_dof(e, i)] = f(e, i as f64 * em.h);
            }
        }
        u
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn node_value(&self, e: usize, i: usize) -> f64 {
        self.values[self.mesh.node_dof(e, i)]
    }

    /// Linear interpolation along edge `e` at arc length `x`.
    pub fn value_at(&self, e: usize, x: f64) -> f64 {
        let em = &self.mesh.edge_meshes()[e];
        let s = (x / em.h).clamp(0.0, (em.n - 1) as f64);
        let i = (s.floor() as usize).min(em.n - 2);
        let t = s - i as f64;
        self.node_value(e, i) * (1.0 - t) + self.node_value(e, i + 1) * t
    }

    /// Trapezoid integral of u^2.
    pub fn mass(&self) -> f64 {
        let w = self.mesh.lumped_weights();
        self.values.iter().zip(w).map(|(v, w)| w * v * v).sum()
    }

    /// Trapezoid integral of |u|^p.
    pub fn lp_norm_p(&self, p: f64) -> f64 {
        let w = self.mesh.lumped_weights();
        self.values
            .iter()
            .zip(w)
            .map(|(v, w)| w * v.abs().powf(p))
            .sum()
    }

    /// Exact Dirichlet integral of the interpolant: sum of (du/h)^2 h.
    pub fn dirichlet_energy(&self) -> f64 {
        let mut d = 0.0;
        self.mesh.for_each_cell(|a, b, h| {
            let g = self.values[b] - self.values[a];
            d += g * g / h;
        });
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| v.abs().max(m))
    }

    pub fn abs(&self) -> Self {
        GraphFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Rescale to the given mass. Errors on the zero function.
    pub fn renormalize_mass(&mut self, mass: f64) -> Result<()> {
        let m = self.mass();
        if m <= 0.0 || !m.is_finite() {
            return Err(Error::ZeroMass);
        }
        let s = (mass / m).sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }

    /// Weighted inner product sum w_i a_i b_i (the discrete L2 pairing).
    pub fn dot_l2(&self, other: &GraphFunction) -> f64 {
        let w = self.mesh.lumped_weights();
        self.values
            .iter()
            .zip(&other.values)
            .zip(w)
            .map(|((a, b), w)| w * a * b)
            .sum()
    }
}
