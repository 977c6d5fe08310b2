//! Compact metric graphs: finitely many vertices joined by edges of positive
//! finite length. Multi-edges and self-loops are allowed; a self-loop adds 2
//! to the degree of its vertex. Every graph is validated to be connected.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Critical mass for the focusing quintic problem on the half line.
pub fn critical_mass_half_line() -> f64 {
    3.0_f64.sqrt() * PI / 4.0
}

/// Critical mass for the focusing quintic problem on the line.
pub fn critical_mass_line() -> f64 {
    3.0_f64.sqrt() * PI / 2.0
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    degrees: Vec<usize>,
}

#[derive(Deserialize)]
struct GraphDocument {
    vertices: Vec<String>,
    edges: Vec<EdgeDocument>,
}

#[derive(Deserialize)]
struct EdgeDocument {
    id: String,
    from: String,
    to: String,
    length: f64,
}

/// Everything the topology determines before any PDE enters: degrees,
/// terminal edges, metric girth, and the p = 6 critical mass.
#[derive(Debug, Clone)]
pub struct TopologyReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub total_length: f64,
    /// (vertex id, degree), in vertex order.
    pub degrees: Vec<(String, usize)>,
    pub terminal_edges: Vec<String>,
    pub has_terminal_edge: bool,
    pub shortest_cycle_length: Option<f64>,
    /// sqrt(3)pi/4 with a terminal edge, sqrt(3)pi/2 without.
    pub critical_mass: f64,
}

impl MetricGraph {
    /// Build from explicit lists. `edges` rows are (id, from, to, length).
    pub fn build(vertices: &[&str], edges: &[(&str, &str, &str, f64)]) -> Result<Self> {
        let vertices: Vec<String> = vertices.iter().map(|s| s.to_string()).collect();
        let mut index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let mut out = Vec::with_capacity(edges.len());
        let mut seen = HashMap::new();
        for (id, from, to, length) in edges {
            if seen.insert(id.to_string(), ()).is_some() {
                return Err(Error::DuplicateEdge(id.to_string()));
            }
            let lookup = |v: &str| {
                index.get(v).copied().ok_or_else(|| Error::UnknownVertex {
                    edge: id.to_string(),
                    vertex: v.to_string(),
                })
            };
            if !length.is_finite() || *length <= 0.0 {
                return Err(Error::BadEdgeLength {
                    edge: id.to_string(),
                    length: *length,
                });
            }
            out.push(Edge {
                id: id.to_string(),
                from: lookup(from)?,
                to: lookup(to)?,
                length: *length,
            });
        }
        Self::finish(vertices, out)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        let edges: Vec<(&str, &str, &str, f64)> = doc
            .edges
            .iter()
            .map(|e| (e.id.as_str(), e.from.as_str(), e.to.as_str(), e.length))
            .collect();
        let vertices: Vec<&str> = doc.vertices.iter().map(|s| s.as_str()).collect();
        Self::build(&vertices, &edges)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    fn finish(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut degrees = vec![0usize; vertices.len()];
        for e in &edges {
            degrees[e.from] += 1;
            degrees[e.to] += 1; // a self-loop contributes twice to its vertex
        }
        let g = MetricGraph {
            vertices,
            edges,
            degrees,
        };
        g.check_connected()?;
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.vertices.len();
        let mut reached = vec![false; n];
        let root = self.edges[0].from;
        let mut stack = vec![root];
        reached[root] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !reached[b] {
                        reached[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| !reached[v]) {
            return Err(Error::Disconnected(
                self.vertices[v].clone(),
                self.vertices[root].clone(),
            ));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.degrees[vertex]
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// An edge is terminal when at least one endpoint has degree 1.
    pub fn is_terminal_edge(&self, edge: usize) -> bool {
        let e = &self.edges[edge];
        self.degrees[e.from] == 1 || self.degrees[e.to] == 1
    }

    pub fn has_terminal_edge(&self) -> bool {
        (0..self.edges.len()).any(|e| self.is_terminal_edge(e))
    }

    /// Metric girth: length of the shortest cycle. For each edge e = (u, v)
    /// the shortest cycle through e is len(e) + dist(u, v) in the graph with
    /// e removed; self-loops are cycles on their own. Exact on multigraphs.
    pub fn shortest_cycle_length(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_self_loop() {
                best = best.min(e.length);
                continue;
            }
            let dist = self.vertex_distances(e.from, Some(i));
            if dist[e.to].is_finite() {
                best = best.min(e.length + dist[e.to]);
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Acyclic)
        }
    }

    /// Dijkstra over vertices, optionally skipping one edge. O(V^2 + VE),
    /// plenty for desk-scale graphs.
    fn vertex_distances(&self, source: usize, skip_edge: Option<usize>) -> Vec<f64> {
        let n = self.vertices.len();
        let mut dist = vec![f64::INFINITY; n];
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
            for (i, e) in self.edges.iter().enumerate() {
                if Some(i) == skip_edge || e.is_self_loop() {
                    continue;
                }
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == u && dist[u] + e.length < dist[b] {
                        dist[b] = dist[u] + e.length;
                    }
                }
            }
        }
        dist
    }

    /// sqrt(3)pi/4 when a terminal edge is present, sqrt(3)pi/2 otherwise.
    pub fn critical_mass(&self) -> f64 {
        if self.has_terminal_edge() {
            critical_mass_half_line()
        } else {
            critical_mass_line()
        }
    }

    pub fn topology_report(&self) -> TopologyReport {
        let terminal_edges: Vec<String> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_terminal_edge(*i))
            .map(|(_, e)| e.id.clone())
            .collect();
        TopologyReport {
            vertex_count: self.vertices.len(),
            edge_count: self.edges.len(),
            total_length: self.total_length(),
            degrees: self
                .vertices
                .iter()
                .cloned()
                .zip(self.degrees.iter().copied())
                .collect(),
            has_terminal_edge: !terminal_edges.is_empty(),
            terminal_edges,
            shortest_cycle_length: self.shortest_cycle_length().ok(),
            critical_mass: self.critical_mass(),
        }
    }

    /// Split `edge_id` at arc length `t` from its `from` endpoint, inserting
    /// a fresh degree-2 vertex. Topological invariants (terminal edges,
    /// cycle lengths) are unchanged.
    pub fn subdivide(&self, edge_id: &str, t: f64) -> Result<Self> {
        let idx = self
            .edge_index(edge_id)
            .ok_or_else(|| Error::UnknownVertex {
                edge: edge_id.to_string(),
                vertex: String::new(),
            })?;
        let e = &self.edges[idx];
        if !t.is_finite() || t <= 0.0 || t >= e.length {
            return Err(Error::BadEdgeLength {
                edge: edge_id.to_string(),
                length: t,
            });
        }
        let mut vertices = self.vertices.clone();
        let new_vertex = format!("{}_cut", edge_id);
        vertices.push(new_vertex.clone());
        let nv = vertices.len() - 1;
        let mut edges = self.edges.clone();
        let to = e.to;
        let length = e.length;
        edges[idx] = Edge {
            id: format!("{}_a", edge_id),
            from: e.from,
            to: nv,
            length: t,
        };
        edges.push(Edge {
            id: format!("{}_b", edge_id),
            from: nv,
            to,
            length: length - t,
        });
        Self::finish(vertices, edges)
    }
}
