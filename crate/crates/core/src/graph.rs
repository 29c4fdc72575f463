//! Undirected weighted simple graph keyed by dense vertex ids.
//!
//! Vertices are hashtags with a post frequency; edge weights are co-post
//! counts. The graph is built by a single writer and treated as immutable
//! once analysis starts, so `&WeightedGraph` can be shared across threads.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense vertex index, assigned in insertion order starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub frequency: u64,
}

/// One undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("empty vertex label")]
    EmptyLabel,
    #[error("self-loop on {0} rejected")]
    SelfLoop(VertexId),
    #[error("unknown vertex {0}")]
    MissingVertex(VertexId),
    #[error("edge increment must be at least 1")]
    ZeroDelta,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedGraph {
    vertices: Vec<Vertex>,
    index: HashMap<String, VertexId>,
    // Sorted by neighbor id; kept symmetric.
    adjacency: Vec<Vec<(VertexId, u64)>>,
    edge_count: usize,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(vertices: usize) -> Self {
        Self {
            vertices: Vec::with_capacity(vertices),
            index: HashMap::with_capacity(vertices),
            adjacency: Vec::with_capacity(vertices),
            edge_count: 0,
        }
    }

    pub fn add_vertex(&mut self, label: impl Into<String>, frequency: u64) -> Result<VertexId, GraphError> {
        let label = label.into();
        if label.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if self.index.contains_key(&label) {
            return Err(GraphError::DuplicateLabel(label));
        }
        let id = VertexId(self.vertices.len());
        self.index.insert(label.clone(), id);
        self.vertices.push(Vertex { label, frequency });
        self.adjacency.push(Vec::new());
        Ok(id)
    }

    /// Adds `delta` to the weight of `{u, v}`, creating the edge if needed.
    /// Returns the resulting weight.
    pub fn upsert_edge(&mut self, u: VertexId, v: VertexId, delta: u64) -> Result<u64, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if delta == 0 {
            return Err(GraphError::ZeroDelta);
        }
        let weight = match Self::slot(&self.adjacency[u.0], v) {
            Ok(pos) => {
                self.adjacency[u.0][pos].1 += delta;
                let w = self.adjacency[u.0][pos].1;
                let back = Self::slot(&self.adjacency[v.0], u).expect("adjacency symmetric");
                self.adjacency[v.0][back].1 = w;
                w
            }
            Err(pos) => {
                self.adjacency[u.0].insert(pos, (v, delta));
                let back = Self::slot(&self.adjacency[v.0], u).unwrap_err();
                self.adjacency[v.0].insert(back, (u, delta));
                self.edge_count += 1;
                delta
            }
        };
        Ok(weight)
    }

    fn slot(list: &[(VertexId, u64)], target: VertexId) -> Result<usize, usize> {
        list.binary_search_by_key(&target, |&(n, _)| n)
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v.0 < self.vertices.len() {
            Ok(())
        } else {
            Err(GraphError::MissingVertex(v))
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, v: VertexId) -> Result<&Vertex, GraphError> {
        self.vertices.get(v.0).ok_or(GraphError::MissingVertex(v))
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.vertices[v.0].label
    }

    pub fn id_of(&self, label: &str) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn vertex_ids(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    /// Neighbors of `v` with edge weights, ordered by neighbor id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, u64)] {
        &self.adjacency[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0].len()
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<u64> {
        let list = self.adjacency.get(u.0)?;
        Self::slot(list, v).ok().map(|pos| list[pos].1)
    }

    /// Weighted degree: the sum of incident edge weights.
    pub fn strength(&self, v: VertexId) -> Result<u64, GraphError> {
        self.check(v)?;
        Ok(self.adjacency[v.0].iter().map(|&(_, w)| w).sum())
    }

    pub fn total_weight(&self) -> u64 {
        self.edges().map(|e| e.weight).sum()
    }

    /// Edges in canonical order: by `u`, then `v`, with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| v.0 > u)
                .map(move |&(v, weight)| Edge { u: VertexId(u), v, weight })
        })
    }

    /// Position of each canonical edge in [`WeightedGraph::edges`] order.
    pub fn edge_index(&self) -> HashMap<(VertexId, VertexId), usize> {
        self.edges().enumerate().map(|(i, e)| ((e.u, e.v), i)).collect()
    }

    /// Connected components, each sorted by id; components ordered by their
    /// smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(VertexId(start));
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &(w, _) in self.neighbors(v) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Largest component; ties go to the one holding the smallest vertex id.
    pub fn largest_component(&self) -> Vec<VertexId> {
        let mut best: Option<Vec<VertexId>> = None;
        for comp in self.connected_components() {
            if best.as_ref().is_none_or(|b| comp.len() > b.len()) {
                best = Some(comp);
            }
        }
        best.unwrap_or_default()
    }

    /// Copy of the graph with every edge weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> WeightedGraph {
        assert!(factor >= 1, "scale factor must be positive");
        let mut g = self.clone();
        for list in &mut g.adjacency {
            for entry in list.iter_mut() {
                entry.1 *= factor;
            }
        }
        g
    }
}
