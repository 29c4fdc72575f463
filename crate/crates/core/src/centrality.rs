//! Eigenvector, vertex betweenness and edge betweenness centrality.
//!
//! Betweenness follows Brandes: one shortest-path DAG per source, then a
//! reverse sweep that accumulates pair dependencies onto vertices and edges.
//! The accumulation is generic over the scalar so the same code runs in
//! `f64` for production and in exact rationals for verification.
//!
//! Scores are unnormalized and count each unordered pair once. In weighted
//! mode an edge of weight `w` has length `1 / w`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{VertexId, WeightedGraph};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

// Sources per reduction chunk. Fixed so the summation order does not depend
// on the number of worker threads.
const SOURCE_CHUNK: usize = 16;

// Relative slack when comparing weighted path lengths.
const DISTANCE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CentralityError {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("max_iterations must be at least 1")]
    InvalidIterations,
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("edge {u}-{v} has non-positive weight")]
    NonPositiveWeight { u: String, v: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    Unweighted,
    /// Edge length is the reciprocal of its weight.
    InverseWeight,
}

impl Weighting {
    pub fn from_flag(use_weights: bool) -> Self {
        if use_weights {
            Weighting::InverseWeight
        } else {
            Weighting::Unweighted
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub weighting: Weighting,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            weighting: Weighting::InverseWeight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityReport {
    pub eigenvector: Vec<f64>,
    pub betweenness: Vec<f64>,
    /// Indexed like [`WeightedGraph::edges`].
    pub edge_betweenness: Vec<f64>,
}

impl CentralityReport {
    pub fn compute(g: &WeightedGraph, opts: &CentralityOptions) -> Result<Self, CentralityError> {
        let eigenvector = eigenvector_centrality(g, opts.tolerance, opts.max_iterations)?;
        let Betweenness { vertex, edge } = brandes::<f64>(g, opts.weighting)?;
        Ok(Self { eigenvector, betweenness: vertex, edge_betweenness: edge })
    }
}

/// Leading eigenvector of the weighted adjacency matrix on the largest
/// connected component, rescaled to a maximum of 1. Other vertices score 0.
///
/// Power iteration runs on `A + cI` with `c` half the largest edge weight in
/// the component. The shift leaves eigenvectors unchanged and breaks the
/// `±λ` symmetry of bipartite components, which would otherwise oscillate.
pub fn eigenvector_centrality(
    g: &WeightedGraph,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Vec<f64>, CentralityError> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(CentralityError::InvalidTolerance(tolerance));
    }
    if max_iterations == 0 {
        return Err(CentralityError::InvalidIterations);
    }
    let n = g.vertex_count();
    let mut scores = vec![0.0; n];
    let comp = g.largest_component();
    if comp.len() < 2 {
        return Ok(scores);
    }

    let mut local = vec![usize::MAX; n];
    for (i, v) in comp.iter().enumerate() {
        local[v.index()] = i;
    }
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&v| g.neighbors(v).iter().map(|&(w, wt)| (local[w.index()], wt as f64)).collect())
        .collect();
    let shift = 0.5 * rows.iter().flatten().map(|&(_, w)| w).fold(0.0, f64::max);

    let mut x = vec![1.0; comp.len()];
    let mut next = vec![0.0; comp.len()];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iterations {
        for (i, row) in rows.iter().enumerate() {
            next[i] = shift * x[i] + row.iter().map(|&(j, w)| w * x[j]).sum::<f64>();
        }
        let peak = next.iter().copied().fold(0.0, f64::max);
        for value in next.iter_mut() {
            *value /= peak;
        }
        residual = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if residual < tolerance {
            for (v, value) in comp.iter().zip(&x) {
                scores[v.index()] = *value;
            }
            return Ok(scores);
        }
    }
    Err(CentralityError::NotConverged { iterations: max_iterations, residual })
}

/// Vertex and edge betweenness accumulated in the scalar `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Betweenness<T> {
    pub vertex: Vec<T>,
    /// Indexed like [`WeightedGraph::edges`].
    pub edge: Vec<T>,
}

/// Scalar usable for path counting and dependency accumulation.
pub trait PathScalar: Clone + Send + Sync + Zero + One + std::ops::Div<Output = Self> {}

impl<T> PathScalar for T where T: Clone + Send + Sync + Zero + One + std::ops::Div<Output = T> {}

pub fn vertex_betweenness(g: &WeightedGraph, use_weights: bool) -> Result<Vec<f64>, CentralityError> {
    Ok(brandes::<f64>(g, Weighting::from_flag(use_weights))?.vertex)
}

pub fn edge_betweenness(g: &WeightedGraph, use_weights: bool) -> Result<Vec<f64>, CentralityError> {
    Ok(brandes::<f64>(g, Weighting::from_flag(use_weights))?.edge)
}

/// Brandes accumulation for vertices and edges in one pass per source.
pub fn brandes<T: PathScalar>(g: &WeightedGraph, weighting: Weighting) -> Result<Betweenness<T>, CentralityError> {
    let n = g.vertex_count();
    let edge_slots = edge_slots(g);
    let m = g.edge_count();
    if weighting == Weighting::InverseWeight {
        if let Some(e) = g.edges().find(|e| e.weight == 0) {
            return Err(CentralityError::NonPositiveWeight {
                u: g.label(e.u).to_owned(),
                v: g.label(e.v).to_owned(),
            });
        }
    }

    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Betweenness<T>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = Betweenness { vertex: vec![T::zero(); n], edge: vec![T::zero(); m] };
            let mut work = Workspace::new(n);
            for &s in chunk {
                let dag = match weighting {
                    Weighting::Unweighted => bfs_dag(g, &edge_slots, s, &mut work),
                    Weighting::InverseWeight => dijkstra_dag(g, &edge_slots, s, &mut work),
                };
                accumulate(&dag, s, &mut acc);
            }
            acc
        })
        .collect();

    let mut total = Betweenness { vertex: vec![T::zero(); n], edge: vec![T::zero(); m] };
    for part in partials {
        add_into(&mut total.vertex, part.vertex);
        add_into(&mut total.edge, part.edge);
    }
    let two = T::one() + T::one();
    for value in total.vertex.iter_mut().chain(total.edge.iter_mut()) {
        *value = value.clone() / two.clone();
    }
    Ok(total)
}

fn add_into<T: PathScalar>(dst: &mut [T], src: Vec<T>) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = d.clone() + s;
    }
}

/// Canonical edge index for every adjacency slot.
fn edge_slots(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let index = g.edge_index();
    g.vertex_ids()
        .map(|u| {
            g.neighbors(u)
                .iter()
                .map(|&(v, _)| index[&(u.min(v), u.max(v))])
                .collect()
        })
        .collect()
}

struct Workspace {
    dist_hops: Vec<usize>,
    dist: Vec<f64>,
    settled: Vec<bool>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { dist_hops: vec![usize::MAX; n], dist: vec![f64::INFINITY; n], settled: vec![false; n] }
    }
}

/// Shortest-path DAG from one source: reachable vertices in non-decreasing
/// distance order and, per vertex, its (predecessor, edge index) pairs.
struct PathDag {
    order: Vec<usize>,
    preds: Vec<Vec<(usize, usize)>>,
}

fn bfs_dag(g: &WeightedGraph, slots: &[Vec<usize>], s: usize, work: &mut Workspace) -> PathDag {
    let n = g.vertex_count();
    let dist = &mut work.dist_hops;
    dist.fill(usize::MAX);
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for (slot, &(w, _)) in g.neighbors(VertexId(v)).iter().enumerate() {
            let w = w.index();
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                preds[w].push((v, slots[v][slot]));
            }
        }
    }
    PathDag { order, preds }
}

#[derive(PartialEq)]
struct Frontier {
    dist: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn same_length(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return a == b;
    }
    (a - b).abs() <= DISTANCE_EPS * a.abs().max(b.abs())
}

fn dijkstra_dag(g: &WeightedGraph, slots: &[Vec<usize>], s: usize, work: &mut Workspace) -> PathDag {
    let n = g.vertex_count();
    work.dist.fill(f64::INFINITY);
    work.settled.fill(false);
    let dist = &mut work.dist;
    let settled = &mut work.settled;
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(Frontier { dist: 0.0, vertex: s });
    while let Some(Frontier { dist: d, vertex: v }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, weight) in g.neighbors(VertexId(v)) {
            let w = w.index();
            let candidate = d + 1.0 / weight as f64;
            if !settled[w] && candidate < dist[w] && !same_length(candidate, dist[w]) {
                dist[w] = candidate;
                heap.push(Frontier { dist: candidate, vertex: w });
            }
        }
    }

    // Second pass: an edge is on a shortest path when it closes the distance
    // gap exactly (up to rounding). Lengths are positive, so predecessors
    // always precede their successors in `order`.
    let mut preds = vec![Vec::new(); n];
    for &v in &order {
        for (slot, &(w, weight)) in g.neighbors(VertexId(v)).iter().enumerate() {
            let w = w.index();
            if w != s && same_length(dist[v] + 1.0 / weight as f64, dist[w]) {
                preds[w].push((v, slots[v][slot]));
            }
        }
    }
    PathDag { order, preds }
}

fn accumulate<T: PathScalar>(dag: &PathDag, s: usize, acc: &mut Betweenness<T>) {
    let n = dag.preds.len();
    let mut sigma = vec![T::zero(); n];
    sigma[s] = T::one();
    for &v in &dag.order {
        for &(p, _) in &dag.preds[v] {
            sigma[v] = sigma[v].clone() + sigma[p].clone();
        }
    }
    let mut delta = vec![T::zero(); n];
    for &w in dag.order.iter().rev() {
        let carried = T::one() + delta[w].clone();
        for &(p, e) in &dag.preds[w] {
            let share = sigma[p].clone() / sigma[w].clone() * carried.clone();
            acc.edge[e] = acc.edge[e].clone() + share.clone();
            delta[p] = delta[p].clone() + share;
        }
        if w != s {
            acc.vertex[w] = acc.vertex[w].clone() + delta[w].clone();
        }
    }
}
