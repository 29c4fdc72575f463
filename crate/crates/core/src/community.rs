//! Weighted modularity and Fast-Greedy (Clauset–Newman–Moore) agglomeration.
//!
//! With `W` the total edge weight, `W_c` the weight inside community `c` and
//! `S_c` the summed strength of its members,
//! `Q = Σ_c [ W_c / W − (S_c / 2W)² ]`.
//!
//! Merging communities `i` and `j` joined by weight `w_ij` changes `Q` by
//! `(2W·w_ij − S_i·S_j) / 2W²`. Edge weights are integers, so the
//! agglomeration ranks candidate merges by that exact integer numerator and
//! keeps the modularity trace as an exact numerator over `4W²`. Ties are
//! therefore decided by the pair rule alone, never by rounding.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{VertexId, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommunityError {
    #[error("vertex {label:?} ({id}) has no community")]
    Unassigned { id: VertexId, label: String },
    #[error("assignment covers {assigned} vertices but the graph has {vertices}")]
    ExtraAssignments { assigned: usize, vertices: usize },
    #[error("dendrogram built for {dendrogram} vertices, graph has {graph}")]
    SizeMismatch { dendrogram: usize, graph: usize },
}

/// Weighted modularity of `assignment` (community id per vertex, by index).
pub fn modularity(g: &WeightedGraph, assignment: &[usize]) -> Result<f64, CommunityError> {
    let n = g.vertex_count();
    if assignment.len() < n {
        let id = VertexId(assignment.len());
        return Err(CommunityError::Unassigned { id, label: g.label(id).to_owned() });
    }
    if assignment.len() > n {
        return Err(CommunityError::ExtraAssignments { assigned: assignment.len(), vertices: n });
    }
    let total = g.total_weight() as f64;
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut internal: BTreeMap<usize, f64> = BTreeMap::new();
    let mut strength: BTreeMap<usize, f64> = BTreeMap::new();
    for e in g.edges() {
        let (cu, cv) = (assignment[e.u.index()], assignment[e.v.index()]);
        let w = e.weight as f64;
        *strength.entry(cu).or_default() += w;
        *strength.entry(cv).or_default() += w;
        if cu == cv {
            *internal.entry(cu).or_default() += w;
        }
    }
    let q = strength
        .iter()
        .map(|(c, s)| {
            let inside = internal.get(c).copied().unwrap_or(0.0);
            let share = s / (2.0 * total);
            inside / total - share * share
        })
        .sum();
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// 1-based; step `k` leaves `|V| − k` communities.
    pub step: usize,
    pub merged: (usize, usize),
    /// Surviving community id (the smaller of the pair).
    pub into: usize,
    pub modularity_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub vertex_count: usize,
    /// Modularity of the all-singletons start.
    pub initial_modularity: f64,
    pub merges: Vec<Merge>,
    // Exact modularity numerators over `4W²`, index 0 = start state.
    #[serde(skip)]
    trace: Vec<i128>,
}

impl Dendrogram {
    /// Modularity after `step` merges (0 = singletons).
    pub fn modularity_at(&self, step: usize) -> f64 {
        if step == 0 {
            self.initial_modularity
        } else {
            self.merges[step - 1].modularity_after
        }
    }

    /// Step with maximal modularity, earliest on ties.
    pub fn best_step(&self) -> usize {
        if self.trace.len() == self.merges.len() + 1 {
            let mut best = 0;
            for (step, &q) in self.trace.iter().enumerate() {
                if q > self.trace[best] {
                    best = step;
                }
            }
            return best;
        }
        // Deserialized dendrograms carry only the float trace.
        let mut best = 0;
        for step in 1..=self.merges.len() {
            if self.modularity_at(step) > self.modularity_at(best) {
                best = step;
            }
        }
        best
    }

    /// Community assignment after replaying the first `step` merges,
    /// relabelled densely in order of first appearance by vertex id.
    pub fn assignment_at(&self, step: usize) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for m in &self.merges[..step] {
            let ra = find(&mut parent, m.merged.0);
            let rb = find(&mut parent, m.merged.1);
            let (keep, gone) = if ra == m.into { (ra, rb) } else { (rb, ra) };
            parent[gone] = keep;
        }
        let mut dense = BTreeMap::new();
        (0..self.vertex_count)
            .map(|v| {
                let root = find(&mut parent, v);
                let next = dense.len();
                *dense.entry(root).or_insert(next)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub q: f64,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().max().map_or(0, |&c| c + 1)
    }

    /// Members per community id, each sorted by vertex id.
    pub fn communities(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(VertexId(v));
        }
        out
    }

    pub fn community_of(&self, v: VertexId) -> usize {
        self.assignment[v.index()]
    }
}

/// Runs the greedy agglomeration to completion: merges continue while any
/// two communities share an edge, even when the best gain is negative.
pub fn fast_greedy(g: &WeightedGraph) -> Dendrogram {
    let n = g.vertex_count();
    let total = g.total_weight() as i128;
    let two_w = 2 * total;

    let mut links: Vec<BTreeMap<usize, u64>> = g
        .vertex_ids()
        .map(|v| g.neighbors(v).iter().map(|&(w, wt)| (w.index(), wt)).collect())
        .collect();
    let mut strength: Vec<i128> = g
        .vertex_ids()
        .map(|v| g.strength(v).expect("vertex exists") as i128)
        .collect();

    let gain = |w_ij: u64, s_i: i128, s_j: i128| two_w * w_ij as i128 - s_i * s_j;

    // Ordered by (largest gain, smallest pair).
    let mut queue: BTreeSet<(Reverse<i128>, usize, usize)> = BTreeSet::new();
    for e in g.edges() {
        let (i, j) = (e.u.index(), e.v.index());
        queue.insert((Reverse(gain(e.weight, strength[i], strength[j])), i, j));
    }

    let mut q_num: i128 = -strength.iter().map(|s| s * s).sum::<i128>();
    let scale = 4 * total * total;
    let to_q = |num: i128| if scale == 0 { 0.0 } else { num as f64 / scale as f64 };

    let mut trace = vec![q_num];
    let mut merges = Vec::new();
    while let Some((Reverse(best), i, j)) = queue.pop_first() {
        for (k, &w) in &links[i] {
            if *k != j {
                queue.remove(&key(gain(w, strength[i], strength[*k]), i, *k));
            }
        }
        for (k, &w) in &links[j] {
            if *k != i {
                queue.remove(&key(gain(w, strength[j], strength[*k]), j, *k));
            }
        }

        let absorbed = std::mem::take(&mut links[j]);
        links[i].remove(&j);
        for (k, w) in absorbed {
            if k == i {
                continue;
            }
            links[k].remove(&j);
            *links[k].entry(i).or_default() += w;
            *links[i].entry(k).or_default() += w;
        }
        strength[i] += strength[j];
        strength[j] = 0;
        for (k, &w) in &links[i] {
            queue.insert(key(gain(w, strength[i], strength[*k]), i, *k));
        }

        q_num += 2 * best;
        trace.push(q_num);
        merges.push(Merge {
            step: merges.len() + 1,
            merged: (i, j),
            into: i,
            modularity_after: to_q(q_num),
        });
    }

    Dendrogram { vertex_count: n, initial_modularity: to_q(trace[0]), merges, trace }
}

fn key(gain: i128, a: usize, b: usize) -> (Reverse<i128>, usize, usize) {
    (Reverse(gain), a.min(b), a.max(b))
}

/// Partition at the modularity peak of the dendrogram (earliest on ties).
pub fn cut_at_max_modularity(d: &Dendrogram, g: &WeightedGraph) -> Result<Partition, CommunityError> {
    if d.vertex_count != g.vertex_count() {
        return Err(CommunityError::SizeMismatch { dendrogram: d.vertex_count, graph: g.vertex_count() });
    }
    let assignment = d.assignment_at(d.best_step());
    let q = modularity(g, &assignment)?;
    Ok(Partition { assignment, q })
}

/// `fast_greedy` followed by the max-modularity cut.
pub fn detect(g: &WeightedGraph) -> (Dendrogram, Partition) {
    let d = fast_greedy(g);
    let p = cut_at_max_modularity(&d, g).expect("dendrogram built from this graph");
    (d, p)
}
