//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls the algorithms under test.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use cesgraph::graph::{VertexId, WeightedGraph};
use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

pub type Q = BigRational;

/// Shortest length to a target and every simple path achieving it.
type Shortest = (Q, Vec<Vec<usize>>);

pub fn q(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().expect("finite rational")
}

/// Graph on vertices `v0..v{n-1}` with unit frequencies.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize, u64)]) -> WeightedGraph {
    let mut g = WeightedGraph::with_capacity(n);
    for i in 0..n {
        g.add_vertex(format!("v{i}"), 1).unwrap();
    }
    for &(u, v, w) in edges {
        g.upsert_edge(VertexId(u), VertexId(v), w).unwrap();
    }
    g
}

pub fn edge_list(g: &WeightedGraph) -> Vec<(usize, usize, u64)> {
    let mut out = Vec::new();
    for u in 0..g.vertex_count() {
        for &(v, w) in g.neighbors(VertexId(u)) {
            if u < v.index() {
                out.push((u, v.index(), w));
            }
        }
    }
    out
}

/// Every edge subset of the complete graph on `n` vertices, as edge lists.
pub fn all_labeled_graphs(n: usize) -> impl Iterator<Item = Vec<(usize, usize)>> {
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
    let total = 1u64 << slots.len();
    (0..total).map(move |mask| {
        slots.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect()
    })
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, max_weight: u64) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v, rng.random_range(1..=max_weight)));
            }
        }
    }
    graph_from_edges(n, &edges)
}

/// Random spanning tree plus independent extra edges, so the result is connected.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, p: f64, max_weight: u64) -> WeightedGraph {
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        seen.insert((u, v));
        edges.push((u, v, rng.random_range(1..=max_weight)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !seen.contains(&(u, v)) && rng.random_bool(p) {
                edges.push((u, v, rng.random_range(1..=max_weight)));
            }
        }
    }
    graph_from_edges(n, &edges)
}

pub fn bfs_components(g: &WeightedGraph) -> Vec<BTreeSet<usize>> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            comp.insert(u);
            for &(v, _) in g.neighbors(VertexId(u)) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v.index());
                }
            }
        }
        out.push(comp);
    }
    out
}

pub fn is_connected(g: &WeightedGraph) -> bool {
    bfs_components(g).len() <= 1
}

/// Betweenness by enumerating every simple path between every pair and
/// keeping the shortest ones. Lengths are exact: hop counts, or sums of
/// `1/w` when `weighted`.
pub struct BruteBetweenness {
    pub vertex: Vec<Q>,
    pub edge: BTreeMap<(usize, usize), Q>,
}

pub fn brute_betweenness(g: &WeightedGraph, weighted: bool) -> BruteBetweenness {
    let n = g.vertex_count();
    let adj: Vec<Vec<(usize, Q)>> = (0..n)
        .map(|u| {
            g.neighbors(VertexId(u))
                .iter()
                .map(|&(v, w)| (v.index(), if weighted { q(1, w as i64) } else { q(1, 1) }))
                .collect()
        })
        .collect();
    let mut vertex = vec![Q::zero(); n];
    let mut edge: BTreeMap<(usize, usize), Q> = edge_list(g).iter().map(|&(u, v, _)| ((u, v), Q::zero())).collect();

    for s in 0..n {
        // Shortest simple paths from s to every t > s.
        let mut best: Vec<Option<(Q, Vec<Vec<usize>>)>> = vec![None; n];
        let mut path = vec![s];
        let mut on_path = vec![false; n];
        on_path[s] = true;
        fn dfs(
            adj: &[Vec<(usize, Q)>],
            s: usize,
            len: &Q,
            path: &mut Vec<usize>,
            on_path: &mut [bool],
            best: &mut [Option<Shortest>],
        ) {
            let u = *path.last().unwrap();
            if u > s {
                match &mut best[u] {
                    Some((d, paths)) if *d == *len => paths.push(path.clone()),
                    Some((d, _)) if *d < *len => {}
                    slot => *slot = Some((len.clone(), vec![path.clone()])),
                }
            }
            for (v, w) in &adj[u] {
                if !on_path[*v] {
                    on_path[*v] = true;
                    path.push(*v);
                    dfs(adj, s, &(len + w), path, on_path, best);
                    path.pop();
                    on_path[*v] = false;
                }
            }
        }
        dfs(&adj, s, &Q::zero(), &mut path, &mut on_path, &mut best);

        for (_, paths) in best.into_iter().flatten() {
            let share = q(1, paths.len() as i64);
            for p in &paths {
                for &x in &p[1..p.len() - 1] {
                    vertex[x] += &share;
                }
                for w in p.windows(2) {
                    let key = (w[0].min(w[1]), w[0].max(w[1]));
                    *edge.get_mut(&key).unwrap() += &share;
                }
            }
        }
    }
    BruteBetweenness { vertex, edge }
}

/// Leading eigenvector of the adjacency matrix of the largest component
/// (ties to the component holding the smallest vertex), max-rescaled.
pub fn dense_eigenvector(g: &WeightedGraph) -> Vec<f64> {
    let n = g.vertex_count();
    let mut comps = bfs_components(g);
    comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.first().cmp(&b.first())));
    let mut out = vec![0.0; n];
    let Some(comp) = comps.first() else { return out };
    if comp.len() < 2 {
        return out;
    }
    let ids: Vec<usize> = comp.iter().copied().collect();
    let pos: HashMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = ids.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    for (u, v, w) in edge_list(g) {
        if let (Some(&i), Some(&j)) = (pos.get(&u), pos.get(&v)) {
            a[(i, j)] = w as f64;
            a[(j, i)] = w as f64;
        }
    }
    let eig = SymmetricEigen::new(a);
    let top = (0..k).max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j])).unwrap();
    let col = eig.eigenvectors.column(top);
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let peak = col.iter().map(|x| x * sign).fold(f64::MIN, f64::max);
    for (i, &v) in ids.iter().enumerate() {
        out[v] = col[i] * sign / peak;
    }
    out
}

/// Q from the dense definition `1/2W * sum_ij (A_ij - k_i k_j / 2W) [c_i = c_j]`,
/// exact.
pub fn modularity_exact(g: &WeightedGraph, assignment: &[usize]) -> Q {
    let n = g.vertex_count();
    let edges = edge_list(g);
    let w: i64 = edges.iter().map(|e| e.2 as i64).sum();
    if w == 0 {
        return Q::zero();
    }
    let mut a = vec![vec![0i64; n]; n];
    for &(u, v, wt) in &edges {
        a[u][v] = wt as i64;
        a[v][u] = wt as i64;
    }
    let k: Vec<i64> = a.iter().map(|row| row.iter().sum()).collect();
    let mut num = BigInt::zero();
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                num += BigInt::from(2 * w * a[i][j] - k[i] * k[j]);
            }
        }
    }
    BigRational::new(num, BigInt::from(4 * w * w))
}

/// All set partitions of `0..n` as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur[i] = c;
            rec(i + 1, max.max(c), cur, out);
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    rec(1, 0, &mut cur, &mut out);
    out
}

/// Exhaustive maximum over all set partitions. Numerators over `4W²` are
/// compared as integers, so the optimum is exact.
pub fn best_modularity(g: &WeightedGraph) -> (Q, Vec<usize>) {
    let n = g.vertex_count();
    let edges = edge_list(g);
    let w: i128 = edges.iter().map(|e| e.2 as i128).sum();
    if w == 0 {
        return (Q::zero(), vec![0; n]);
    }
    let mut a = vec![vec![0i128; n]; n];
    for &(u, v, wt) in &edges {
        a[u][v] = wt as i128;
        a[v][u] = wt as i128;
    }
    let k: Vec<i128> = a.iter().map(|row| row.iter().sum()).collect();
    let (num, best) = set_partitions(n)
        .into_iter()
        .map(|p| {
            let mut num = 0i128;
            for i in 0..n {
                for j in 0..n {
                    if p[i] == p[j] {
                        num += 2 * w * a[i][j] - k[i] * k[j];
                    }
                }
            }
            (num, p)
        })
        .max_by_key(|x| x.0)
        .unwrap();
    (BigRational::new(BigInt::from(num), BigInt::from(4 * w * w)), best)
}

/// Normalized mutual information, `2 I / (H_a + H_b)`; 1 when both
/// labelings are trivial and identical.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *pa.entry(x).or_default() += 1.0;
        *pb.entry(y).or_default() += 1.0;
    }
    let h = |m: &HashMap<usize, f64>| -m.values().map(|c| c / n * (c / n).ln()).sum::<f64>();
    let (ha, hb) = (h(&pa), h(&pb));
    if ha + hb == 0.0 {
        return 1.0;
    }
    let i: f64 = joint.iter().map(|(&(x, y), &c)| c / n * ((c / n) / (pa[&x] / n * pb[&y] / n)).ln()).sum();
    2.0 * i / (ha + hb)
}

/// `blocks` groups of `size` vertices; unit-weight edges with probability
/// `p_in` inside a group and `p_out` across groups.
pub fn planted_partition(rng: &mut impl Rng, blocks: usize, size: usize, p_in: f64, p_out: f64) -> (WeightedGraph, Vec<usize>) {
    let n = blocks * size;
    let truth: Vec<usize> = (0..n).map(|i| i / size).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if truth[u] == truth[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v, 1));
            }
        }
    }
    (graph_from_edges(n, &edges), truth)
}

/// Pair counts with set semantics per post, by direct enumeration.
pub fn brute_pair_counts<S: AsRef<str>>(posts: &[Vec<S>]) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    for post in posts {
        let tags: BTreeSet<&str> = post.iter().map(|s| s.as_ref()).collect();
        let tags: Vec<&str> = tags.into_iter().collect();
        for i in 0..tags.len() {
            for j in (i + 1)..tags.len() {
                *out.entry((tags[i].to_owned(), tags[j].to_owned())).or_default() += 1;
            }
        }
    }
    out
}

/// Labelled edge map of a graph, for comparisons independent of vertex ids.
pub fn labelled_edges(g: &WeightedGraph) -> BTreeMap<(String, String), u64> {
    edge_list(g)
        .into_iter()
        .map(|(u, v, w)| {
            let (a, b) = (g.label(VertexId(u)).to_owned(), g.label(VertexId(v)).to_owned());
            if a < b { ((a, b), w) } else { ((b, a), w) }
        })
        .collect()
}
