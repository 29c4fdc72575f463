mod support;

use cesgraph::centrality::{brandes, eigenvector_centrality, vertex_betweenness, edge_betweenness, Weighting};
use cesgraph::graph::VertexId;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{brute_betweenness, graph_from_edges, random_connected_graph, random_graph, to_f64, Q};

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unweighted_betweenness_matches_path_enumeration(seed in seeds(), n in 2usize..7, p in 0.2f64..0.9) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, p, 1);
        let exact = brandes::<Q>(&g, Weighting::Unweighted).unwrap();
        let brute = brute_betweenness(&g, false);
        prop_assert_eq!(&exact.vertex, &brute.vertex);
        let brute_edges: Vec<Q> = brute.edge.values().cloned().collect();
        prop_assert_eq!(&exact.edge, &brute_edges);
    }

    #[test]
    fn eigenvector_scale_invariant(seed in seeds(), n in 3usize..20, factor in 2u64..9) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.3, 6);
        let a = eigenvector_centrality(&g, 1e-12, 100_000).unwrap();
        let b = eigenvector_centrality(&g.scaled(factor), 1e-12, 100_000).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn eigenvector_residual_bounded(seed in seeds(), n in 3usize..25) {
        let tol = 1e-10;
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.25, 9);
        let x = eigenvector_centrality(&g, tol, 100_000).unwrap();
        let ax: Vec<f64> = (0..n)
            .map(|i| g.neighbors(VertexId(i)).iter().map(|&(j, w)| w as f64 * x[j.index()]).sum())
            .collect();
        let lambda = ax.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|v| v * v).sum::<f64>();
        let residual = ax.iter().zip(&x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        prop_assert!(residual / lambda < 10.0 * tol, "residual {}", residual / lambda);
    }

    #[test]
    fn tree_edge_betweenness_is_split_product(seed in seeds(), n in 2usize..15) {
        let g = random_connected_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.0, 1);
        let eb = edge_betweenness(&g, false).unwrap();
        for (e, score) in g.edges().zip(&eb) {
            // Size of u's side once the edge is removed.
            let mut side = vec![e.u];
            let mut seen = vec![false; n];
            seen[e.u.index()] = true;
            while let Some(x) = side.pop() {
                for &(y, _) in g.neighbors(x) {
                    if !(x == e.u && y == e.v) && !seen[y.index()] {
                        seen[y.index()] = true;
                        side.push(y);
                    }
                }
            }
            let a = seen.iter().filter(|&&s| s).count();
            prop_assert_eq!(*score, (a * (n - a)) as f64);
        }
    }

    #[test]
    fn uniform_weights_match_unweighted(seed in seeds(), n in 2usize..12, w in 1u64..20) {
        let base = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.4, 1);
        let g = base.scaled(w);
        let a = vertex_betweenness(&g, true).unwrap();
        let b = vertex_betweenness(&g, false).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let ea = edge_betweenness(&g, true).unwrap();
        let eb = edge_betweenness(&g, false).unwrap();
        for (x, y) in ea.iter().zip(&eb) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_betweenness_matches_path_enumeration(seed in seeds(), n in 2usize..7) {
        let g = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.6, 5);
        let ours = brandes::<f64>(&g, Weighting::InverseWeight).unwrap();
        let brute = brute_betweenness(&g, true);
        for (x, y) in ours.vertex.iter().zip(&brute.vertex) {
            prop_assert!((x - to_f64(y)).abs() < 1e-9);
        }
        for (x, y) in ours.edge.iter().zip(brute.edge.values()) {
            prop_assert!((x - to_f64(y)).abs() < 1e-9);
        }
    }
}

#[test]
fn cycle_automorphism_gives_equal_scores() {
    // Rotations of a cycle map every vertex and edge onto every other.
    let n = 7;
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 3)).collect();
    let g = graph_from_edges(n, &edges);
    for weighted in [false, true] {
        let vb = vertex_betweenness(&g, weighted).unwrap();
        assert!(vb.iter().all(|&x| (x - vb[0]).abs() < 1e-12));
        let eb = edge_betweenness(&g, weighted).unwrap();
        assert!(eb.iter().all(|&x| (x - eb[0]).abs() < 1e-12));
    }
    let ev = eigenvector_centrality(&g, 1e-12, 10_000).unwrap();
    assert!(ev.iter().all(|&x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn mirror_automorphism_of_barbell() {
    // Two K4 joined by a path a-m-b: the reflection swaps the halves.
    let mut edges = Vec::new();
    for base in [0, 5] {
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((base + i, base + j, 2));
            }
        }
    }
    edges.push((3, 4, 1));
    edges.push((4, 5, 1));
    let g = graph_from_edges(9, &edges);
    let mirror = |v: usize| 8 - v;
    let vb = vertex_betweenness(&g, true).unwrap();
    let ev = eigenvector_centrality(&g, 1e-12, 10_000).unwrap();
    for v in 0..9 {
        assert!((vb[v] - vb[mirror(v)]).abs() < 1e-9);
        assert!((ev[v] - ev[mirror(v)]).abs() < 1e-9);
    }
    let eb = edge_betweenness(&g, true).unwrap();
    let idx = g.edge_index();
    for e in g.edges() {
        let (a, b) = (mirror(e.u.index()), mirror(e.v.index()));
        let other = idx[&(VertexId(a.min(b)), VertexId(a.max(b)))];
        assert!((eb[idx[&(e.u, e.v)]] - eb[other]).abs() < 1e-9);
    }
}
