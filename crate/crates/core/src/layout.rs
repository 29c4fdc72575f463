//! Seeded Fruchterman–Reingold layout, used to attach x/y positions to
//! exports when no external layout tool is available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutOptions {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self { iterations: 100, seed: 0 }
    }
}

/// Positions in the unit square scaled by `sqrt(n)`. Attraction grows with
/// `1 + ln(weight)`, so heavy edges pull their endpoints closer.
pub fn force_directed(g: &WeightedGraph, opts: &LayoutOptions) -> Vec<(f64, f64)> {
    let n = g.vertex_count();
    if n == 0 {
        return Vec::new();
    }
    let side = (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pos: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side)).collect();
    if n == 1 {
        return pos;
    }
    let k = (side * side / n as f64).sqrt();
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .map(|e| (e.u.index(), e.v.index(), 1.0 + (e.weight as f64).ln()))
        .collect();
    let mut disp = vec![(0.0f64, 0.0f64); n];
    let mut temperature = side / 10.0;
    let cooling = temperature / (opts.iterations.max(1) as f64 + 1.0);

    for _ in 0..opts.iterations {
        disp.iter_mut().for_each(|d| *d = (0.0, 0.0));
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pos[i].0 - pos[j].0;
                let dy = pos[i].1 - pos[j].1;
                let d2 = (dx * dx + dy * dy).max(1e-9);
                let f = k * k / d2;
                disp[i].0 += dx * f;
                disp[i].1 += dy * f;
                disp[j].0 -= dx * f;
                disp[j].1 -= dy * f;
            }
        }
        for &(u, v, w) in &edges {
            let dx = pos[u].0 - pos[v].0;
            let dy = pos[u].1 - pos[v].1;
            let d = (dx * dx + dy * dy).sqrt().max(1e-9);
            let f = w * d / k;
            disp[u].0 -= dx * f;
            disp[u].1 -= dy * f;
            disp[v].0 += dx * f;
            disp[v].1 += dy * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = (d.0 * d.0 + d.1 * d.1).sqrt();
            if len > 0.0 {
                let step = len.min(temperature) / len;
                p.0 += d.0 * step;
                p.1 += d.1 * step;
            }
        }
        temperature -= cooling;
    }
    pos
}
