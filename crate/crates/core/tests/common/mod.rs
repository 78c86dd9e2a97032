#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use respert::models::derive_seed;
use respert::Graph;

pub fn rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index))
}

/// Random recursive tree on `n` vertices plus independent extra edges.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: f64) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    edges.extend(gnp_edges(rng, n, extra));
    Graph::from_edges(n, edges).unwrap()
}

pub fn gnp(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let edges = gnp_edges(rng, n, p);
    Graph::from_edges(n, edges).unwrap()
}

fn gnp_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn non_edges(g: &Graph) -> Vec<(usize, usize)> {
    let n = g.vertex_count();
    (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge(u, v))
        .collect()
}

pub fn plus_edge(g: &Graph, a: usize, b: usize) -> Graph {
    let mut edges = g.edges().to_vec();
    edges.push((a, b));
    Graph::from_edges(g.vertex_count(), edges).unwrap()
}
