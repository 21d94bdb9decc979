//! Seeded generators for test corpora.
//!
//! Half of the generated vectors use small integer levels so that ties
//! between densities, and hence ambiguous edges and multi-vertex classes,
//! show up regularly.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::densest::DensestInstance;
use crate::hypergraph::{DirectedHypergraph, Hyperedge, WeightMode};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

fn subset(rng: &mut impl Rng, n: usize, max_size: usize) -> Vec<usize> {
    let size = rng.random_range(1..=max_size.min(n).max(1));
    sample(rng, n, size).into_vec()
}

fn weight(rng: &mut impl Rng, integer: bool) -> f64 {
    if integer {
        rng.random_range(1..=3) as f64
    } else {
        rng.random_range(0.2..2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphShape {
    pub n: usize,
    pub edges: usize,
    /// Largest tail or head.
    pub max_side: usize,
    pub stationary: usize,
    pub mode: WeightMode,
    pub integer_weights: bool,
}

impl GraphShape {
    /// Random shape with `2 <= n <= max_n`, `1 <= edges <= max_edges`.
    pub fn sample(rng: &mut impl Rng, max_n: usize, max_edges: usize, mode: WeightMode) -> Self {
        let n = rng.random_range(2..=max_n.max(2));
        GraphShape {
            n,
            edges: rng.random_range(1..=max_edges.max(1)),
            max_side: 3,
            stationary: 0,
            mode,
            integer_weights: rng.random_bool(0.5),
        }
    }
}

/// Random directed hypergraph. In degree mode every vertex is covered by
/// at least one edge so that all weights are positive.
pub fn hypergraph(rng: &mut impl Rng, shape: &GraphShape) -> DirectedHypergraph {
    let n = shape.n;
    let mut edges: Vec<Hyperedge> = (0..shape.edges)
        .map(|_| {
            let tail = subset(rng, n, shape.max_side);
            let head = subset(rng, n, shape.max_side);
            Hyperedge::new(tail, head, weight(rng, shape.integer_weights))
        })
        .collect();
    if shape.mode == WeightMode::Degree {
        for u in 0..n {
            if !edges.iter().any(|e| e.tail.contains(&u) || e.head.contains(&u)) {
                let v = (u + rng.random_range(1..n)) % n;
                let e = if rng.random_bool(0.5) {
                    Hyperedge::new(vec![u], vec![v], weight(rng, shape.integer_weights))
                } else {
                    Hyperedge::new(vec![v], vec![u], weight(rng, shape.integer_weights))
                };
                edges.push(e);
            }
        }
    }
    let stationary: Vec<usize> = sample(rng, n, shape.stationary.min(n)).into_vec();
    let custom: Option<Vec<(usize, f64)>> = (shape.mode == WeightMode::Custom).then(|| {
        (0..n)
            .filter(|u| !stationary.contains(u))
            .map(|u| (u, rng.random_range(0.5..2.0)))
            .collect()
    });
    DirectedHypergraph::new(n, edges, &stationary, shape.mode, custom.as_deref()).expect("valid random hypergraph")
}

/// Random density vector; half the time drawn from a few integer levels.
pub fn vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    if rng.random_bool(0.5) {
        let levels = rng.random_range(1..=3);
        (0..n).map(|_| rng.random_range(0..=levels) as f64).collect()
    } else {
        normal_vector(rng, n)
    }
}

pub fn normal_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Random single-class densest-subset instance on `0..size`.
pub fn densest_instance(rng: &mut impl Rng, size: usize, stationary: bool) -> DensestInstance {
    let integer = rng.random_bool(0.5);
    let t = if stationary { Some(rng.random_range(0..size)) } else { None };
    let omega = (0..size)
        .map(|u| if Some(u) == t { 0.0 } else if integer { rng.random_range(1..=2) as f64 } else { rng.random_range(0.5..2.0) })
        .collect();
    let flags = (0..size).map(|u| Some(u) == t).collect();
    let mut inst = DensestInstance::new((0..size).collect(), omega, flags).expect("valid instance");
    let edges = rng.random_range(0..=2 * size);
    for e in 0..edges {
        let members = subset(rng, size, 3);
        let c = weight(rng, integer);
        if rng.random_bool(0.5) {
            inst.add_incoming(e, c, members);
        } else {
            inst.add_outgoing(e, c, members);
        }
    }
    inst
}
