#![allow(dead_code)]

use cfp_core::algorithms::{AgentProblem, ProblemSpec};
use cfp_core::convex::{ConvexInequality, ConvexSet};
use cfp_core::graph::{Digraph, Edge};
use cfp_core::{Matrix, Vector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(x: &[f64]) -> Vector {
    Vector::from_row_slice(x)
}

pub fn uniform_vector(rng: &mut impl Rng, m: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(m, |_, _| rng.random_range(lo..hi))
}

pub fn unit_vector(rng: &mut impl Rng, m: usize) -> Vector {
    loop {
        let u = uniform_vector(rng, m, -1.0, 1.0);
        let norm = u.norm();
        if norm > 0.1 && norm <= 1.0 {
            return u / norm;
        }
    }
}

/// A random strongly connected digraph: a Hamiltonian cycle through a random
/// permutation plus extra edges with probability `density`.
pub fn strongly_connected(rng: &mut impl Rng, n: usize, density: f64) -> Digraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut w = Matrix::zeros(n, n);
    for k in 0..n {
        let (from, to) = (order[k], order[(k + 1) % n]);
        w[(to, from)] = rng.random_range(0.2..2.0);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && w[(i, j)] == 0.0 && rng.random_bool(density) {
                w[(i, j)] = rng.random_range(0.2..2.0);
            }
        }
    }
    Digraph::from_weights(w).unwrap()
}

pub fn undirected_pair() -> Digraph {
    Digraph::from_edges(
        2,
        [Edge { from: 0, to: 1, weight: 1.0 }, Edge { from: 1, to: 0, weight: 1.0 }],
    )
    .unwrap()
}

/// A set containing `x0`, usually with `x0` on its boundary.
pub fn set_through(rng: &mut impl Rng, x0: &Vector) -> ConvexSet {
    let m = x0.len();
    match rng.random_range(0..5) {
        0 => {
            let mut lo = x0 - uniform_vector(rng, m, 0.0, 1.5);
            let mut hi = x0 + uniform_vector(rng, m, 0.0, 1.5);
            let k = rng.random_range(0..m);
            if rng.random_bool(0.5) {
                lo[k] = x0[k];
            } else {
                hi[k] = x0[k];
            }
            ConvexSet::boxed(lo, hi).unwrap()
        }
        1 => {
            let a = unit_vector(rng, m) * rng.random_range(0.5..2.0);
            let b = a.dot(x0);
            ConvexSet::halfspace(a, b).unwrap()
        }
        2 => {
            let r = rng.random_range(0.5..2.0);
            ConvexSet::ball(x0 + unit_vector(rng, m) * r, r).unwrap()
        }
        3 => {
            let a = unit_vector(rng, m);
            let b = a.dot(x0);
            ConvexSet::hyperplane(a, b).unwrap()
        }
        _ => ConvexSet::WholeSpace,
    }
}

/// An inequality with `g(x0) = 0` (or the trivial one).
pub fn inequality_through(rng: &mut impl Rng, x0: &Vector) -> ConvexInequality {
    let m = x0.len();
    match rng.random_range(0..3) {
        0 => {
            let a = unit_vector(rng, m) * rng.random_range(0.5..2.0);
            let b = a.dot(x0);
            ConvexInequality::linear(a, b).unwrap()
        }
        1 => {
            let b = Matrix::from_fn(m, m, |_, _| rng.random_range(-0.7..0.7));
            let q = b.transpose() * &b;
            let c = uniform_vector(rng, m, -1.0, 1.0);
            let d = -(x0.dot(&(&q * x0)) + c.dot(x0));
            ConvexInequality::quadratic(q, c, d).unwrap()
        }
        _ => ConvexInequality::trivial(m),
    }
}

/// A feasible random problem: every agent's pair contains `x0`.
pub fn problem_through(rng: &mut impl Rng, n: usize, x0: &Vector) -> ProblemSpec {
    let agents = (0..n)
        .map(|_| AgentProblem::new(inequality_through(rng, x0), set_through(rng, x0)))
        .collect();
    ProblemSpec::new(x0.len(), agents).unwrap()
}

pub fn random_states(rng: &mut impl Rng, n: usize, m: usize, spread: f64) -> Vec<Vector> {
    (0..n).map(|_| uniform_vector(rng, m, -spread, spread)).collect()
}
