mod common;

use cfp_core::graph::{
    contraction_log_rate, delta_graph, laplacian_spectrum, left_null_eigenvector, step_size_bound, DeltaGraphParams,
    Digraph, Edge, SwitchingSchedule,
};
use cfp_core::Matrix;
use proptest::prelude::*;
use rand::Rng;

fn dyadic_graph() -> impl Strategy<Value = Digraph> {
    (1usize..=7)
        .prop_flat_map(|n| prop::collection::vec(0u32..16, n * n).prop_map(move |w| (n, w)))
        .prop_map(|(n, w)| Digraph::from_weights(Matrix::from_fn(n, n, |i, j| w[i * n + j] as f64 / 8.0)).unwrap())
}

/// A random rooted tree (edges parent -> child) plus random extra edges; has
/// a spanning tree but is usually not strongly connected.
fn rooted_graph(seed: u64, n: usize) -> Digraph {
    let mut r = common::rng(seed);
    let mut edges = Vec::new();
    for child in 1..n {
        let parent = r.random_range(0..child);
        edges.push(Edge { from: parent, to: child, weight: r.random_range(0.2..2.0) });
    }
    for _ in 0..n {
        let (from, to) = (r.random_range(0..n), r.random_range(0..n));
        if from != to && to != 0 {
            edges.push(Edge { from, to, weight: r.random_range(0.2..2.0) });
        }
    }
    // root 0 never receives, so its row of the Laplacian is zero
    let mut w = Matrix::zeros(n, n);
    for e in edges {
        w[(e.to, e.from)] = e.weight;
    }
    Digraph::from_weights(w).unwrap()
}

proptest! {
    #[test]
    fn laplacian_rows_sum_to_zero_exactly(g in dyadic_graph()) {
        let l = g.laplacian();
        for i in 0..g.n() {
            prop_assert_eq!(l.row(i).sum(), 0.0);
        }
    }

    #[test]
    fn undirected_graphs_are_balanced(g in dyadic_graph()) {
        let sym = Digraph::from_weights(g.weights() + g.weights().transpose()).unwrap();
        prop_assert!(sym.is_balanced(1e-12));
        let l = sym.laplacian();
        for j in 0..sym.n() {
            prop_assert!(l.column(j).sum().abs() <= 1e-12);
        }
    }

    #[test]
    fn left_null_vector_is_positive_and_annihilates_l(seed in any::<u64>(), n in 2usize..=8, density in 0.0..0.6f64) {
        let g = common::strongly_connected(&mut common::rng(seed), n, density);
        let w = left_null_eigenvector(&g).unwrap();
        prop_assert!((w.transpose() * g.laplacian()).amax() <= 1e-10);
        prop_assert!(w.min() > 0.0);
        prop_assert!((w.sum() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spanning_tree_gives_one_zero_eigenvalue(seed in any::<u64>(), n in 2usize..=8) {
        let g = rooted_graph(seed, n);
        prop_assert!(g.has_spanning_tree());
        let spectrum = laplacian_spectrum(&g).unwrap();
        prop_assert_eq!(spectrum.iter().filter(|l| l.norm() <= 1e-8).count(), 1);
        for l in spectrum.iter().filter(|l| l.norm() > 1e-8) {
            prop_assert!(l.re > 0.0, "eigenvalue {}", l);
        }
    }

    #[test]
    fn gains_below_the_bound_are_stable(seed in any::<u64>(), n in 2usize..=8, frac in 0.01..0.99f64) {
        let g = rooted_graph(seed, n);
        let h = frac * step_size_bound(&g).unwrap();
        for l in laplacian_spectrum(&g).unwrap().iter().filter(|l| l.norm() > 1e-8) {
            prop_assert!((1.0 - l * h).norm() < 1.0);
        }
    }

    #[test]
    fn bound_scales_inversely_with_weights(seed in any::<u64>(), n in 2usize..=6, c in 0.01..100.0f64) {
        let g = common::strongly_connected(&mut common::rng(seed), n, 0.3);
        let base = step_size_bound(&g).unwrap();
        let scaled = step_size_bound(&g.scaled(c).unwrap()).unwrap();
        prop_assert!((scaled * c / base - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn constant_schedule_delta_graph_is_the_support(g in dyadic_graph(), window in 0.1..5.0f64) {
        let min_weight = g.weights().iter().cloned().filter(|&w| w > 0.0).fold(f64::INFINITY, f64::min);
        prop_assume!(min_weight.is_finite());
        let params = DeltaGraphParams::new(window, min_weight * window).unwrap();
        let schedule = SwitchingSchedule::constant(g.clone(), 0.7).unwrap();
        prop_assert_eq!(delta_graph(&schedule, params), g.support());
    }

    #[test]
    fn contraction_log_rate_is_negative(n in 2usize..=64, delta in 1e-3..1e3f64, window in 1e-3..1e3f64) {
        let log_rate = contraction_log_rate(n, delta, window).unwrap();
        prop_assert!(log_rate < 0.0 && log_rate.is_finite());
    }
}

#[test]
fn two_disjoint_cycles_have_no_spanning_tree() {
    let unit = |from, to| Edge { from, to, weight: 1.0 };
    let g = Digraph::from_edges(4, [unit(0, 1), unit(1, 0), unit(2, 3), unit(3, 2)]).unwrap();
    assert!(!g.has_spanning_tree());
    assert!(step_size_bound(&g).is_err());
    assert!(left_null_eigenvector(&g).is_err());
}
