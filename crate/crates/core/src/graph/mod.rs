//! Weighted directed communication graphs.
//!
//! Weights follow the receiver-first convention: `a_ij > 0` means agent `i`
//! receives the state of agent `j`, i.e. information flows along the edge
//! `j -> i`. Row `i` of the weight matrix therefore lists the in-neighbours of
//! agent `i`, and the Laplacian row sums are in-weights.

mod schedule;
mod spectrum;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result};

pub use schedule::{
    contraction_log_rate, contraction_rate, delta_graph, min_window_integrals, DeltaGraphParams, Segment,
    SwitchingSchedule, Topology,
};
pub use spectrum::{laplacian_spectrum, left_null_eigenvector, step_size_bound};

/// One directed edge `from -> to` carrying weight `a_{to,from}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A weighted digraph on `n` agents with nonnegative weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    weights: Matrix,
}

impl Digraph {
    /// Builds a graph from a square weight matrix. Diagonal entries are
    /// discarded.
    pub fn from_weights(mut weights: Matrix) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        if weights.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "weight matrix is {}x{}, expected square",
                n,
                weights.ncols()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let a = weights[(i, j)];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "weight a[{i}][{j}] = {a} must be finite and nonnegative"
                    )));
                }
            }
            weights[(i, i)] = 0.0;
        }
        Ok(Self { weights })
    }

    /// Builds a graph from row-major weight rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidGraph(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Self::from_weights(Matrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds a graph on `n` nodes from an edge list. Repeated edges are
    /// rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut weights = Matrix::zeros(n, n);
        for Edge { from, to, weight } in edges {
            if from >= n || to >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {from} -> {to} references a node outside 0..{n}"
                )));
            }
            if from == to {
                return Err(Error::InvalidGraph(format!("self-loop on node {from}")));
            }
            if weights[(to, from)] != 0.0 {
                return Err(Error::InvalidGraph(format!("duplicate edge {from} -> {to}")));
            }
            weights[(to, from)] = weight;
        }
        Self::from_weights(weights)
    }

    /// The graph with no edges.
    pub fn empty(n: usize) -> Result<Self> {
        Self::from_weights(Matrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    /// `a_ij`: weight with which agent `i` receives from agent `j`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// In-neighbours `j` of `i` with their weights `a_ij > 0`.
    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n()).filter_map(move |j| {
            let a = self.weights[(i, j)];
            (a > 0.0).then_some((j, a))
        })
    }

    /// `sum_j a_ij`.
    pub fn in_weight(&self, i: usize) -> f64 {
        self.weights.row(i).sum()
    }

    /// `sum_j a_ji`.
    pub fn out_weight(&self, i: usize) -> f64 {
        self.weights.column(i).sum()
    }

    pub fn max_in_weight(&self) -> f64 {
        (0..self.n()).map(|i| self.in_weight(i)).fold(0.0, f64::max)
    }

    /// Edge list in `from -> to` form, ordered by receiver then sender.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n();
        let mut out = Vec::new();
        for to in 0..n {
            for from in 0..n {
                let weight = self.weights[(to, from)];
                if weight > 0.0 {
                    out.push(Edge { from, to, weight });
                }
            }
        }
        out
    }

    /// All weights multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_weights(&self.weights * factor)
    }

    /// Unit-weight graph with the same edge set.
    pub fn support(&self) -> Self {
        Self {
            weights: self.weights.map(|a| if a > 0.0 { 1.0 } else { 0.0 }),
        }
    }

    /// `L = diag(A 1) - A`. Every row sums to zero.
    pub fn laplacian(&self) -> Matrix {
        let n = self.n();
        let mut lap = -self.weights.clone();
        for i in 0..n {
            lap[(i, i)] = self.in_weight(i);
        }
        lap
    }

    /// Nodes reachable from `root` along information flow `j -> i`.
    fn reachable_from(&self, root: usize, reverse: bool) -> Vec<bool> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(j) = queue.pop_front() {
            for (i, s) in seen.iter_mut().enumerate() {
                let a = if reverse {
                    self.weights[(j, i)]
                } else {
                    self.weights[(i, j)]
                };
                if a > 0.0 && !*s {
                    *s = true;
                    queue.push_back(i);
                }
            }
        }
        seen
    }

    /// Every node reaches every other node along directed edges.
    pub fn is_strongly_connected(&self) -> bool {
        self.reachable_from(0, false).iter().all(|&r| r)
            && self.reachable_from(0, true).iter().all(|&r| r)
    }

    /// The smallest node from which all nodes are reachable, if any.
    pub fn spanning_tree_root(&self) -> Option<usize> {
        (0..self.n()).find(|&root| self.reachable_from(root, false).iter().all(|&r| r))
    }

    pub fn has_spanning_tree(&self) -> bool {
        self.spanning_tree_root().is_some()
    }

    /// In-weight equals out-weight at every node, within `tol`.
    pub fn is_balanced(&self, tol: f64) -> bool {
        (0..self.n()).all(|i| (self.in_weight(i) - self.out_weight(i)).abs() <= tol)
    }
}

/// Wire form of a graph: either a dense weight matrix or an edge list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum GraphRecord {
    Dense { weights: Vec<Vec<f64>> },
    Edges { n: usize, edges: Vec<Edge> },
}

impl TryFrom<GraphRecord> for Digraph {
    type Error = Error;

    fn try_from(record: GraphRecord) -> Result<Self> {
        match record {
            GraphRecord::Dense { weights } => Digraph::from_rows(&weights),
            GraphRecord::Edges { n, edges } => Digraph::from_edges(n, edges),
        }
    }
}

impl From<&Digraph> for GraphRecord {
    fn from(g: &Digraph) -> Self {
        GraphRecord::Edges {
            n: g.n(),
            edges: g.edges(),
        }
    }
}

impl Serialize for Digraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Digraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let record = GraphRecord::deserialize(d)?;
        Digraph::try_from(record).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn directed_cycle(n: usize) -> Digraph {
        Digraph::from_edges(
            n,
            (0..n).map(|j| Edge {
                from: j,
                to: (j + 1) % n,
                weight: 1.0,
            }),
        )
        .unwrap()
    }

    #[test]
    fn two_node_laplacian() {
        let g = Digraph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(g.laplacian(), Matrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn cycle_laplacian_entries() {
        // agent i receives from i - 1 (mod 5)
        let lap = directed_cycle(5).laplacian();
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j {
                    1.0
                } else if j == (i + 4) % 5 {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(lap[(i, j)], expected, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn diagonal_is_ignored() {
        let g = Digraph::from_rows(&[vec![7.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(g.weight(0, 0), 0.0);
        assert_eq!(g.weight(1, 1), 0.0);
        assert_eq!(g.laplacian()[(0, 0)], 1.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Digraph::from_rows(&[vec![0.0, -1.0], vec![0.0, 0.0]]).is_err());
        assert!(Digraph::from_rows(&[vec![0.0, f64::NAN], vec![0.0, 0.0]]).is_err());
        assert!(Digraph::from_rows(&[vec![0.0, 1.0]]).is_err());
        assert!(Digraph::from_rows(&[]).is_err());
        let dup = [Edge { from: 0, to: 1, weight: 1.0 }; 2];
        assert!(Digraph::from_edges(2, dup).is_err());
        assert!(Digraph::from_edges(2, [Edge { from: 0, to: 2, weight: 1.0 }]).is_err());
    }

    #[test]
    fn strong_connectivity() {
        assert!(directed_cycle(5).is_strongly_connected());
        // only a_12 > 0: node 1 receives from node 2, nothing flows back
        let one_way = Digraph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(!one_way.is_strongly_connected());
        let complete = Digraph::from_weights(Matrix::from_fn(4, 4, |i, j| 0.5 + (i + j) as f64))
            .unwrap();
        assert!(complete.is_strongly_connected());
        assert!(Digraph::empty(1).unwrap().is_strongly_connected());
    }

    #[test]
    fn spanning_trees() {
        let path = Digraph::from_edges(
            3,
            [
                Edge { from: 0, to: 1, weight: 1.0 },
                Edge { from: 1, to: 2, weight: 1.0 },
            ],
        )
        .unwrap();
        assert!(!path.is_strongly_connected());
        assert_eq!(path.spanning_tree_root(), Some(0));

        let two_pairs = Digraph::from_edges(
            4,
            [
                Edge { from: 0, to: 1, weight: 1.0 },
                Edge { from: 1, to: 0, weight: 1.0 },
                Edge { from: 2, to: 3, weight: 1.0 },
                Edge { from: 3, to: 2, weight: 1.0 },
            ],
        )
        .unwrap();
        assert!(!two_pairs.has_spanning_tree());
        assert!(directed_cycle(6).has_spanning_tree());
    }

    #[test]
    fn balance() {
        let undirected = Digraph::from_rows(&[
            vec![0.0, 2.0, 0.5],
            vec![2.0, 0.0, 1.0],
            vec![0.5, 1.0, 0.0],
        ])
        .unwrap();
        assert!(undirected.is_balanced(1e-12));
        assert!(directed_cycle(5).is_balanced(1e-12));
        let one_edge =
            Digraph::from_edges(3, [Edge { from: 1, to: 0, weight: 1.0 }]).unwrap();
        assert!(!one_edge.is_balanced(1e-12));
    }

    #[test]
    fn edge_and_dense_records_agree() {
        let dense: Digraph =
            serde_json::from_str(r#"{"weights": [[0, 1], [2, 0]]}"#).unwrap();
        let sparse: Digraph = serde_json::from_str(
            r#"{"n": 2, "edges": [{"from": 1, "to": 0, "weight": 1}, {"from": 0, "to": 1, "weight": 2}]}"#,
        )
        .unwrap();
        assert_eq!(dense, sparse);
        let back: Digraph = serde_json::from_str(&serde_json::to_string(&dense).unwrap()).unwrap();
        assert_eq!(back, dense);
    }
}
