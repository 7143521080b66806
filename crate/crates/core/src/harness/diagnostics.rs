use serde::Serialize;

use crate::config::Tolerances;
use crate::graph::{
    contraction_log_rate, delta_graph, laplacian_spectrum, left_null_eigenvector, step_size_bound,
    DeltaGraphParams, Digraph, Edge, Topology,
};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphReport {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub strongly_connected: bool,
    pub spanning_tree_root: Option<usize>,
    pub balanced: bool,
    /// Laplacian eigenvalues as `[re, im]`.
    pub spectrum: Vec<[f64; 2]>,
    /// Discrete consensus gain bound; absent without a spanning tree.
    pub step_size_bound: Option<f64>,
    pub left_null_vector: Option<Vec<f64>>,
}

impl GraphReport {
    pub fn new(g: &Digraph, tol: &Tolerances) -> Result<Self> {
        let spectrum = laplacian_spectrum(g)?
            .into_iter()
            .map(|z| {
                // flush roundoff-level parts
                let clean = |v: f64| if v.abs() <= tol.spectral { 0.0 } else { v };
                [clean(z.re), clean(z.im)]
            })
            .collect();
        Ok(Self {
            n: g.n(),
            edges: g.edges(),
            strongly_connected: g.is_strongly_connected(),
            spanning_tree_root: g.spanning_tree_root(),
            balanced: g.is_balanced(tol.balance),
            spectrum,
            step_size_bound: step_size_bound(g).ok(),
            left_null_vector: left_null_eigenvector(g).ok().map(|w| w.as_slice().to_vec()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaGraphReport {
    pub window: f64,
    pub delta: f64,
    pub graph: GraphReport,
    pub contraction_rate: Option<f64>,
    pub contraction_log_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyReport {
    pub kind: &'static str,
    pub graphs: Vec<GraphReport>,
    pub delta_graph: Option<DeltaGraphReport>,
    /// Consensus gain under test and whether it lies in `(0, bound)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_within_bound: Option<bool>,
}

/// Connectivity, balance, spectra and gain bounds of every graph in
/// `topology`, plus the delta-graph of a switching schedule (`params`
/// overrides the schedule's own window and threshold).
pub fn diagnose(
    topology: &Topology,
    tol: &Tolerances,
    h: Option<f64>,
    params: Option<DeltaGraphParams>,
) -> Result<TopologyReport> {
    let graphs = topology
        .graphs()
        .iter()
        .map(|g| GraphReport::new(g, tol))
        .collect::<Result<Vec<_>>>()?;
    let (kind, delta) = match topology {
        Topology::Fixed { .. } => ("fixed", None),
        Topology::Switching(s) => {
            let delta = match params.or(s.connectivity()) {
                Some(p) => {
                    let dg = delta_graph(s, p);
                    let log_rate = contraction_log_rate(s.n(), p.delta, p.window).ok();
                    Some(DeltaGraphReport {
                        window: p.window,
                        delta: p.delta,
                        graph: GraphReport::new(&dg, tol)?,
                        contraction_rate: log_rate.map(f64::exp),
                        contraction_log_rate: log_rate,
                    })
                }
                None => None,
            };
            ("switching", delta)
        }
    };
    let h_within_bound = match (topology, h) {
        (Topology::Fixed { .. }, Some(h)) => {
            Some(graphs[0].step_size_bound.is_some_and(|b| h > 0.0 && h < b))
        }
        _ => None,
    };
    Ok(TopologyReport {
        kind,
        graphs,
        delta_graph: delta,
        h,
        h_within_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::paper::{paper_fixed_graph, paper_switching_schedule};

    #[test]
    fn fixed_report() {
        let topo = Topology::Fixed {
            graph: paper_fixed_graph(),
        };
        let r = diagnose(&topo, &Tolerances::default(), Some(0.25), None).unwrap();
        assert_eq!(r.kind, "fixed");
        assert_eq!(r.h_within_bound, Some(true));
        assert_eq!(r.graphs[0].spectrum[0], [0.0, 0.0]);
        assert!(r.graphs[0].spectrum[1..].iter().all(|z| (z[0] - 2.5).abs() < 1e-12));
        let w = r.graphs[0].left_null_vector.as_ref().unwrap();
        assert!(w.iter().all(|x| (x - 0.2).abs() < 1e-14));
        let r = diagnose(&topo, &Tolerances::default(), Some(0.6), None).unwrap();
        assert_eq!(r.h_within_bound, Some(false));
    }

    #[test]
    fn switching_report() {
        let topo = Topology::Switching(paper_switching_schedule());
        let r = diagnose(&topo, &Tolerances::default(), None, None).unwrap();
        assert_eq!(r.graphs.len(), 2);
        let d = r.delta_graph.unwrap();
        assert!(d.graph.strongly_connected);
        let gamma = d.contraction_rate.unwrap();
        assert!(gamma > 0.0 && gamma <= 1.0);
        assert!(d.contraction_log_rate.unwrap() < 0.0);
    }
}
