//! Time-varying topologies.

use serde::{Deserialize, Serialize};

use super::Digraph;
use crate::{Error, Matrix, Result};

/// One piece of a periodic schedule: graph `graph` is active for `duration`
/// seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub graph: usize,
    pub duration: f64,
}

/// Window length `T` and integral threshold `delta` of a delta-graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaGraphParams {
    pub window: f64,
    pub delta: f64,
}

impl DeltaGraphParams {
    pub fn new(window: f64, delta: f64) -> Result<Self> {
        if !(window.is_finite() && window > 0.0) || !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "delta-graph needs window > 0 and delta > 0, got window = {window}, delta = {delta}"
            )));
        }
        Ok(Self { window, delta })
    }
}

/// A piecewise-constant topology that repeats its segment list forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRecord", into = "ScheduleRecord")]
pub struct SwitchingSchedule {
    graphs: Vec<Digraph>,
    segments: Vec<Segment>,
    /// Persistence window the schedule is declared to satisfy, if any.
    connectivity: Option<DeltaGraphParams>,
    /// `starts[k]` is the offset of segment `k` within a period; the last
    /// entry is the period itself.
    starts: Vec<f64>,
}

impl SwitchingSchedule {
    pub fn new(graphs: Vec<Digraph>, segments: Vec<Segment>) -> Result<Self> {
        let n = graphs
            .first()
            .map(Digraph::n)
            .ok_or_else(|| Error::InvalidGraph("schedule has no graphs".into()))?;
        if let Some(g) = graphs.iter().find(|g| g.n() != n) {
            return Err(Error::InvalidGraph(format!(
                "schedule mixes graphs on {n} and {} nodes",
                g.n()
            )));
        }
        if segments.is_empty() {
            return Err(Error::InvalidGraph("schedule has no segments".into()));
        }
        let mut starts = Vec::with_capacity(segments.len() + 1);
        let mut acc = 0.0;
        for (k, seg) in segments.iter().enumerate() {
            if seg.graph >= graphs.len() {
                return Err(Error::InvalidGraph(format!(
                    "segment {k} references graph {} of {}",
                    seg.graph,
                    graphs.len()
                )));
            }
            if !(seg.duration.is_finite() && seg.duration > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "segment {k} has non-positive duration {}",
                    seg.duration
                )));
            }
            starts.push(acc);
            acc += seg.duration;
        }
        starts.push(acc);
        Ok(Self {
            graphs,
            segments,
            connectivity: None,
            starts,
        })
    }

    /// A schedule that holds one graph forever.
    pub fn constant(graph: Digraph, duration: f64) -> Result<Self> {
        Self::new(vec![graph], vec![Segment { graph: 0, duration }])
    }

    /// Attaches the persistence window used by delta-graph diagnostics.
    pub fn with_connectivity(mut self, params: DeltaGraphParams) -> Self {
        self.connectivity = Some(params);
        self
    }

    pub fn connectivity(&self) -> Option<DeltaGraphParams> {
        self.connectivity
    }

    pub fn n(&self) -> usize {
        self.graphs[0].n()
    }

    pub fn graphs(&self) -> &[Digraph] {
        &self.graphs
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn period(&self) -> f64 {
        self.starts[self.segments.len()]
    }

    /// Index of the segment active at time `t >= 0`; a segment owns its
    /// start time but not its end time.
    pub fn segment_index_at(&self, t: f64) -> usize {
        let r = t.rem_euclid(self.period());
        // partition_point returns the first start strictly greater than r
        let k = self.starts[..self.segments.len()].partition_point(|&s| s <= r);
        k.saturating_sub(1)
    }

    pub fn graph_at(&self, t: f64) -> &Digraph {
        &self.graphs[self.segments[self.segment_index_at(t)].graph]
    }

    pub fn segment_graph(&self, k: usize) -> &Digraph {
        &self.graphs[self.segments[k].graph]
    }

    /// `int_0^t A(s) ds` for `t >= 0`.
    fn cumulative(&self, t: f64) -> Matrix {
        let n = self.n();
        let period = self.period();
        let periods = (t / period).floor();
        let mut rem = t - periods * period;
        let mut full = Matrix::zeros(n, n);
        let mut partial = Matrix::zeros(n, n);
        for seg in &self.segments {
            let w = self.graphs[seg.graph].weights();
            full += w * seg.duration;
            if rem > 0.0 {
                let used = rem.min(seg.duration);
                partial += w * used;
                rem -= used;
            }
        }
        full * periods + partial
    }

    /// Window start offsets in `[0, period)` at which the sliding integral
    /// can change slope: segment starts, and segment starts shifted back by
    /// the window length.
    fn window_breakpoints(&self, window: f64) -> Vec<f64> {
        let period = self.period();
        let mut points: Vec<f64> = self.starts[..self.segments.len()]
            .iter()
            .flat_map(|&b| [b, (b - window).rem_euclid(period)])
            .map(|p| if p >= period { 0.0 } else { p })
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }
}

/// Entrywise minimum over all `t >= 0` of `int_t^{t+window} a_ij(s) ds`.
///
/// The sliding integral is piecewise linear in `t` with kinks only where
/// `t` or `t + window` crosses a segment boundary, so evaluating it at those
/// breakpoints is exact.
pub fn min_window_integrals(schedule: &SwitchingSchedule, window: f64) -> Matrix {
    let n = schedule.n();
    let mut best = Matrix::from_element(n, n, f64::INFINITY);
    for t in schedule.window_breakpoints(window) {
        let integral = schedule.cumulative(t + window) - schedule.cumulative(t);
        best.zip_apply(&integral, |b, v| *b = b.min(v));
    }
    best.fill_diagonal(0.0);
    best
}

/// Relative slack on the delta threshold; absorbs rounding in the integrals.
const DELTA_SLACK: f64 = 1e-12;

/// Unit-weight graph of the delta-edges of `schedule`: `(j, i)` is kept iff
/// every window of length `params.window` accumulates `a_ij >= params.delta`.
pub fn delta_graph(schedule: &SwitchingSchedule, params: DeltaGraphParams) -> Digraph {
    let threshold = params.delta * (1.0 - DELTA_SLACK);
    let minima = min_window_integrals(schedule, params.window);
    let weights = Matrix::from_fn(schedule.n(), schedule.n(), |i, j| {
        if i != j && minima[(i, j)] >= threshold {
            1.0
        } else {
            0.0
        }
    });
    Digraph::from_weights(weights).expect("0/1 matrix is a valid weight matrix")
}

/// `ln` of the consensus contraction rate of [`contraction_rate`].
///
/// Stays strictly negative even when `gamma` itself rounds to `1.0`.
pub fn contraction_log_rate(n: usize, delta: f64, window: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("contraction rate needs n >= 2, got {n}")));
    }
    DeltaGraphParams::new(window, delta)?;
    let half = (n / 2) as f64;
    let ln_x = -half * (8.0 * (n * n) as f64).ln();
    let ln_base = (-ln_x.exp()).ln_1p();
    let denom = ((1.0 / delta).floor() + 1.0) * half * window;
    Ok(ln_base / denom)
}

/// Geometric rate `gamma` of the transition-matrix bound for balanced
/// switching graphs whose delta-graph is strongly connected:
///
/// `gamma = (1 - (8 n^2)^(-floor(n/2)))^(1 / ((floor(1/delta) + 1) floor(n/2) T))`.
pub fn contraction_rate(n: usize, delta: f64, window: f64) -> Result<f64> {
    contraction_log_rate(n, delta, window).map(f64::exp)
}

/// A fixed graph or a periodic switching schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Topology {
    Fixed { graph: Digraph },
    Switching(SwitchingSchedule),
}

impl Topology {
    pub fn n(&self) -> usize {
        match self {
            Topology::Fixed { graph } => graph.n(),
            Topology::Switching(schedule) => schedule.n(),
        }
    }

    pub fn graph_at(&self, t: f64) -> &Digraph {
        match self {
            Topology::Fixed { graph } => graph,
            Topology::Switching(schedule) => schedule.graph_at(t),
        }
    }

    /// Every graph the topology can take.
    pub fn graphs(&self) -> &[Digraph] {
        match self {
            Topology::Fixed { graph } => std::slice::from_ref(graph),
            Topology::Switching(schedule) => schedule.graphs(),
        }
    }
}

impl From<Digraph> for Topology {
    fn from(graph: Digraph) -> Self {
        Topology::Fixed { graph }
    }
}

impl From<SwitchingSchedule> for Topology {
    fn from(schedule: SwitchingSchedule) -> Self {
        Topology::Switching(schedule)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRecord {
    graphs: Vec<Digraph>,
    segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    connectivity: Option<DeltaGraphParams>,
}

impl TryFrom<ScheduleRecord> for SwitchingSchedule {
    type Error = Error;

    fn try_from(r: ScheduleRecord) -> Result<Self> {
        let schedule = SwitchingSchedule::new(r.graphs, r.segments)?;
        Ok(match r.connectivity {
            Some(p) => schedule.with_connectivity(DeltaGraphParams::new(p.window, p.delta)?),
            None => schedule,
        })
    }
}

impl From<SwitchingSchedule> for ScheduleRecord {
    fn from(s: SwitchingSchedule) -> Self {
        Self {
            graphs: s.graphs,
            segments: s.segments,
            connectivity: s.connectivity,
        }
    }
}
