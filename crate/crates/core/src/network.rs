//! A validated graph schedule together with its delay layout and the
//! precomputed mixing matrices for one period of the schedule.

use crate::constants::ConvergenceConstants;
use crate::delay::{augment_matrix, build_index_map, AugmentedIndexMap, DelaySpec};
use crate::error::Result;
use crate::graph::{Edge, TimeVaryingDigraph};
use crate::matrix::{build_p_matrix, ColumnStochasticMatrix};

#[derive(Debug, Clone)]
pub struct DelayedNetwork {
    graph: TimeVaryingDigraph,
    delays: DelaySpec,
    map: AugmentedIndexMap,
    p: Vec<ColumnStochasticMatrix>,
    q: Vec<ColumnStochasticMatrix>,
}

impl DelayedNetwork {
    pub fn new(graph: TimeVaryingDigraph, delays: DelaySpec) -> Result<Self> {
        let map = build_index_map(graph.union(), &delays, graph.nodes())?;
        let mut p = Vec::with_capacity(graph.period());
        let mut q = Vec::with_capacity(graph.period());
        for edges in graph.schedule() {
            let pt = build_p_matrix(edges, graph.nodes())?;
            q.push(augment_matrix(&pt, edges, &map)?);
            p.push(pt);
        }
        Ok(DelayedNetwork {
            graph,
            delays,
            map,
            p,
            q,
        })
    }

    /// Same schedule with every union edge delayed by `tau`.
    pub fn uniform(graph: TimeVaryingDigraph, tau: usize) -> Result<Self> {
        let delays = DelaySpec::uniform(graph.union(), tau);
        Self::new(graph, delays)
    }

    pub fn graph(&self) -> &TimeVaryingDigraph {
        &self.graph
    }

    pub fn delays(&self) -> &DelaySpec {
        &self.delays
    }

    pub fn index_map(&self) -> &AugmentedIndexMap {
        &self.map
    }

    pub fn nodes(&self) -> usize {
        self.graph.nodes()
    }

    /// `m + tau`.
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn active_edges(&self, t: usize) -> &[Edge] {
        self.graph.edges_at(t)
    }

    pub fn p_at(&self, t: usize) -> &ColumnStochasticMatrix {
        &self.p[t % self.p.len()]
    }

    pub fn q_at(&self, t: usize) -> &ColumnStochasticMatrix {
        &self.q[t % self.q.len()]
    }

    /// The augmented matrices of one schedule period.
    pub fn period_matrices(&self) -> &[ColumnStochasticMatrix] {
        &self.q
    }

    pub fn constants(&self) -> Result<ConvergenceConstants> {
        ConvergenceConstants::new(self.nodes(), self.graph.window(), self.delays.tau_max())
    }

    /// Smallest compute-row mass `min_i sum_{j<m} [Q(t:0)]_ij` over `t < horizon`.
    pub fn empirical_delta(&self, horizon: usize) -> f64 {
        let m = self.nodes();
        let mut acc = ColumnStochasticMatrix::identity(self.dim());
        let mut delta = f64::INFINITY;
        for t in 0..horizon {
            // dimensions always agree within one network
            acc = self.q_at(t).compose(&acc).expect("matching dimensions");
            let view = acc.view();
            for i in 0..m {
                let mass: f64 = (0..m).map(|j| view[[i, j]]).sum();
                delta = delta.min(mass);
            }
        }
        delta
    }
}
