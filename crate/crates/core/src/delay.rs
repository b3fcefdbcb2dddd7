//! Fixed per-edge communication delays modeled as chains of relay nodes.
//!
//! An edge `(i, j)` with delay `tau` gets `tau` relay nodes. When the edge is
//! active, `i` pushes the weight it would have sent to `j` into the first relay
//! instead; every relay forwards its whole content one hop per step and the
//! last relay feeds `j`. Compute nodes keep indices `0..m`; relay nodes follow
//! at `m..m+tau_total`, one contiguous block per edge in canonical edge order.

use std::collections::BTreeMap;

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeList};
use crate::matrix::{ColumnStochasticMatrix, COLUMN_SUM_TOL};

/// Delay length (in steps) of every union edge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DelaySpec {
    per_edge: BTreeMap<Edge, usize>,
}

impl DelaySpec {
    pub fn uniform(union: &EdgeList, tau: usize) -> Self {
        DelaySpec {
            per_edge: union.iter().map(|e| (*e, tau)).collect(),
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Edge, usize)>>(pairs: I) -> Result<Self> {
        let mut per_edge = BTreeMap::new();
        for (edge, tau) in pairs {
            if per_edge.insert(edge, tau).is_some() {
                return Err(Error::DuplicateDelay(edge));
            }
        }
        Ok(DelaySpec { per_edge })
    }

    pub fn get(&self, edge: Edge) -> Option<usize> {
        self.per_edge.get(&edge).copied()
    }

    pub fn tau_max(&self) -> usize {
        self.per_edge.values().copied().max().unwrap_or(0)
    }

    pub fn tau_total(&self) -> usize {
        self.per_edge.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, usize)> + '_ {
        self.per_edge.iter().map(|(e, t)| (*e, *t))
    }

    pub fn len(&self) -> usize {
        self.per_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_edge.is_empty()
    }
}

/// Relay chain of one union edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chain {
    pub edge: Edge,
    /// Global index of the first relay node (meaningless when `len == 0`).
    pub first: usize,
    pub len: usize,
}

impl Chain {
    /// Global index of relay `k` (0-based position along the chain).
    pub fn node(&self, k: usize) -> usize {
        debug_assert!(k < self.len);
        self.first + k
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.len
    }
}

/// Global layout of compute and relay nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedIndexMap {
    nodes: usize,
    dim: usize,
    chains: Vec<Chain>,
}

impl AugmentedIndexMap {
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// `m + tau`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn relay_count(&self) -> usize {
        self.dim - self.nodes
    }

    /// Chains in canonical edge order, including zero-length ones.
    pub fn chains(&self) -> &[Chain] {
        &self.chains
    }

    pub fn chain(&self, edge: Edge) -> Option<&Chain> {
        self.chains.iter().find(|c| c.edge == edge)
    }

    /// Global index of relay `k` (1-based, as in `d_{(i,j),k}`) on `edge`.
    pub fn chain_index(&self, edge: Edge, k: usize) -> Option<usize> {
        self.chain(edge).filter(|c| k >= 1 && k <= c.len).map(|c| c.node(k - 1))
    }

    /// The edge and 0-based chain position owning relay node `index`.
    pub fn relay_owner(&self, index: usize) -> Option<(Edge, usize)> {
        self.chains
            .iter()
            .find(|c| c.nodes().contains(&index))
            .map(|c| (c.edge, index - c.first))
    }
}

/// Lays out relay nodes for `union` with the given delays.
pub fn build_index_map(union: &EdgeList, delays: &DelaySpec, nodes: usize) -> Result<AugmentedIndexMap> {
    if let Some((edge, _)) = delays.iter().find(|(e, _)| !union.contains(*e)) {
        return Err(Error::UnknownDelayEdge(edge));
    }
    let mut next = nodes;
    let mut chains = Vec::with_capacity(union.len());
    for &edge in union {
        let len = delays.get(edge).ok_or(Error::MissingDelay(edge))?;
        chains.push(Chain { edge, first: next, len });
        next += len;
    }
    Ok(AugmentedIndexMap {
        nodes,
        dim: next,
        chains,
    })
}

/// Builds the `(m+tau) x (m+tau)` mixing matrix from the undelayed `p` and
/// the edges active at this step.
pub fn augment_matrix(
    p: &ColumnStochasticMatrix,
    active: &[Edge],
    map: &AugmentedIndexMap,
) -> Result<ColumnStochasticMatrix> {
    let m = map.nodes();
    if p.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: p.dim(),
        });
    }
    let mut q = Array2::zeros((map.dim(), map.dim()));
    q.slice_mut(s![..m, ..m]).assign(&p.view());

    for &edge in active {
        let chain = map
            .chain(edge)
            .ok_or_else(|| Error::InvalidGraph(format!("active edge {edge} is not in the union edge set")))?;
        if chain.len > 0 {
            let (i, j) = (edge.from, edge.to);
            let weight = p.get(j, i);
            q[[j, i]] -= weight;
            q[[chain.node(0), i]] = weight;
        }
    }
    for chain in map.chains().iter().filter(|c| c.len > 0) {
        for k in 0..chain.len - 1 {
            q[[chain.node(k + 1), chain.node(k)]] = 1.0;
        }
        q[[chain.edge.to, chain.node(chain.len - 1)]] = 1.0;
    }
    Ok(ColumnStochasticMatrix::from_entries_unchecked(q))
}

/// Structural checks on an augmented matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AugmentedReport {
    pub column_stochastic: bool,
    pub relay_columns_forward: bool,
    pub positive_self_loops: bool,
    pub issues: Vec<String>,
}

impl AugmentedReport {
    pub fn passed(&self) -> bool {
        self.column_stochastic && self.relay_columns_forward && self.positive_self_loops
    }
}

pub fn validate_augmented(q: &ColumnStochasticMatrix, map: &AugmentedIndexMap) -> AugmentedReport {
    let mut report = AugmentedReport {
        column_stochastic: true,
        relay_columns_forward: true,
        positive_self_loops: true,
        issues: Vec::new(),
    };
    if q.dim() != map.dim() {
        report.column_stochastic = false;
        report.relay_columns_forward = false;
        report.positive_self_loops = false;
        report
            .issues
            .push(format!("dimension {} but layout needs {}", q.dim(), map.dim()));
        return report;
    }
    let view = q.view();
    for (col, column) in view.columns().into_iter().enumerate() {
        let sum = column.sum();
        if (sum - 1.0).abs() > COLUMN_SUM_TOL || column.iter().any(|v| !(*v >= 0.0)) {
            report.column_stochastic = false;
            report
                .issues
                .push(format!("column {} sums to {sum} or has a negative entry", col + 1));
        }
        if col >= map.nodes() {
            let units = column.iter().filter(|v| **v == 1.0).count();
            let others = column.iter().filter(|v| **v != 0.0 && **v != 1.0).count();
            if units != 1 || others != 0 {
                report.relay_columns_forward = false;
                report
                    .issues
                    .push(format!("relay column {} is not a single forward link", col + 1));
            }
        }
    }
    for i in 0..map.nodes() {
        if !(q.get(i, i) > 0.0) {
            report.positive_self_loops = false;
            report.issues.push(format!("compute node {} has no self weight", i + 1));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::build_p_matrix;

    fn e(i: usize, j: usize) -> Edge {
        Edge::one_based(i, j).unwrap()
    }

    fn example_union() -> EdgeList {
        EdgeList::canonical([e(1, 2), e(2, 3), e(3, 1)])
    }

    #[test]
    fn example_layout() {
        let union = example_union();
        let map = build_index_map(&union, &DelaySpec::uniform(&union, 2), 3).unwrap();
        assert_eq!(map.dim(), 9);
        // 1-based indices (4,5), (6,7), (8,9)
        assert_eq!(map.chain_index(e(1, 2), 1), Some(3));
        assert_eq!(map.chain_index(e(1, 2), 2), Some(4));
        assert_eq!(map.chain_index(e(2, 3), 1), Some(5));
        assert_eq!(map.chain_index(e(2, 3), 2), Some(6));
        assert_eq!(map.chain_index(e(3, 1), 1), Some(7));
        assert_eq!(map.chain_index(e(3, 1), 2), Some(8));
        assert_eq!(map.chain_index(e(3, 1), 3), None);
        assert_eq!(map.relay_owner(6), Some((e(2, 3), 1)));
    }

    #[test]
    fn zero_delays_and_single_chain() {
        let union = example_union();
        let map = build_index_map(&union, &DelaySpec::uniform(&union, 0), 3).unwrap();
        assert_eq!(map.dim(), 3);
        assert_eq!(map.relay_count(), 0);

        let one = EdgeList::canonical([e(1, 2)]);
        let delays = DelaySpec::from_pairs([(e(1, 2), 3)]).unwrap();
        let map = build_index_map(&one, &delays, 2).unwrap();
        assert_eq!(map.dim(), 5);
        let idx: Vec<_> = (1..=3).map(|k| map.chain_index(e(1, 2), k).unwrap()).collect();
        assert_eq!(idx, vec![2, 3, 4]);
    }

    #[test]
    fn delay_spec_errors() {
        let union = example_union();
        let extra = DelaySpec::from_pairs([(e(1, 2), 1), (e(2, 3), 1), (e(3, 1), 1), (e(1, 3), 1)]).unwrap();
        assert_eq!(
            build_index_map(&union, &extra, 3),
            Err(Error::UnknownDelayEdge(e(1, 3)))
        );
        let missing = DelaySpec::from_pairs([(e(1, 2), 1), (e(3, 1), 1)]).unwrap();
        assert_eq!(build_index_map(&union, &missing, 3), Err(Error::MissingDelay(e(2, 3))));
        assert_eq!(
            DelaySpec::from_pairs([(e(1, 2), 1), (e(1, 2), 2)]),
            Err(Error::DuplicateDelay(e(1, 2)))
        );
    }

    #[test]
    fn zero_delay_augmentation_is_identity_map() {
        let union = example_union();
        let map = build_index_map(&union, &DelaySpec::uniform(&union, 0), 3).unwrap();
        for active in [vec![e(1, 2)], vec![e(2, 3), e(3, 1)], vec![]] {
            let p = build_p_matrix(&active, 3).unwrap();
            let q = augment_matrix(&p, &active, &map).unwrap();
            assert_eq!(q, p);
        }
    }

    #[test]
    fn rejects_inconsistent_inputs() {
        let union = example_union();
        let map = build_index_map(&union, &DelaySpec::uniform(&union, 1), 3).unwrap();
        let p = build_p_matrix(&[e(1, 3)], 3).unwrap();
        assert!(augment_matrix(&p, &[e(1, 3)], &map).is_err());
        let p2 = build_p_matrix(&[], 2).unwrap();
        assert!(augment_matrix(&p2, &[], &map).is_err());
    }

    #[test]
    fn validation_flags_broken_relay() {
        let union = example_union();
        let map = build_index_map(&union, &DelaySpec::uniform(&union, 2), 3).unwrap();
        let p = build_p_matrix(&[e(1, 2)], 3).unwrap();
        let q = augment_matrix(&p, &[e(1, 2)], &map).unwrap();
        assert!(validate_augmented(&q, &map).passed());

        let mut broken = q.into_inner();
        broken[[4, 3]] = 0.0;
        let broken = ColumnStochasticMatrix::from_entries_unchecked(broken);
        let report = validate_augmented(&broken, &map);
        assert!(!report.passed());
        assert!(!report.column_stochastic);
        assert!(!report.relay_columns_forward);
    }

    #[test]
    fn identity_without_delays_passes() {
        let union = EdgeList::default();
        let map = build_index_map(&union, &DelaySpec::default(), 3).unwrap();
        let report = validate_augmented(&ColumnStochasticMatrix::identity(3), &map);
        assert!(report.passed());
    }
}
