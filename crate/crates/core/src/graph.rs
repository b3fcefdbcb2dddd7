//! Time-varying directed communication topologies.
//!
//! Nodes are indexed from 0 internally. Everything user facing (config files,
//! CLI output, `Display` impls) uses 1-based node labels.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A directed edge `from -> to` between two distinct compute nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

impl Edge {
    pub const fn new(from: usize, to: usize) -> Self {
        Edge { from, to }
    }

    /// Builds an edge from 1-based labels, as written in configs.
    pub fn one_based(from: usize, to: usize) -> Result<Self> {
        if from == 0 || to == 0 {
            return Err(Error::InvalidGraph(format!(
                "node labels are 1-based, got ({from},{to})"
            )));
        }
        Ok(Edge::new(from - 1, to - 1))
    }

    pub fn to_one_based(self) -> [usize; 2] {
        [self.from + 1, self.to + 1]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.from + 1, self.to + 1)
    }
}

/// Ordered list of distinct edges. The order is the canonical enumeration
/// used to lay out delay chains.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EdgeList {
    edges: Vec<Edge>,
}

impl EdgeList {
    /// Lexicographically ordered list of the given edges, duplicates removed.
    pub fn canonical<I: IntoIterator<Item = Edge>>(edges: I) -> Self {
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        EdgeList {
            edges: set.into_iter().collect(),
        }
    }

    /// Keeps the caller's order. Fails on duplicates.
    pub fn ordered(edges: Vec<Edge>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &edges {
            if !seen.insert(*e) {
                return Err(Error::InvalidGraph(format!("edge {e} listed twice")));
            }
        }
        Ok(EdgeList { edges })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.edges
    }

    pub fn position(&self, edge: Edge) -> Option<usize> {
        self.edges.iter().position(|e| *e == edge)
    }

    pub fn contains(&self, edge: Edge) -> bool {
        self.position(edge).is_some()
    }

    fn as_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().copied().collect()
    }
}

impl<'a> IntoIterator for &'a EdgeList {
    type Item = &'a Edge;
    type IntoIter = std::slice::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

/// A sequence of edge sets over `nodes` compute nodes, grouped into windows
/// of `window` consecutive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingDigraph {
    nodes: usize,
    window: usize,
    cyclic: bool,
    schedule: Vec<Vec<Edge>>,
    union: EdgeList,
}

impl TimeVaryingDigraph {
    /// Validates and builds a schedule.
    ///
    /// Every complete window must have the same edge union. `edge_order`, when
    /// given, must enumerate exactly that union and replaces the lexicographic
    /// order.
    pub fn new(
        nodes: usize,
        schedule: Vec<Vec<Edge>>,
        window: usize,
        cyclic: bool,
        edge_order: Option<Vec<Edge>>,
    ) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidGraph("node count must be positive".into()));
        }
        if window == 0 {
            return Err(Error::InvalidGraph("window length B must be positive".into()));
        }
        if schedule.is_empty() {
            return Err(Error::InvalidGraph("schedule is empty".into()));
        }
        if cyclic && !schedule.len().is_multiple_of(window) {
            return Err(Error::InvalidGraph(format!(
                "cyclic schedule length {} is not a multiple of B = {window}",
                schedule.len()
            )));
        }
        if schedule.len() < window {
            return Err(Error::InvalidGraph(format!(
                "schedule of length {} does not cover one window of B = {window}",
                schedule.len()
            )));
        }

        let mut slots = Vec::with_capacity(schedule.len());
        for (t, edges) in schedule.into_iter().enumerate() {
            for e in &edges {
                if e.from >= nodes || e.to >= nodes {
                    return Err(Error::InvalidGraph(format!(
                        "edge {e} at step {t} has an endpoint outside 1..{nodes}"
                    )));
                }
                if e.from == e.to {
                    return Err(Error::InvalidGraph(format!(
                        "self-loop {e} at step {t}; self-loops are implicit"
                    )));
                }
            }
            slots.push(EdgeList::canonical(edges).edges);
        }

        let windows = slots.len() / window;
        let union_of =
            |w: usize| -> BTreeSet<Edge> { slots[w * window..(w + 1) * window].iter().flatten().copied().collect() };
        let first = union_of(0);
        for w in 1..windows {
            let other = union_of(w);
            if other != first {
                let diff: Vec<String> = first.symmetric_difference(&other).map(|e| e.to_string()).collect();
                return Err(Error::InvalidGraph(format!(
                    "window {w} has a different edge union than window 0 (differs on {})",
                    diff.join(", ")
                )));
            }
        }

        let union = match edge_order {
            None => EdgeList::canonical(first),
            Some(order) => {
                let list = EdgeList::ordered(order)?;
                if list.as_set() != first {
                    return Err(Error::InvalidGraph(
                        "explicit edge order does not enumerate the union edge set".into(),
                    ));
                }
                list
            }
        };

        Ok(TimeVaryingDigraph {
            nodes,
            window,
            cyclic,
            schedule: slots,
            union,
        })
    }

    /// Convenience constructor for a cyclic schedule with lexicographic order.
    pub fn cyclic(nodes: usize, schedule: Vec<Vec<Edge>>, window: usize) -> Result<Self> {
        Self::new(nodes, schedule, window, true, None)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn period(&self) -> usize {
        self.schedule.len()
    }

    pub fn schedule(&self) -> &[Vec<Edge>] {
        &self.schedule
    }

    /// Number of complete windows in one pass over the schedule.
    pub fn windows(&self) -> usize {
        self.schedule.len() / self.window
    }

    /// The canonical union edge list `E_1..E_N`.
    pub fn union(&self) -> &EdgeList {
        &self.union
    }

    /// Active edges at step `t`. Runs always cycle through the stored schedule.
    pub fn edges_at(&self, t: usize) -> &[Edge] {
        &self.schedule[t % self.schedule.len()]
    }

    /// Union of the edge sets in `[window*B, (window+1)*B - 1]`, canonically ordered.
    pub fn union_edges(&self, window: usize) -> Result<EdgeList> {
        let windows = self.windows();
        let w = if self.cyclic {
            window % windows
        } else if window < windows {
            window
        } else {
            return Err(Error::WindowOutOfRange { window, windows });
        };
        let present: BTreeSet<Edge> = self.schedule[w * self.window..(w + 1) * self.window]
            .iter()
            .flatten()
            .copied()
            .collect();
        Ok(EdgeList {
            edges: self.union.iter().filter(|e| present.contains(e)).copied().collect(),
        })
    }

    /// Checks that every window's union graph is strongly connected.
    pub fn validate_b_connectivity(&self) -> ConnectivityReport {
        let windows = (0..self.windows())
            .map(|w| {
                // union_edges cannot fail for w < windows
                let union = self.union_edges(w).unwrap_or_default();
                let unreachable = strong_connectivity_witness(self.nodes, union.as_slice());
                WindowConnectivity {
                    window: w,
                    strongly_connected: unreachable.is_none(),
                    unreachable,
                }
            })
            .collect::<Vec<_>>();
        ConnectivityReport {
            passed: windows.iter().all(|w| w.strongly_connected),
            windows,
        }
    }
}

/// `d_j`: number of out-neighbours of `j` in `edges`, counting the implicit self-loop.
pub fn out_degree(edges: &[Edge], node: usize, nodes: usize) -> Result<usize> {
    if node >= nodes {
        return Err(Error::NodeOutOfRange { node, nodes });
    }
    Ok(edges.iter().filter(|e| e.from == node).count() + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowConnectivity {
    pub window: usize,
    pub strongly_connected: bool,
    /// A pair `(from, to)` with no directed path, when connectivity fails.
    pub unreachable: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityReport {
    pub windows: Vec<WindowConnectivity>,
    pub passed: bool,
}

impl ConnectivityReport {
    pub fn first_failure(&self) -> Option<&WindowConnectivity> {
        self.windows.iter().find(|w| !w.strongly_connected)
    }
}

fn reachable(nodes: usize, edges: &[Edge], start: usize, reverse: bool) -> Vec<bool> {
    let mut adj = vec![Vec::new(); nodes];
    for e in edges {
        if reverse {
            adj[e.to].push(e.from);
        } else {
            adj[e.from].push(e.to);
        }
    }
    let mut seen = vec![false; nodes];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

// Strongly connected iff node 0 reaches everyone and everyone reaches node 0.
fn strong_connectivity_witness(nodes: usize, edges: &[Edge]) -> Option<(usize, usize)> {
    let fwd = reachable(nodes, edges, 0, false);
    if let Some(v) = fwd.iter().position(|r| !r) {
        return Some((0, v));
    }
    let bwd = reachable(nodes, edges, 0, true);
    bwd.iter().position(|r| !r).map(|v| (v, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize, j: usize) -> Edge {
        Edge::one_based(i, j).unwrap()
    }

    fn example1() -> TimeVaryingDigraph {
        TimeVaryingDigraph::cyclic(3, vec![vec![e(1, 2)], vec![e(2, 3)], vec![e(3, 1)]], 3).unwrap()
    }

    #[test]
    fn union_of_example_cycle() {
        let g = example1();
        let u = g.union_edges(0).unwrap();
        assert_eq!(u.as_slice(), &[e(1, 2), e(2, 3), e(3, 1)]);
        // cyclic schedules wrap around
        assert_eq!(g.union_edges(7).unwrap(), u);
    }

    #[test]
    fn union_of_static_graph() {
        let edges = vec![e(2, 1), e(1, 2), e(3, 1)];
        let g = TimeVaryingDigraph::cyclic(3, vec![edges.clone()], 1).unwrap();
        assert_eq!(g.union_edges(0).unwrap(), EdgeList::canonical(edges));
    }

    #[test]
    fn union_of_empty_window() {
        let g = TimeVaryingDigraph::cyclic(3, vec![vec![], vec![]], 2).unwrap();
        assert!(g.union_edges(0).unwrap().is_empty());
    }

    #[test]
    fn non_cyclic_window_out_of_range() {
        let g = TimeVaryingDigraph::new(2, vec![vec![e(1, 2)], vec![e(2, 1)]], 2, false, None).unwrap();
        assert!(g.union_edges(0).is_ok());
        assert_eq!(g.union_edges(1), Err(Error::WindowOutOfRange { window: 1, windows: 1 }));
    }

    #[test]
    fn rejects_mismatched_window_unions() {
        let err = TimeVaryingDigraph::cyclic(2, vec![vec![e(1, 2)], vec![e(2, 1)]], 1).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn rejects_bad_edges_and_lengths() {
        assert!(TimeVaryingDigraph::cyclic(2, vec![vec![e(1, 1)]], 1).is_err());
        assert!(TimeVaryingDigraph::cyclic(2, vec![vec![e(1, 3)]], 1).is_err());
        assert!(TimeVaryingDigraph::cyclic(2, vec![vec![e(1, 2)]; 3], 2).is_err());
        assert!(TimeVaryingDigraph::cyclic(2, vec![], 1).is_err());
        assert!(Edge::one_based(0, 1).is_err());
    }

    #[test]
    fn explicit_edge_order() {
        let order = vec![e(3, 1), e(1, 2), e(2, 3)];
        let g = TimeVaryingDigraph::new(
            3,
            vec![vec![e(1, 2)], vec![e(2, 3)], vec![e(3, 1)]],
            3,
            true,
            Some(order.clone()),
        )
        .unwrap();
        assert_eq!(g.union().as_slice(), order.as_slice());
        assert_eq!(g.union_edges(0).unwrap().as_slice(), order.as_slice());

        let bad = TimeVaryingDigraph::new(3, vec![vec![e(1, 2)]], 1, true, Some(vec![e(2, 3)]));
        assert!(bad.is_err());
    }

    #[test]
    fn connectivity_examples() {
        assert!(example1().validate_b_connectivity().passed);

        let g = TimeVaryingDigraph::cyclic(2, vec![vec![e(1, 2)]], 1).unwrap();
        let report = g.validate_b_connectivity();
        assert!(!report.passed);
        assert_eq!(report.first_failure().unwrap().unreachable, Some((1, 0)));

        let complete: Vec<Edge> = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| Edge::new(i, j)))
            .collect();
        let g = TimeVaryingDigraph::cyclic(4, vec![complete.clone(), complete], 1).unwrap();
        assert!(g.validate_b_connectivity().passed);
    }

    #[test]
    fn out_degrees() {
        assert_eq!(out_degree(&[e(1, 2)], 0, 3).unwrap(), 2);
        assert_eq!(out_degree(&[], 2, 3).unwrap(), 1);
        let complete: Vec<Edge> = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| Edge::new(i, j)))
            .collect();
        for j in 0..4 {
            assert_eq!(out_degree(&complete, j, 4).unwrap(), 4);
        }
        assert_eq!(out_degree(&[], 3, 3), Err(Error::NodeOutOfRange { node: 3, nodes: 3 }));
    }

    #[test]
    fn single_node_is_connected() {
        let g = TimeVaryingDigraph::cyclic(1, vec![vec![]], 1).unwrap();
        assert!(g.validate_b_connectivity().passed);
    }
}
