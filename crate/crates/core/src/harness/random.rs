//! Seeded random instances for the property suites.

use ndarray::Array3;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::delay::DelaySpec;
use crate::dual_averaging::ScriptedSubgradients;
use crate::error::Result;
use crate::graph::{Edge, EdgeList, TimeVaryingDigraph};
use crate::network::DelayedNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub max_window: usize,
    /// Windows per schedule period.
    pub max_windows: usize,
    pub max_delay: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            min_nodes: 2,
            max_nodes: 6,
            max_window: 3,
            max_windows: 2,
            max_delay: 3,
        }
    }
}

/// A strongly connected union (a random Hamiltonian cycle plus extra edges),
/// spread over the steps of each window so that every window has that union.
pub fn random_graph<R: Rng>(shape: &InstanceShape, rng: &mut R) -> Result<TimeVaryingDigraph> {
    let m = rng.random_range(shape.min_nodes..=shape.max_nodes);
    let window = rng.random_range(1..=shape.max_window);
    let windows = rng.random_range(1..=shape.max_windows);

    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut edges: Vec<Edge> = (0..m)
        .map(|k| Edge {
            from: order[k],
            to: order[(k + 1) % m],
        })
        .collect();
    for from in 0..m {
        for to in 0..m {
            if from != to && rng.random_bool(0.2) {
                edges.push(Edge { from, to });
            }
        }
    }
    let union = EdgeList::canonical(edges);

    let mut schedule = vec![Vec::new(); window * windows];
    for w in 0..windows {
        for e in union.iter() {
            let home = rng.random_range(0..window);
            schedule[w * window + home].push(*e);
            for slot in 0..window {
                if slot != home && rng.random_bool(0.25) {
                    schedule[w * window + slot].push(*e);
                }
            }
        }
    }
    for slot in &mut schedule {
        slot.sort();
    }
    TimeVaryingDigraph::cyclic(m, schedule, window)
}

pub fn random_delays<R: Rng>(union: &EdgeList, max_delay: usize, rng: &mut R) -> DelaySpec {
    DelaySpec::from_pairs(union.iter().map(|e| (*e, rng.random_range(0..=max_delay))))
        .expect("union edges are distinct")
}

pub fn random_network<R: Rng>(shape: &InstanceShape, rng: &mut R) -> Result<DelayedNetwork> {
    let graph = random_graph(shape, rng)?;
    let delays = random_delays(graph.union(), shape.max_delay, rng);
    DelayedNetwork::new(graph, delays)
}

/// Subgradients uniform on `[-1, 1]`, independent of the iterates.
pub fn random_subgradients<R: Rng>(steps: usize, nodes: usize, dim: usize, rng: &mut R) -> ScriptedSubgradients {
    ScriptedSubgradients::new(Array3::from_shape_simple_fn((steps, nodes, dim), || {
        rng.random_range(-1.0..=1.0)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::seeds::{stream, Stream};

    #[test]
    fn random_graphs_are_valid() {
        let mut rng = stream(1, Stream::Instances);
        for _ in 0..200 {
            let net = random_network(&InstanceShape::default(), &mut rng).unwrap();
            assert!(net.graph().validate_b_connectivity().passed);
            assert!((2..=6).contains(&net.nodes()));
            assert!(net.delays().tau_max() <= 3);
        }
    }
}
