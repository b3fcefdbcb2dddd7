//! Built-in problem instances.

use std::fmt;
use std::str::FromStr;

use ndarray::{array, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Three nodes, rotating single-edge graphs, two relays per edge.
    Example1,
    /// Eight nodes, four rotating graphs, quadratic objective.
    Quad8,
    /// Same network as `quad8`, scalar sensor estimation.
    Sensor8,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1 => "example1",
            Preset::Quad8 => "quad8",
            Preset::Sensor8 => "sensor8",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" => Ok(Preset::Example1),
            "quad8" => Ok(Preset::Quad8),
            "sensor8" => Ok(Preset::Sensor8),
            other => Err(Error::Config(format!("unknown preset `{other}`"))),
        }
    }
}

fn edges(pairs: &[(usize, usize)]) -> Vec<Edge> {
    pairs
        .iter()
        .map(|&(i, j)| Edge::one_based(i, j).expect("preset edges are 1-based"))
        .collect()
}

/// G1, G2, G3 of the three-node example, one directed edge each.
pub fn example1_schedule() -> Vec<Vec<Edge>> {
    vec![edges(&[(1, 2)]), edges(&[(2, 3)]), edges(&[(3, 1)])]
}

/// The four eight-node graphs, read off the columns of their weight matrices.
pub fn eight_node_schedule() -> Vec<Vec<Edge>> {
    vec![
        edges(&[(1, 3), (5, 8)]),
        edges(&[(2, 5), (4, 7), (6, 1)]),
        edges(&[(2, 4), (8, 6)]),
        edges(&[(3, 2), (5, 1), (7, 6)]),
    ]
}

/// Augmented matrices Q1, Q2, Q3 of the three-node example with two relays
/// per edge, as reference values (9 x 9, 0-based rows).
pub fn example1_golden() -> [Array2<f64>; 3] {
    let q1 = array![
        [0.5, 0., 0., 0., 0., 0., 0., 0., 1.],
        [0., 1., 0., 0., 1., 0., 0., 0., 0.],
        [0., 0., 1., 0., 0., 0., 1., 0., 0.],
        [0.5, 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 1., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 1., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 1., 0.],
    ];
    let q2 = array![
        [1., 0., 0., 0., 0., 0., 0., 0., 1.],
        [0., 0.5, 0., 0., 1., 0., 0., 0., 0.],
        [0., 0., 1., 0., 0., 0., 1., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 1., 0., 0., 0., 0., 0.],
        [0., 0.5, 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 1., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 1., 0.],
    ];
    let q3 = array![
        [1., 0., 0., 0., 0., 0., 0., 0., 1.],
        [0., 1., 0., 0., 1., 0., 0., 0., 0.],
        [0., 0., 0.5, 0., 0., 0., 1., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 1., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 1., 0., 0., 0.],
        [0., 0., 0.5, 0., 0., 0., 0., 0., 0.],
        [0., 0., 0., 0., 0., 0., 0., 1., 0.],
    ];
    [q1, q2, q3]
}

/// Published weight matrices of the four eight-node graphs.
pub fn eight_node_golden() -> [Array2<f64>; 4] {
    let mut out = [(); 4].map(|_| Array2::<f64>::eye(8));
    let halves: [&[(usize, usize)]; 4] = [
        &[(1, 3), (5, 8)],
        &[(2, 5), (4, 7), (6, 1)],
        &[(2, 4), (8, 6)],
        &[(3, 2), (5, 1), (7, 6)],
    ];
    for (q, pairs) in out.iter_mut().zip(halves) {
        for &(from, to) in pairs {
            q[[from - 1, from - 1]] = 0.5;
            q[[to - 1, from - 1]] = 0.5;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::build_p_matrix;

    #[test]
    fn names_round_trip() {
        for p in [Preset::Example1, Preset::Quad8, Preset::Sensor8] {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn eight_node_weights_match_reference() {
        for (edges, golden) in eight_node_schedule().iter().zip(eight_node_golden()) {
            assert_eq!(build_p_matrix(edges, 8).unwrap().view(), golden);
        }
    }
}
