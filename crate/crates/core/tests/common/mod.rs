#![allow(dead_code)]

use ndarray::{array, Array2};
use psdda::{DelayedNetwork, Edge, TimeVaryingDigraph};

pub fn e(i: usize, j: usize) -> Edge {
    Edge::one_based(i, j).unwrap()
}

pub fn example1_graph() -> TimeVaryingDigraph {
    TimeVaryingDigraph::cyclic(3, vec![vec![e(1, 2)], vec![e(2, 3)], vec![e(3, 1)]], 3).unwrap()
}

pub fn example1(tau: usize) -> DelayedNetwork {
    DelayedNetwork::uniform(example1_graph(), tau).unwrap()
}

/// The three reference 9 x 9 matrices, typed in row by row.
pub fn golden_q() -> [Array2<f64>; 3] {
    let h = 0.5;
    [
        array![
            [h, 0., 0., 0., 0., 0., 0., 0., 1.],
            [0., 1., 0., 0., 1., 0., 0., 0., 0.],
            [0., 0., 1., 0., 0., 0., 1., 0., 0.],
            [h, 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 1., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 1., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 1., 0.],
        ],
        array![
            [1., 0., 0., 0., 0., 0., 0., 0., 1.],
            [0., h, 0., 0., 1., 0., 0., 0., 0.],
            [0., 0., 1., 0., 0., 0., 1., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 1., 0., 0., 0., 0., 0.],
            [0., h, 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 1., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 1., 0.],
        ],
        array![
            [1., 0., 0., 0., 0., 0., 0., 0., 1.],
            [0., 1., 0., 0., 1., 0., 0., 0., 0.],
            [0., 0., h, 0., 0., 0., 1., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 1., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 1., 0., 0., 0.],
            [0., 0., h, 0., 0., 0., 0., 0., 0.],
            [0., 0., 0., 0., 0., 0., 0., 1., 0.],
        ],
    ]
}

/// Plain triple-loop product, kept apart from the library's ndarray path.
pub fn matmul(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (n, k, p) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            let mut acc = 0.0;
            for l in 0..k {
                acc += a[[i, l]] * b[[l, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

pub fn max_column_deviation(q: &Array2<f64>) -> f64 {
    q.columns()
        .into_iter()
        .map(|c| (c.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}
