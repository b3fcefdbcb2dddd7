//! Column-stochastic mixing matrices and their products.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{out_degree, Edge};

/// Allowed deviation of a column sum from one.
pub const COLUMN_SUM_TOL: f64 = 1e-12;

/// Dense square matrix with nonnegative entries and unit column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStochasticMatrix {
    entries: Array2<f64>,
}

impl ColumnStochasticMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        check_column_stochastic(entries.view())?;
        Ok(ColumnStochasticMatrix { entries })
    }

    pub(crate) fn from_entries_unchecked(entries: Array2<f64>) -> Self {
        debug_assert!(entries.is_square());
        ColumnStochasticMatrix { entries }
    }

    pub fn identity(n: usize) -> Self {
        ColumnStochasticMatrix {
            entries: Array2::eye(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[[row, col]]
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }

    /// `self * other`.
    pub fn compose(&self, other: &ColumnStochasticMatrix) -> Result<ColumnStochasticMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(ColumnStochasticMatrix {
            entries: self.entries.dot(&other.entries),
        })
    }

    pub fn apply(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        self.entries.dot(&v)
    }

    pub fn apply_rows(&self, z: ArrayView2<'_, f64>) -> Array2<f64> {
        self.entries.dot(&z)
    }

    /// Largest `|sum_i Q_ij - 1|` over columns.
    pub fn column_sum_deviation(&self) -> f64 {
        self.entries
            .columns()
            .into_iter()
            .map(|c| (c.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn check_column_stochastic(m: ArrayView2<'_, f64>) -> Result<()> {
    for ((i, j), &v) in m.indexed_iter() {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::NotColumnStochastic(format!("entry [{},{}] = {v}", i + 1, j + 1)));
        }
    }
    for (j, col) in m.columns().into_iter().enumerate() {
        let s = col.sum();
        if (s - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(Error::NotColumnStochastic(format!("column {} sums to {s}", j + 1)));
        }
    }
    Ok(())
}

/// Out-degree weights: `[P]_ij = 1/d_j` when `j` sends to `i` (including `i = j`).
pub fn build_p_matrix(edges: &[Edge], nodes: usize) -> Result<ColumnStochasticMatrix> {
    let mut p = Array2::zeros((nodes, nodes));
    for j in 0..nodes {
        let share = 1.0 / out_degree(edges, j, nodes)? as f64;
        p[[j, j]] = share;
        for e in edges.iter().filter(|e| e.from == j) {
            if e.to >= nodes {
                return Err(Error::NodeOutOfRange { node: e.to, nodes });
            }
            p[[e.to, j]] = share;
        }
    }
    Ok(ColumnStochasticMatrix::from_entries_unchecked(p))
}

/// `Q(t:s) = Q(t) Q(t-1) ... Q(s)` where `matrices[k]` is `Q(k)`; the identity when `t < s`.
pub fn transition_product(matrices: &[ColumnStochasticMatrix], t: usize, s: usize) -> Result<ColumnStochasticMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidParameter("transition product over an empty sequence".into()))?;
    let n = first.dim();
    if let Some(bad) = matrices.iter().find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    if t < s {
        return Ok(ColumnStochasticMatrix::identity(n));
    }
    if t >= matrices.len() {
        return Err(Error::InvalidParameter(format!(
            "Q({t}) requested but only {} matrices given",
            matrices.len()
        )));
    }
    let mut acc = matrices[s].clone();
    for m in &matrices[s + 1..=t] {
        acc = m.compose(&acc)?;
    }
    Ok(acc)
}

/// Row-wise spread `max_{j,j'} |Q_ij - Q_ij'|`.
pub fn column_spread(q: &ColumnStochasticMatrix, row: usize) -> f64 {
    let r = q.entries.row(row);
    let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}
