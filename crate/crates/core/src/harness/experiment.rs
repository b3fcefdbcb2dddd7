//! Running an experiment and turning trajectories into metrics.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use super::config::Experiment;
use super::metrics::{CurveTable, EnvelopeCheck, MetricsRecord, MetricsTable, Summary};
use crate::constants::{error_bound, ConvergenceConstants, DeltaMode};
use crate::delay::{augment_matrix, build_index_map, DelaySpec};
use crate::dual_averaging::{run, theorem1_envelope, ProximalMap, SubgradientSource, Trajectory};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeList};
use crate::matrix::ColumnStochasticMatrix;
use crate::objective::l2_norm;

/// Slack allowed below `f*` before a record counts as inconsistent.
pub const F_ERR_FLOOR: f64 = -1e-9;

/// What the metrics need from one step of any dual averaging variant.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub t: usize,
    pub alpha: f64,
    pub x_hat: Array2<f64>,
    pub consensus_err: Array1<f64>,
}

pub fn trace_of(trajectory: &Trajectory) -> Vec<TracePoint> {
    trajectory
        .records
        .iter()
        .map(|r| TracePoint {
            t: r.t,
            alpha: r.alpha,
            x_hat: r.x_hat.clone(),
            consensus_err: r.consensus_err.clone(),
        })
        .collect()
}

fn recorded(t: usize, stride: usize, last: usize) -> bool {
    t == 1 || t.is_multiple_of(stride) || t == last
}

/// PS-DDA on the experiment's instance.
pub fn run_trajectory(exp: &Experiment) -> Result<Trajectory> {
    run(
        &exp.network,
        &exp.objective,
        &exp.schedule,
        &exp.prox,
        exp.x0.clone(),
        exp.iterations,
    )
}

fn constants_of(exp: &Experiment) -> Option<ConvergenceConstants> {
    exp.network.constants().ok()
}

/// Builds the metrics table of a finished run.
pub fn tabulate(
    exp: &Experiment,
    algorithm: &str,
    trace: &[TracePoint],
    envelope: Option<EnvelopeCheck>,
) -> MetricsTable {
    let optimum = exp.objective.exact_optimum(&exp.set);
    let constants = constants_of(exp);
    let gamma = constants.as_ref().map(|c| c.gamma_with(DeltaMode::Provable));
    let (radius, lipschitz) = (exp.radius(), exp.lipschitz());
    let last = trace.last().map_or(0, |p| p.t);

    let mut records = Vec::new();
    let mut min_f_err = f64::INFINITY;
    let mut final_max = f64::NEG_INFINITY;
    for p in trace {
        if !recorded(p.t, exp.stride, last) {
            continue;
        }
        let bound = gamma.map_or(f64::NAN, |g| error_bound(p.t, radius, lipschitz, g));
        for (i, row) in p.x_hat.rows().into_iter().enumerate() {
            let f_err = exp.objective.value(row) - optimum.value;
            min_f_err = min_f_err.min(f_err);
            if p.t == last {
                final_max = final_max.max(f_err);
            }
            records.push(MetricsRecord {
                t: p.t,
                node: i + 1,
                f_err,
                consensus_err: p.consensus_err[i],
                alpha: p.alpha,
                bound,
            });
        }
    }

    let summary = Summary {
        algorithm: algorithm.to_string(),
        preset: exp.preset.map(|p| p.name().to_string()),
        seed: exp.seed,
        iterations: exp.iterations,
        stride: exp.stride,
        nodes: exp.network.nodes(),
        dim: exp.objective.dim(),
        tau_max: exp.network.delays().tau_max(),
        radius,
        lipschitz,
        optimum: optimum.point.to_vec(),
        optimal_value: optimum.value,
        final_max_f_err: final_max,
        min_f_err,
        corollary_bound: gamma.map(|g| error_bound(last.max(1), radius, lipschitz, g)),
        constants,
        envelope,
    };
    MetricsTable { records, summary }
}

/// Checks `f(x_hat_i(t)) - f* <= envelope_i(t)` at every step and node.
pub fn check_envelope(exp: &Experiment, trajectory: &Trajectory) -> EnvelopeCheck {
    let optimum = exp.objective.exact_optimum(&exp.set);
    let psi_star = exp.prox.psi(optimum.point.view());
    let env = theorem1_envelope(trajectory, psi_star, exp.lipschitz());
    let mut check = EnvelopeCheck {
        checked: 0,
        violations: 0,
        min_margin: f64::INFINITY,
    };
    for (k, r) in trajectory.records.iter().enumerate() {
        for (i, row) in r.x_hat.rows().into_iter().enumerate() {
            let f_err = exp.objective.value(row) - optimum.value;
            let margin = env[[k, i]] - f_err;
            check.checked += 1;
            check.min_margin = check.min_margin.min(margin);
            if margin < -1e-12 * env[[k, i]].abs().max(1.0) {
                check.violations += 1;
            }
        }
    }
    check
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: MetricsTable,
    pub trajectory: Trajectory,
}

/// Runs PS-DDA and tabulates it, including the envelope check.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentOutput> {
    let trajectory = run_trajectory(exp)?;
    let envelope = check_envelope(exp, &trajectory);
    let table = tabulate(exp, "ps-dda", &trace_of(&trajectory), Some(envelope));
    Ok(ExperimentOutput { table, trajectory })
}

pub fn write_table(table: &MetricsTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    table.write_csv(BufWriter::new(file))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineWeights {
    /// Lazy-Metropolis weights on the symmetrized union graph, every edge active every step.
    Doubly,
    /// The same column-stochastic matrices PS-DDA uses, without the weight correction.
    Column,
}

impl BaselineWeights {
    pub fn label(self) -> &'static str {
        match self {
            BaselineWeights::Doubly => "dda-doubly (simplified)",
            BaselineWeights::Column => "dda-column",
        }
    }
}

/// Lazy-Metropolis matrix `W_ij = 1 / (2 max(d_i, d_j))` on an undirected edge set.
pub fn lazy_metropolis(edges: &EdgeList, nodes: usize) -> Result<ColumnStochasticMatrix> {
    let mut degree = vec![0usize; nodes];
    for e in edges.iter() {
        degree[e.from] += 1;
    }
    let mut w = Array2::<f64>::zeros((nodes, nodes));
    for e in edges.iter() {
        if !edges.contains(Edge { from: e.to, to: e.from }) {
            return Err(Error::InvalidGraph(format!("edge {e} has no reverse")));
        }
        w[[e.to, e.from]] = 1.0 / (2.0 * degree[e.from].max(degree[e.to]) as f64);
    }
    for j in 0..nodes {
        let off: f64 = w.column(j).sum();
        w[[j, j]] = 1.0 - off;
    }
    ColumnStochasticMatrix::new(w)
}

/// The undirected closure of the union edge set. A reverse edge that is not in
/// the union inherits the delay of its counterpart.
pub fn symmetrized(union: &EdgeList, delays: &DelaySpec) -> Result<(EdgeList, DelaySpec)> {
    let edges = EdgeList::canonical(union.iter().flat_map(|e| [*e, Edge { from: e.to, to: e.from }]));
    let pairs = edges
        .iter()
        .map(|e| {
            let tau = delays
                .get(*e)
                .or_else(|| delays.get(Edge { from: e.to, to: e.from }))
                .ok_or(Error::MissingDelay(*e))?;
            Ok((*e, tau))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((edges, DelaySpec::from_pairs(pairs)?))
}

/// Mixing matrices the baseline cycles through.
fn baseline_matrices(exp: &Experiment, weights: BaselineWeights) -> Result<Vec<ColumnStochasticMatrix>> {
    match weights {
        BaselineWeights::Column => Ok(exp.network.period_matrices().to_vec()),
        BaselineWeights::Doubly => {
            let m = exp.network.nodes();
            let (edges, delays) = symmetrized(exp.network.graph().union(), exp.network.delays())?;
            let w = lazy_metropolis(&edges, m)?;
            let map = build_index_map(&edges, &delays, m)?;
            Ok(vec![augment_matrix(&w, edges.as_slice(), &map)?])
        }
    }
}

/// Dual averaging without push-sum: `z <- Q z + [g; 0]`, `x_i = Proj(z_i, alpha)`.
pub fn baseline_trace(exp: &Experiment, weights: BaselineWeights) -> Result<Vec<TracePoint>> {
    let mats = baseline_matrices(exp, weights)?;
    let m = exp.network.nodes();
    let n = mats[0].dim();
    let dim = exp.objective.dim();
    let mut z = Array2::<f64>::zeros((n, dim));
    let mut x = exp.x0.clone();
    let mut x_sum = Array2::<f64>::zeros((m, dim));
    let mut out = Vec::with_capacity(exp.iterations);
    for t in 0..exp.iterations {
        let mut next = mats[t % mats.len()].apply_rows(z.view());
        for i in 0..m {
            let g = exp.objective.subgradient(i, t, x.row(i));
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSubgradient { node: i, step: t });
            }
            let mut row = next.row_mut(i);
            row += &g;
        }
        z = next;
        let alpha = exp.schedule.step_size(t + 1)?;
        for i in 0..m {
            x.row_mut(i).assign(&exp.prox.project(z.row(i), alpha));
        }
        x_sum += &x;
        let z_bar = z.sum_axis(Axis(0)) / m as f64;
        let consensus_err = Array1::from_shape_fn(m, |i| l2_norm((&z.row(i) - &z_bar).view()));
        out.push(TracePoint {
            t: t + 1,
            alpha,
            x_hat: &x_sum / (t + 1) as f64,
            consensus_err,
        });
    }
    Ok(out)
}

pub fn baseline_dda(exp: &Experiment, weights: BaselineWeights) -> Result<MetricsTable> {
    let trace = baseline_trace(exp, weights)?;
    Ok(tabulate(exp, weights.label(), &trace, None))
}

fn max_series(table: &MetricsTable) -> Vec<(usize, f64)> {
    table.max_f_err_series()
}

/// PS-DDA against both baselines, as aligned max-f_err curves.
pub fn compare_baselines(exp: &Experiment) -> Result<CurveTable> {
    let ps = run_experiment(exp)?.table;
    let doubly = baseline_dda(exp, BaselineWeights::Doubly)?;
    let column = baseline_dda(exp, BaselineWeights::Column)?;
    CurveTable::from_series(vec![
        ("ps-dda".to_string(), max_series(&ps)),
        ("dda-doubly-simplified".to_string(), max_series(&doubly)),
        ("dda-column".to_string(), max_series(&column)),
    ])
}

/// PS-DDA with each uniform delay in `taus`, as aligned max-f_err curves.
pub fn delay_sweep(exp: &Experiment, taus: &[usize]) -> Result<CurveTable> {
    let mut series = Vec::with_capacity(taus.len());
    for &tau in taus {
        let variant = exp.with_uniform_delay(tau)?;
        let table = tabulate(&variant, "ps-dda", &trace_of(&run_trajectory(&variant)?), None);
        series.push((format!("tau={tau}"), max_series(&table)));
    }
    CurveTable::from_series(series)
}
