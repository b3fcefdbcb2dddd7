//! Push-sum distributed dual averaging over the delay-augmented network.
//!
//! Every node of the augmented system (compute and relay) carries a push-sum
//! weight `w` and a dual vector `z`. Per step:
//!
//! ```text
//! w <- Q(t) w
//! z <- Q(t) z + g(t)          (g is zero on relay nodes)
//! x_i <- Proj(z_i / w_i, alpha(t+1))   for compute nodes
//! ```
//!
//! where `Proj(v, a) = argmin_{x in X} <v, x> + psi(x) / a` and
//! `psi(x) = ||x||^2 / 2`, which makes `Proj(v, a)` the Euclidean projection
//! of `-a v` onto `X`.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::matrix::ColumnStochasticMatrix;
use crate::network::DelayedNetwork;
use crate::objective::{l2_norm, FeasibleSet, Objective};

/// Something that hands out `g_i(t)` given the node's current iterate.
pub trait SubgradientSource {
    fn subgradient(&self, node: usize, step: usize, x: ArrayView1<'_, f64>) -> Array1<f64>;
}

impl SubgradientSource for Objective {
    fn subgradient(&self, node: usize, _step: usize, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.value_and_subgradient(node, x).1
    }
}

/// A fixed table of subgradients indexed by step, independent of the iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedSubgradients {
    // steps x nodes x dim
    table: ndarray::Array3<f64>,
}

impl ScriptedSubgradients {
    pub fn new(table: ndarray::Array3<f64>) -> Self {
        ScriptedSubgradients { table }
    }

    pub fn steps(&self) -> usize {
        self.table.len_of(Axis(0))
    }
}

impl SubgradientSource for ScriptedSubgradients {
    fn subgradient(&self, node: usize, step: usize, _x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.table.slice(s![step % self.steps(), node, ..]).to_owned()
    }
}

/// Proximal map `Proj(v, alpha) = argmin_{x in X} <v, x> + psi(x) / alpha`.
pub trait ProximalMap {
    fn project(&self, v: ArrayView1<'_, f64>, alpha: f64) -> Array1<f64>;
    fn psi(&self, x: ArrayView1<'_, f64>) -> f64;
    fn contains(&self, x: ArrayView1<'_, f64>) -> bool;
}

/// `psi(x) = ||x||^2 / 2` on a feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanProx {
    pub set: FeasibleSet,
}

impl EuclideanProx {
    pub fn new(set: FeasibleSet) -> Self {
        EuclideanProx { set }
    }

    /// `sup_{x in X} psi(x)`, a valid `R^2` for the step-size rule.
    pub fn psi_bound(&self) -> f64 {
        0.5 * self.set.max_euclidean_norm().powi(2)
    }
}

impl ProximalMap for EuclideanProx {
    fn project(&self, v: ArrayView1<'_, f64>, alpha: f64) -> Array1<f64> {
        self.set.project((-alpha * &v).view())
    }

    fn psi(&self, x: ArrayView1<'_, f64>) -> f64 {
        0.5 * x.dot(&x)
    }

    fn contains(&self, x: ArrayView1<'_, f64>) -> bool {
        self.set.contains(x)
    }
}

pub fn proximal_projection(v: ArrayView1<'_, f64>, alpha: f64, set: &FeasibleSet) -> Result<Array1<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive and finite, got {alpha}"
        )));
    }
    Ok(EuclideanProx::new(*set).project(v, alpha))
}

/// Non-increasing step sizes `alpha(t)`, `t >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `scale / sqrt(t)`.
    Basic { scale: f64 },
    /// `R / (L sqrt(1 + 6 Gamma)) / sqrt(t)`.
    Optimal { radius: f64, lipschitz: f64, gamma: f64 },
    /// Explicit values for `t = 1..=len`.
    Custom(Vec<f64>),
}

impl StepSchedule {
    pub fn basic(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step scale must be positive, got {scale}"
            )));
        }
        Ok(StepSchedule::Basic { scale })
    }

    pub fn optimal(radius: f64, lipschitz: f64, gamma: f64) -> Result<Self> {
        let schedule = StepSchedule::Optimal {
            radius,
            lipschitz,
            gamma,
        };
        let first = schedule.step_size(1)?;
        if !(first > 0.0) || !first.is_finite() || !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "optimal step size alpha(1) = {first} is not a positive number \
                 (R = {radius}, L = {lipschitz}, Gamma = {gamma})"
            )));
        }
        Ok(schedule)
    }

    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty step table".into()));
        }
        if values.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter("step sizes must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter("step sizes must be non-increasing".into()));
        }
        Ok(StepSchedule::Custom(values))
    }

    pub fn step_size(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(Error::StepAtZero);
        }
        let root = (t as f64).sqrt();
        match self {
            StepSchedule::Basic { scale } => Ok(scale / root),
            StepSchedule::Optimal {
                radius,
                lipschitz,
                gamma,
            } => Ok(crate::constants::optimal_step(*radius, *lipschitz, *gamma, t)),
            StepSchedule::Custom(values) => values.get(t - 1).copied().ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "custom step table has {} entries, alpha({t}) requested",
                    values.len()
                ))
            }),
        }
    }
}

/// Full state of the augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    t: usize,
    nodes: usize,
    w: Array1<f64>,
    z: Array2<f64>,
    x: Array2<f64>,
    x_sum: Array2<f64>,
}

impl SystemState {
    /// `w = 1` and `z = 0` on compute nodes, `w = 0` and `z = 0` on relays.
    pub fn init<P: ProximalMap>(nodes: usize, relays: usize, x0: Array2<f64>, prox: &P) -> Result<Self> {
        if x0.nrows() != nodes {
            return Err(Error::DimensionMismatch {
                expected: nodes,
                found: x0.nrows(),
            });
        }
        if let Some(node) = x0.rows().into_iter().position(|r| !prox.contains(r)) {
            return Err(Error::InfeasibleStart { node });
        }
        let dim = x0.ncols();
        let n = nodes + relays;
        let mut w = Array1::zeros(n);
        w.slice_mut(s![..nodes]).fill(1.0);
        Ok(SystemState {
            t: 0,
            nodes,
            w,
            z: Array2::zeros((n, dim)),
            x_sum: Array2::zeros((nodes, dim)),
            x: x0,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    /// All `m + tau` weights.
    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.w.view()
    }

    /// All `m + tau` dual vectors, one per row.
    pub fn duals(&self) -> ArrayView2<'_, f64> {
        self.z.view()
    }

    /// Primal iterates of compute nodes.
    pub fn iterates(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    /// `x_hat_i(t) = (1/t) sum_{s=1..t} x_i(s)`; the initial point when `t = 0`.
    pub fn running_average(&self) -> Array2<f64> {
        if self.t == 0 {
            self.x.clone()
        } else {
            &self.x_sum / self.t as f64
        }
    }

    /// `z_bar = (1/m) sum over all m + tau nodes of z_i`.
    pub fn average_dual(&self) -> Array1<f64> {
        self.z.sum_axis(Axis(0)) / self.nodes as f64
    }

    /// `||z_i / w_i - z_bar||` for each compute node.
    pub fn consensus_errors(&self) -> Array1<f64> {
        let zbar = self.average_dual();
        Array1::from_shape_fn(self.nodes, |i| {
            let ratio = &self.z.row(i) / self.w[i];
            l2_norm((&ratio - &zbar).view())
        })
    }

    /// Advances one step with mixing matrix `q` and compute-node subgradients `g` (m x d).
    pub fn step<P: ProximalMap>(
        &mut self,
        q: &ColumnStochasticMatrix,
        subgradients: ArrayView2<'_, f64>,
        schedule: &StepSchedule,
        prox: &P,
    ) -> Result<()> {
        if q.dim() != self.w.len() {
            return Err(Error::DimensionMismatch {
                expected: self.w.len(),
                found: q.dim(),
            });
        }
        if subgradients.dim() != (self.nodes, self.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "subgradients are {:?}, expected ({}, {})",
                subgradients.dim(),
                self.nodes,
                self.dim()
            )));
        }
        if let Some(((node, _), _)) = subgradients.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSubgradient { node, step: self.t });
        }
        let alpha = schedule.step_size(self.t + 1)?;

        let w = q.apply(self.w.view());
        let mut z = q.apply_rows(self.z.view());
        {
            let mut head = z.slice_mut(s![..self.nodes, ..]);
            head += &subgradients;
        }
        for i in 0..self.nodes {
            if !(w[i] > 0.0) {
                return Err(Error::NonPositiveWeight {
                    node: i,
                    weight: w[i],
                    step: self.t + 1,
                });
            }
        }
        for i in 0..self.nodes {
            let ratio = &z.row(i) / w[i];
            let xi = prox.project(ratio.view(), alpha);
            self.x.row_mut(i).assign(&xi);
        }
        self.w = w;
        self.z = z;
        self.t += 1;
        self.x_sum += &self.x;
        Ok(())
    }
}

/// Diagnostics recorded after each step (time `t >= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub alpha: f64,
    /// Compute-node weights.
    pub w: Array1<f64>,
    /// Compute-node dual vectors.
    pub z: Array2<f64>,
    pub x: Array2<f64>,
    pub x_hat: Array2<f64>,
    pub z_bar: Array1<f64>,
    /// `Proj(z_bar(t), alpha(t))`.
    pub y: Array1<f64>,
    pub consensus_err: Array1<f64>,
    /// Sum of all `m + tau` weights.
    pub total_weight: f64,
    /// Sum of all `m + tau` dual vectors.
    pub total_dual: Array1<f64>,
    /// `sum_{s < t} sum_i g_i(s)`.
    pub cumulative_subgradient: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub nodes: usize,
    pub dim: usize,
    pub records: Vec<StepRecord>,
    pub final_state: SystemState,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    /// Compute-node `(w, z)` per step, the shape compared against the event-driven simulator.
    pub fn compute_states(&self) -> Vec<(Array1<f64>, Array2<f64>)> {
        self.records.iter().map(|r| (r.w.clone(), r.z.clone())).collect()
    }
}

/// Runs `iterations` steps over `network`, cycling its schedule.
pub fn run<S, P>(
    network: &DelayedNetwork,
    source: &S,
    schedule: &StepSchedule,
    prox: &P,
    x0: Array2<f64>,
    iterations: usize,
) -> Result<Trajectory>
where
    S: SubgradientSource + ?Sized,
    P: ProximalMap,
{
    if iterations == 0 {
        return Err(Error::InvalidParameter("at least one iteration is required".into()));
    }
    let m = network.nodes();
    let dim = x0.ncols();
    let mut state = SystemState::init(m, network.dim() - m, x0, prox)?;
    let mut records = Vec::with_capacity(iterations);
    let mut cumulative = Array1::zeros(dim);
    let mut g = Array2::zeros((m, dim));

    for t in 0..iterations {
        for i in 0..m {
            let gi = source.subgradient(i, t, state.x.row(i));
            if gi.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: gi.len(),
                });
            }
            g.row_mut(i).assign(&gi);
        }
        state.step(network.q_at(t), g.view(), schedule, prox)?;
        cumulative += &g.sum_axis(Axis(0));

        let alpha = schedule.step_size(state.t)?;
        let z_bar = state.average_dual();
        records.push(StepRecord {
            t: state.t,
            alpha,
            w: state.w.slice(s![..m]).to_owned(),
            z: state.z.slice(s![..m, ..]).to_owned(),
            x: state.x.clone(),
            x_hat: state.running_average(),
            y: prox.project(z_bar.view(), alpha),
            z_bar,
            consensus_err: state.consensus_errors(),
            total_weight: state.w.sum(),
            total_dual: state.z.sum_axis(Axis(0)),
            cumulative_subgradient: cumulative.clone(),
        });
    }
    Ok(Trajectory {
        nodes: m,
        dim,
        records,
        final_state: state,
    })
}

/// Right side of the basic per-node envelope at horizon `T`:
///
/// ```text
/// L/T sum_t alpha(t) e_i(t) + L^2/(2T) sum_t alpha(t) + psi(x*)/(T alpha(T))
///   + 2L/(mT) sum_t sum_j alpha(t) e_j(t)
/// ```
///
/// with `e_j(t) = ||z_j(t)/w_j(t) - z_bar(t)||`. The first network term uses
/// node `i`, the last averages over all compute nodes.
pub fn theorem1_rhs(
    trajectory: &Trajectory,
    node: usize,
    psi_star: f64,
    lipschitz: f64,
    horizon: usize,
) -> Result<f64> {
    if horizon == 0 || horizon > trajectory.records.len() {
        return Err(Error::MissingDiagnostics(format!(
            "horizon {horizon} but {} recorded steps",
            trajectory.records.len()
        )));
    }
    if node >= trajectory.nodes {
        return Err(Error::NodeOutOfRange {
            node,
            nodes: trajectory.nodes,
        });
    }
    let m = trajectory.nodes as f64;
    let t_f = horizon as f64;
    let (mut own, mut all, mut alphas) = (0.0, 0.0, 0.0);
    for r in &trajectory.records[..horizon] {
        own += r.alpha * r.consensus_err[node];
        all += r.alpha * r.consensus_err.sum();
        alphas += r.alpha;
    }
    let alpha_t = trajectory.records[horizon - 1].alpha;
    Ok(lipschitz / t_f * own
        + lipschitz * lipschitz / (2.0 * t_f) * alphas
        + psi_star / (t_f * alpha_t)
        + 2.0 * lipschitz / (m * t_f) * all)
}

/// `theorem1_rhs` for every horizon and node at once (`T x m`), via prefix sums.
pub fn theorem1_envelope(trajectory: &Trajectory, psi_star: f64, lipschitz: f64) -> Array2<f64> {
    let m = trajectory.nodes;
    let mut out = Array2::zeros((trajectory.records.len(), m));
    let mut own = Array1::<f64>::zeros(m);
    let (mut all, mut alphas) = (0.0, 0.0);
    for (k, r) in trajectory.records.iter().enumerate() {
        own.scaled_add(r.alpha, &r.consensus_err);
        all += r.alpha * r.consensus_err.sum();
        alphas += r.alpha;
        let t_f = (k + 1) as f64;
        let shared = lipschitz * lipschitz / (2.0 * t_f) * alphas
            + psi_star / (t_f * r.alpha)
            + 2.0 * lipschitz / (m as f64 * t_f) * all;
        for i in 0..m {
            out[[k, i]] = lipschitz / t_f * own[i] + shared;
        }
    }
    out
}
