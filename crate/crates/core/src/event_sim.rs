//! Message-passing simulation of the delayed protocol.
//!
//! Compute nodes exchange `(w, z)` shares through per-edge FIFO channels with
//! fixed latency; no relay nodes and no mixing matrices are involved. A share
//! sent at step `t` over an edge of delay `tau` is added to the receiver's
//! state at step `t + tau + 1`. This is an independent route to the same
//! compute-node trajectory as the augmented-matrix iteration.

use std::collections::VecDeque;

use ndarray::{Array1, Array2};

use crate::delay::DelaySpec;
use crate::dual_averaging::{ProximalMap, StepSchedule, SubgradientSource};
use crate::error::{Error, Result};
use crate::graph::{out_degree, Edge, TimeVaryingDigraph};

#[derive(Debug, Clone, PartialEq)]
pub struct InFlightMessage {
    pub edge: Edge,
    pub w_share: f64,
    pub z_share: Array1<f64>,
    pub sent_at: usize,
    pub deliver_at: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub t: usize,
    pub w: Array1<f64>,
    pub z: Array2<f64>,
    pub x: Array2<f64>,
    /// Weight carried by messages still in channels after this step.
    pub queued_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrajectory {
    pub records: Vec<EventRecord>,
    /// Longest time any message spent in a channel.
    pub max_hold: usize,
}

impl EventTrajectory {
    pub fn compute_states(&self) -> Vec<(Array1<f64>, Array2<f64>)> {
        self.records.iter().map(|r| (r.w.clone(), r.z.clone())).collect()
    }
}

struct Channel {
    edge: Edge,
    delay: usize,
    queue: VecDeque<InFlightMessage>,
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_event_driven<S, P>(
    graph: &TimeVaryingDigraph,
    delays: &DelaySpec,
    source: &S,
    schedule: &StepSchedule,
    prox: &P,
    x0: Array2<f64>,
    iterations: usize,
) -> Result<EventTrajectory>
where
    S: SubgradientSource + ?Sized,
    P: ProximalMap,
{
    let m = graph.nodes();
    if x0.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: x0.nrows(),
        });
    }
    if let Some(node) = x0.rows().into_iter().position(|r| !prox.contains(r)) {
        return Err(Error::InfeasibleStart { node });
    }
    if let Some((edge, _)) = delays.iter().find(|(e, _)| !graph.union().contains(*e)) {
        return Err(Error::UnknownDelayEdge(edge));
    }
    let mut channels = graph
        .union()
        .iter()
        .map(|&edge| {
            let delay = delays.get(edge).ok_or(Error::MissingDelay(edge))?;
            Ok(Channel {
                edge,
                delay,
                queue: VecDeque::new(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dim = x0.ncols();
    let mut w = Array1::<f64>::ones(m);
    let mut z = Array2::<f64>::zeros((m, dim));
    let mut x = x0;
    let mut records = Vec::with_capacity(iterations);
    let mut max_hold = 0;

    for t in 0..iterations {
        let active = graph.edges_at(t);
        let mut g = Array2::zeros((m, dim));
        for i in 0..m {
            let gi = source.subgradient(i, t, x.row(i));
            if gi.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSubgradient { node: i, step: t });
            }
            g.row_mut(i).assign(&gi);
        }

        let mut next_w = Array1::zeros(m);
        let mut next_z = Array2::zeros((m, dim));
        for j in 0..m {
            let share = 1.0 / out_degree(active, j, m)? as f64;
            next_w[j] = w[j] * share;
            next_z.row_mut(j).assign(&(&z.row(j) * share));
        }

        // send over active edges, in canonical order
        for ch in channels.iter_mut() {
            if active.contains(&ch.edge) {
                let j = ch.edge.from;
                let d = out_degree(active, j, m)? as f64;
                ch.queue.push_back(InFlightMessage {
                    edge: ch.edge,
                    w_share: w[j] / d,
                    z_share: &z.row(j) / d,
                    sent_at: t,
                    deliver_at: t + ch.delay + 1,
                });
            }
        }

        // deliver everything due at t + 1
        for ch in channels.iter_mut() {
            while ch.queue.front().is_some_and(|msg| msg.deliver_at == t + 1) {
                let msg = ch.queue.pop_front().expect("front checked");
                max_hold = max_hold.max(msg.deliver_at - msg.sent_at);
                let k = msg.edge.to;
                next_w[k] += msg.w_share;
                let mut row = next_z.row_mut(k);
                row += &msg.z_share;
            }
        }

        next_z += &g;
        let alpha = schedule.step_size(t + 1)?;
        for i in 0..m {
            if !(next_w[i] > 0.0) {
                return Err(Error::NonPositiveWeight {
                    node: i,
                    weight: next_w[i],
                    step: t + 1,
                });
            }
            let ratio = &next_z.row(i) / next_w[i];
            x.row_mut(i).assign(&prox.project(ratio.view(), alpha));
        }
        w = next_w;
        z = next_z;

        let queued_weight = channels
            .iter()
            .flat_map(|c| c.queue.iter())
            .map(|msg| msg.w_share)
            .sum();
        records.push(EventRecord {
            t: t + 1,
            w: w.clone(),
            z: z.clone(),
            x: x.clone(),
            queued_weight,
        });
    }
    Ok(EventTrajectory { records, max_hold })
}

/// Where the largest deviation between two trajectories occurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationSite {
    /// 1-based step.
    pub step: usize,
    pub node: usize,
    /// `None` for the weight, `Some(k)` for dual component `k`.
    pub component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub per_step: Vec<f64>,
    pub max_deviation: f64,
    pub worst: Option<DeviationSite>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Componentwise comparison of two compute-node `(w, z)` trajectories.
pub fn compare_trajectories(
    a: &[(Array1<f64>, Array2<f64>)],
    b: &[(Array1<f64>, Array2<f64>)],
    tolerance: f64,
) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} steps vs {} steps", a.len(), b.len())));
    }
    let mut per_step = Vec::with_capacity(a.len());
    let mut max_deviation: f64 = 0.0;
    let mut worst = None;
    for (k, ((wa, za), (wb, zb))) in a.iter().zip(b).enumerate() {
        if wa.len() != wb.len() || za.dim() != zb.dim() {
            return Err(Error::ShapeMismatch(format!("shapes differ at step {}", k + 1)));
        }
        let mut step_max: f64 = 0.0;
        let mut consider = |dev: f64, site: DeviationSite| {
            if dev > step_max || dev.is_nan() {
                step_max = if dev.is_nan() { f64::INFINITY } else { dev };
            }
            if dev > max_deviation || (dev.is_nan() && max_deviation.is_finite()) {
                max_deviation = if dev.is_nan() { f64::INFINITY } else { dev };
                worst = Some(site);
            }
        };
        for (i, (x, y)) in wa.iter().zip(wb).enumerate() {
            consider(
                (x - y).abs(),
                DeviationSite {
                    step: k + 1,
                    node: i,
                    component: None,
                },
            );
        }
        for ((i, c), x) in za.indexed_iter() {
            consider(
                (x - zb[[i, c]]).abs(),
                DeviationSite {
                    step: k + 1,
                    node: i,
                    component: Some(c),
                },
            );
        }
        per_step.push(step_max);
    }
    Ok(ComparisonReport {
        passed: max_deviation <= tolerance,
        per_step,
        max_deviation,
        worst,
        tolerance,
    })
}
