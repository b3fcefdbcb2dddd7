//! The validation suite behind `psdda verify`.

use rand::Rng;
use serde::Serialize;

use super::config::{build_delays, build_graph, Experiment, RunConfig};
use super::experiment::{check_envelope, run_trajectory, F_ERR_FLOOR};
use super::presets::{example1_golden, Preset};
use super::random::{random_network, random_subgradients, InstanceShape};
use super::seeds::{stream, Stream};
use crate::delay::validate_augmented;
use crate::dual_averaging::{run, EuclideanProx, StepSchedule};
use crate::event_sim::{compare_trajectories, simulate_event_driven};
use crate::matrix::ColumnStochasticMatrix;
use crate::network::DelayedNetwork;
use crate::objective::FeasibleSet;

/// Horizon of the oracle and invariant checks.
pub const REDUCED_T: usize = 200;
pub const RANDOM_BATCH: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{tag}  {:<22} {}\n", c.name, c.detail));
        }
        out.push_str(if self.passed() {
            "verify: all checks passed\n"
        } else {
            "verify: FAILED\n"
        });
        out
    }
}

fn matrix_issues(label: &str, q: &ColumnStochasticMatrix, tol: f64) -> Option<String> {
    let dev = q.column_sum_deviation();
    let min = q.min_entry();
    if dev > tol || min < 0.0 {
        Some(format!("{label}: column sum deviation {dev:e}, min entry {min:e}"))
    } else {
        None
    }
}

fn check_matrices(report: &mut VerifyReport, network: &DelayedNetwork, tol: f64) {
    let period = network.graph().period();
    let mut issues = Vec::new();
    for t in 0..period {
        issues.extend(matrix_issues(&format!("P({t})"), network.p_at(t), tol));
        issues.extend(matrix_issues(&format!("Q({t})"), network.q_at(t), tol));
        let structure = validate_augmented(network.q_at(t), network.index_map());
        issues.extend(structure.issues.iter().map(|i| format!("Q({t}): {i}")));
    }
    let mut product = ColumnStochasticMatrix::identity(network.dim());
    for t in 0..2 * period {
        product = network.q_at(t).compose(&product).expect("same network");
        issues.extend(matrix_issues(&format!("Q({t}:0)"), &product, tol));
    }
    let detail = match issues.first() {
        None => format!("{} P/Q matrices and {} products", 2 * period, 2 * period),
        Some(first) => format!("{} issue(s); first: {first}", issues.len()),
    };
    report.push("column stochasticity", issues.is_empty(), detail);
}

fn check_golden(report: &mut VerifyReport, network: &DelayedNetwork) {
    let golden = example1_golden();
    let mismatch = golden.iter().enumerate().find_map(|(t, g)| {
        let q = network.q_at(t).view();
        if q.dim() != g.dim() {
            return Some(format!("Q{} is {:?}, expected {:?}", t + 1, q.dim(), g.dim()));
        }
        q.indexed_iter()
            .find(|(ij, v)| **v != g[*ij])
            .map(|((i, j), v)| format!("Q{}[{},{}] = {v}, expected {}", t + 1, i + 1, j + 1, g[[i, j]]))
    });
    match mismatch {
        None => report.push("golden matrices", true, "Q1, Q2, Q3 match exactly"),
        Some(d) => report.push("golden matrices", false, d),
    }
}

fn check_oracle(report: &mut VerifyReport, exp: &Experiment, horizon: usize) {
    let matrix = run(
        &exp.network,
        &exp.objective,
        &exp.schedule,
        &exp.prox,
        exp.x0.clone(),
        horizon,
    );
    let event = simulate_event_driven(
        exp.network.graph(),
        exp.network.delays(),
        &exp.objective,
        &exp.schedule,
        &exp.prox,
        exp.x0.clone(),
        horizon,
    );
    let outcome = match (matrix, event) {
        (Ok(a), Ok(b)) => compare_trajectories(&a.compute_states(), &b.compute_states(), exp.tolerances.oracle)
            .map(|r| (r.passed, format!("T = {horizon}, max deviation {:e}", r.max_deviation))),
        (Err(e), _) | (_, Err(e)) => Err(e),
    };
    match outcome {
        Ok((passed, detail)) => report.push("oracle equivalence", passed, detail),
        Err(e) => report.push("oracle equivalence", false, e.to_string()),
    }
}

fn check_random_batch(report: &mut VerifyReport, seed: u64, tol: f64) {
    let mut rng = stream(seed, Stream::Instances);
    let shape = InstanceShape {
        max_nodes: 5,
        ..Default::default()
    };
    let prox = EuclideanProx::new(FeasibleSet::L1Ball { radius: 1.0 });
    let schedule = StepSchedule::Basic { scale: 1.0 };
    let mut worst: f64 = 0.0;
    let mut failure = None;
    for k in 0..RANDOM_BATCH {
        let outcome = random_network(&shape, &mut rng).and_then(|net| {
            let steps = rng.random_range(1..=50);
            let dim = rng.random_range(1..=3);
            let g = random_subgradients(steps, net.nodes(), dim, &mut rng);
            let x0 = ndarray::Array2::zeros((net.nodes(), dim));
            let a = run(&net, &g, &schedule, &prox, x0.clone(), steps)?;
            let b = simulate_event_driven(net.graph(), net.delays(), &g, &schedule, &prox, x0, steps)?;
            compare_trajectories(&a.compute_states(), &b.compute_states(), tol)
        });
        match outcome {
            Ok(r) => {
                worst = worst.max(r.max_deviation);
                if !r.passed && failure.is_none() {
                    failure = Some(format!("instance {k}: deviation {:e}", r.max_deviation));
                }
            }
            Err(e) => {
                failure.get_or_insert(format!("instance {k}: {e}"));
            }
        }
    }
    match failure {
        None => report.push(
            "random oracle batch",
            true,
            format!("{RANDOM_BATCH} instances, max deviation {worst:e}"),
        ),
        Some(d) => report.push("random oracle batch", false, d),
    }
}

fn check_invariants(report: &mut VerifyReport, exp: &Experiment, horizon: usize) {
    let reduced = exp.with_iterations(horizon);
    let traj = match run_trajectory(&reduced) {
        Ok(t) => t,
        Err(e) => {
            report.push("invariants", false, e.to_string());
            return;
        }
    };
    let m = exp.network.nodes() as f64;
    let tol = exp.tolerances.conservation;
    let optimum = exp.objective.exact_optimum(&exp.set);
    let mut issues = Vec::new();
    for r in &traj.records {
        if (r.total_weight - m).abs() > tol {
            issues.push(format!("t={}: total weight {}", r.t, r.total_weight));
        }
        let drift = (&r.total_dual - &r.cumulative_subgradient)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        if drift > tol {
            issues.push(format!("t={}: dual mass drift {drift:e}", r.t));
        }
        if r.w.iter().any(|w| !(*w > 0.0)) {
            issues.push(format!("t={}: non-positive weight", r.t));
        }
        if r.x.rows().into_iter().any(|x| !exp.set.contains(x)) {
            issues.push(format!("t={}: infeasible iterate", r.t));
        }
        for x in r.x_hat.rows() {
            let f_err = exp.objective.value(x) - optimum.value;
            if f_err < F_ERR_FLOOR {
                issues.push(format!("t={}: f_err {f_err:e} below f*", r.t));
            }
        }
    }
    let detail = match issues.first() {
        None => format!("T = {horizon}: mass conserved, weights positive, iterates feasible"),
        Some(first) => format!("{} issue(s); first: {first}", issues.len()),
    };
    report.push("invariants", issues.is_empty(), detail);

    let env = check_envelope(&reduced, &traj);
    report.push(
        "per-node envelope",
        env.violations == 0,
        format!(
            "{} of {} records above the envelope, min margin {:e}",
            env.violations, env.checked, env.min_margin
        ),
    );
}

/// Runs every check that applies to the configured instance. Never fails:
/// problems become failed checks.
pub fn verify(config: &RunConfig) -> VerifyReport {
    let mut report = VerifyReport::default();
    let cfg = config.clone().with_preset_defaults();

    let graph = match build_graph(&cfg.graph) {
        Ok(g) => g,
        Err(e) => {
            report.push("graph", false, e.to_string());
            return report;
        }
    };
    let conn = graph.validate_b_connectivity();
    match conn.first_failure() {
        None => report.push(
            "connectivity",
            true,
            format!("{} window(s) strongly connected", conn.windows.len()),
        ),
        Some(w) => {
            let (a, b) = w.unreachable.unwrap_or((0, 0));
            report.push(
                "connectivity",
                false,
                format!(
                    "window {} has no path from node {} to node {}",
                    w.window + 1,
                    a + 1,
                    b + 1
                ),
            );
        }
    }

    match build_delays(&cfg.delay, &graph).and_then(|d| DelayedNetwork::new(graph.clone(), d)) {
        Ok(net) => report.push(
            "delay spec",
            true,
            format!(
                "{} edges, tau_max {}, {} relays",
                net.delays().len(),
                net.delays().tau_max(),
                net.dim() - net.nodes()
            ),
        ),
        Err(e) => {
            report.push("delay spec", false, e.to_string());
            return report;
        }
    }

    let exp = match cfg.resolve() {
        Ok(e) => e,
        Err(e) => {
            report.push("configuration", false, e.to_string());
            return report;
        }
    };
    let tol = exp.tolerances.column_sum;
    check_matrices(&mut report, &exp.network, tol);
    if exp.preset == Some(Preset::Example1) {
        check_golden(&mut report, &exp.network);
    }
    let horizon = exp.iterations.min(REDUCED_T);
    check_oracle(&mut report, &exp, horizon);
    check_random_batch(&mut report, exp.seed, exp.tolerances.oracle);
    check_invariants(&mut report, &exp, horizon);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_passes() {
        let report = verify(&RunConfig::preset(Preset::Example1));
        assert!(report.passed(), "{}", report.render());
        assert!(report.check("golden matrices").unwrap().passed);
    }

    #[test]
    fn corrupted_delay_names_edge() {
        let text = "preset = \"example1\"\n[delay]\nper_edge = [{ edge = [1, 2], delay = 2 }, { edge = [2, 3], delay = 1 }, { edge = [2, 1], delay = 1 }]\n";
        let report = verify(&RunConfig::from_toml_str(text).unwrap());
        assert!(!report.passed());
        let check = report.check("delay spec").unwrap();
        assert!(!check.passed);
        assert!(check.detail.contains("(2,1)"), "{}", check.detail);
    }
}
