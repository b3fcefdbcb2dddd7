//! Table of the convergence constants for given network parameters.

use serde::Serialize;

use crate::constants::{error_bound, optimal_step, ConvergenceConstants};
use crate::error::{Error, Result};

pub const DEFAULT_HORIZONS: [usize; 3] = [100, 1000, 10_000];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: usize,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    #[serde(flatten)]
    pub constants: ConvergenceConstants,
    pub radius: f64,
    pub lipschitz: f64,
    /// First step of the tuned schedule.
    pub alpha_1: f64,
    pub bounds: Vec<BoundRow>,
}

pub fn constants_report(
    nodes: usize,
    window: usize,
    tau_max: usize,
    radius: f64,
    lipschitz: f64,
    horizons: &[usize],
) -> Result<ConstantsReport> {
    if !(radius > 0.0 && radius.is_finite()) || !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "R = {radius} and L = {lipschitz} must be positive and finite"
        )));
    }
    let constants = ConvergenceConstants::new(nodes, window, tau_max)?;
    let bounds = horizons
        .iter()
        .map(|&t| BoundRow {
            t,
            bound: error_bound(t, radius, lipschitz, constants.gamma),
        })
        .collect();
    Ok(ConstantsReport {
        alpha_1: optimal_step(radius, lipschitz, constants.gamma, 1),
        constants,
        radius,
        lipschitz,
        bounds,
    })
}

impl ConstantsReport {
    pub fn to_text(&self) -> String {
        let c = &self.constants;
        let mut rows = vec![
            ("m", c.nodes.to_string()),
            ("B", c.window.to_string()),
            ("tau_max", c.tau_max.to_string()),
            ("Omega", c.omega.to_string()),
            ("C", format!("{:.6e}", c.c)),
            ("ln C", format!("{:.6}", c.ln_c)),
            ("lambda", format!("{:.17}", c.lambda)),
            ("1 - lambda", format!("{:.6e}", c.one_minus_lambda)),
            ("delta (lower bound)", format!("{:.6e}", c.delta_lb)),
            ("t*", format!("{}", c.t_star)),
            ("Gamma", format!("{:.6e}", c.gamma)),
            ("ln Gamma", format!("{:.6}", c.ln_gamma)),
            ("R", self.radius.to_string()),
            ("L", self.lipschitz.to_string()),
            ("alpha(1)", format!("{:.6e}", self.alpha_1)),
        ];
        for b in &self.bounds {
            rows.push(("bound", format!("T = {}: {:.6e}", b.t, b.bound)));
        }
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}
