//! Network constants entering the convergence bound.
//!
//! With `m` nodes, window `B` and largest per-edge delay `tau_max`:
//!
//! ```text
//! Omega  = (m-1) B + m (tau_max + 1)
//! C      = 4 (1 + m^Omega) / (1 - m^-Omega)
//! lambda = (1 - m^-Omega)^(1/Omega)
//! delta >= m^-(Omega+1)
//! t*     = argmax_t t lambda^(t-1)
//! Gamma  = (m C / delta) (1 / ((1-lambda) lambda) + t* lambda^(t*-1))
//! ```
//!
//! For realistic `m` and `Omega` the quantity `m^-Omega` is far below machine
//! epsilon, so `lambda` rounds to 1 and `1 - lambda` cancels. Everything is
//! therefore carried in logarithms and exponentiated only for reporting.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceConstants {
    pub nodes: usize,
    pub window: usize,
    pub tau_max: usize,
    pub omega: u64,
    pub c: f64,
    pub ln_c: f64,
    pub lambda: f64,
    pub ln_lambda: f64,
    /// `1 - lambda`, computed without cancellation.
    pub one_minus_lambda: f64,
    pub ln_one_minus_lambda: f64,
    /// Provable lower bound `m^-(Omega+1)` on delta.
    pub delta_lb: f64,
    pub ln_delta_lb: f64,
    /// Integer-valued; stored as `f64` since it exceeds `u64` once `m^Omega` does.
    pub t_star: f64,
    pub ln_t_star: f64,
    /// Gamma evaluated with `delta = delta_lb`. May be `inf` when out of `f64` range.
    pub gamma: f64,
    pub ln_gamma: f64,
}

/// Which value of delta enters Gamma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaMode {
    Provable,
    Empirical(f64),
}

impl ConvergenceConstants {
    pub fn new(nodes: usize, window: usize, tau_max: usize) -> Result<Self> {
        if nodes == 0 || window == 0 {
            return Err(Error::InvalidParameter(
                "node count and window B must be positive".into(),
            ));
        }
        let omega = (nodes as u64 - 1) * window as u64 + nodes as u64 * (tau_max as u64 + 1);
        if omega < 3 {
            return Err(Error::OmegaTooSmall { omega });
        }
        // m = 1 makes 1 - m^-Omega vanish: lambda = 0 and C is infinite
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "convergence constants need at least 2 nodes, got {nodes}"
            )));
        }

        let om = omega as f64;
        let ln_m = (nodes as f64).ln();
        let ln_x = -om * ln_m;
        let x = ln_x.exp();

        // -ln(1 - x) and its logarithm, accurate for tiny x
        let neg_ln_1mx = -(-x).ln_1p();
        let ln_neg_ln_1mx = if x > 1e-8 {
            neg_ln_1mx.ln()
        } else {
            ln_x + (0.5 * x).ln_1p()
        };

        let ln_lambda = -neg_ln_1mx / om;
        let ln_neg_ln_lambda = ln_neg_ln_1mx - om.ln();
        let lambda = ln_lambda.exp();
        // ln(1 - lambda) = ln(-ln lambda) + ln((1 - e^a) / (-a)), a = ln lambda
        let ln_one_minus_lambda = ln_neg_ln_lambda
            + if ln_lambda < -1e-8 {
                (-ln_lambda.exp_m1() / -ln_lambda).ln()
            } else {
                (0.5 * ln_lambda).ln_1p()
            };

        let ln_c = 4f64.ln() + om * ln_m + x.ln_1p() + neg_ln_1mx;
        let ln_delta_lb = -(om + 1.0) * ln_m;

        let (t_star, ln_t_star, ln_peak) = t_star_search(ln_neg_ln_lambda);

        let mut out = ConvergenceConstants {
            nodes,
            window,
            tau_max,
            omega,
            c: ln_c.exp(),
            ln_c,
            lambda,
            ln_lambda,
            one_minus_lambda: ln_one_minus_lambda.exp(),
            ln_one_minus_lambda,
            delta_lb: ln_delta_lb.exp(),
            ln_delta_lb,
            t_star,
            ln_t_star,
            gamma: 0.0,
            ln_gamma: 0.0,
        };
        let ln_tail = log_add_exp(-ln_one_minus_lambda - ln_lambda, ln_peak);
        out.ln_gamma = ln_m + ln_c - ln_delta_lb + ln_tail;
        out.gamma = out.ln_gamma.exp();
        Ok(out)
    }

    /// `ln Gamma` with an arbitrary delta in `(0, 1]`.
    pub fn ln_gamma_with(&self, mode: DeltaMode) -> f64 {
        match mode {
            DeltaMode::Provable => self.ln_gamma,
            DeltaMode::Empirical(delta) => self.ln_gamma + self.ln_delta_lb - delta.ln(),
        }
    }

    pub fn gamma_with(&self, mode: DeltaMode) -> f64 {
        self.ln_gamma_with(mode).exp()
    }

    /// Right side of the contraction bound `C lambda^k`.
    pub fn contraction(&self, k: usize) -> f64 {
        (self.ln_c + k as f64 * self.ln_lambda).exp()
    }
}

// Integer argmax of t * lambda^(t-1), from {1, floor(tc), ceil(tc)} with tc = -1/ln(lambda).
// Returns (t*, ln t*, ln(t* lambda^(t*-1))).
fn t_star_search(ln_neg_ln_lambda: f64) -> (f64, f64, f64) {
    let ln_tc = -ln_neg_ln_lambda;
    if ln_tc > 600.0 {
        // tc beyond any integer resolution: t* = tc and (t*-1) ln(lambda) = -1 + 1/tc
        return (ln_tc.exp(), ln_tc, ln_tc - 1.0);
    }
    let tc = ln_tc.exp();
    let neg_ln_lambda = ln_neg_ln_lambda.exp();
    let score = |t: f64| t.ln() - (t - 1.0) * neg_ln_lambda;
    let mut best = (1.0, 0.0);
    for t in [tc.floor(), tc.ceil()] {
        if t < 1.0 {
            continue;
        }
        let s = score(t);
        if s > best.1 || (s == best.1 && t < best.0) {
            best = (t, s);
        }
    }
    (best.0, best.0.ln(), best.1)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Step size of the tuned schedule at `t`: `R / (L sqrt(1 + 6 Gamma)) / sqrt(t)`.
pub fn optimal_step(radius: f64, lipschitz: f64, gamma: f64, t: usize) -> f64 {
    radius / (lipschitz * (1.0 + 6.0 * gamma).sqrt()) / (t as f64).sqrt()
}

/// Guaranteed optimality gap after `T` steps of the tuned schedule: `2 R L sqrt(1 + 6 Gamma) / sqrt(T)`.
pub fn error_bound(iterations: usize, radius: f64, lipschitz: f64, gamma: f64) -> f64 {
    2.0 * radius * lipschitz * (1.0 + 6.0 * gamma).sqrt() / (iterations as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega_values() {
        assert_eq!(ConvergenceConstants::new(3, 3, 2).unwrap().omega, 15);
        assert_eq!(ConvergenceConstants::new(8, 4, 4).unwrap().omega, 68);
        assert_eq!(ConvergenceConstants::new(8, 4, 8).unwrap().omega, 100);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            ConvergenceConstants::new(1, 1, 0),
            Err(Error::OmegaTooSmall { omega: 1 })
        );
        assert!(matches!(
            ConvergenceConstants::new(1, 1, 5),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ConvergenceConstants::new(2, 0, 0).is_err());
        // m = 2, B = 1, tau = 0 gives Omega = 3, the smallest admissible value
        assert_eq!(ConvergenceConstants::new(2, 1, 0).unwrap().omega, 3);
    }

    #[test]
    fn lambda_identity() {
        for (m, b, tau) in [(2, 1, 0), (3, 3, 2), (4, 2, 1), (5, 1, 3)] {
            let k = ConvergenceConstants::new(m, b, tau).unwrap();
            let x = (m as f64).powi(-(k.omega as i32));
            assert!((k.lambda.powf(k.omega as f64) - (1.0 - x)).abs() <= 1e-12);
            assert_relative_eq!(k.one_minus_lambda, 1.0 - k.lambda, max_relative = 1e-6);
        }
    }

    #[test]
    fn small_case_matches_direct_formulas() {
        let k = ConvergenceConstants::new(2, 1, 0).unwrap();
        let x = 0.125f64;
        let c = 4.0 * (1.0 + 8.0) / (1.0 - x);
        let lambda = (1.0 - x).powf(1.0 / 3.0);
        assert_relative_eq!(k.c, c, max_relative = 1e-13);
        assert_relative_eq!(k.lambda, lambda, max_relative = 1e-14);
        assert_relative_eq!(k.delta_lb, 1.0 / 16.0, max_relative = 1e-14);

        // brute-force argmax of t lambda^(t-1)
        let (mut best_t, mut best_v) = (1usize, 1.0f64);
        for t in 1..10_000usize {
            let v = t as f64 * lambda.powi(t as i32 - 1);
            if v > best_v {
                best_t = t;
                best_v = v;
            }
        }
        assert_eq!(k.t_star, best_t as f64);

        let gamma = 2.0 * c / (1.0 / 16.0) * (1.0 / ((1.0 - lambda) * lambda) + best_v);
        assert_relative_eq!(k.gamma, gamma, max_relative = 1e-10);
    }

    #[test]
    fn large_omega_stays_finite_in_logs() {
        let k = ConvergenceConstants::new(8, 4, 4).unwrap();
        assert!(k.ln_gamma.is_finite() && k.gamma.is_finite());
        assert!(k.one_minus_lambda > 0.0);
        assert!(k.ln_one_minus_lambda < -100.0);
        let k = ConvergenceConstants::new(50, 10, 20).unwrap();
        assert!(k.ln_gamma.is_finite());
        assert!(k.gamma.is_infinite());
    }

    #[test]
    fn deterministic() {
        let a = ConvergenceConstants::new(8, 4, 4).unwrap();
        let b = ConvergenceConstants::new(8, 4, 4).unwrap();
        assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
        assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    }

    #[test]
    fn empirical_delta_shrinks_gamma() {
        let k = ConvergenceConstants::new(3, 3, 2).unwrap();
        let g = k.gamma_with(DeltaMode::Empirical(0.1));
        assert!(g < k.gamma);
        assert_relative_eq!(k.gamma_with(DeltaMode::Provable), k.gamma);
    }

    #[test]
    fn step_and_bound() {
        assert_eq!(optimal_step(1.0, 1.0, 0.0, 1), 1.0);
        assert_eq!(error_bound(4, 1.0, 1.0, 0.0), 1.0);
        let b1 = error_bound(100, 2.0, 3.0, 5.0);
        let b2 = error_bound(200, 2.0, 3.0, 5.0);
        assert_relative_eq!(b2, b1 / 2f64.sqrt(), max_relative = 1e-14);
    }
}
