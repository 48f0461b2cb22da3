use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{validate_epsilon_grid, SweepConfig};
use super::output::{round_sig, sentinel};
use crate::divergences::{chernoff_laplace_closed_form, chernoff_numeric, kl_laplace_closed_form, kl_numeric, DEFAULT_TOL};
use crate::dp_bounds::{
    alpha_star_ub, chernoff_ub_from_epsilon, chernoff_ub_via_expansion, epsilon_dp_level, kl_bound_from_epsilon, EvalGrid,
    Expansion,
};
use crate::error::Result;
use crate::mechanism::{scenario_to_hypotheses, AttackScenario};

/// One `(epsilon, multiplier, theta)` point of the divergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub multiplier: f64,
    pub theta: f64,
    pub delta_mu: f64,
    pub b: f64,
    pub kl_closed: f64,
    pub chernoff_closed: f64,
    pub chernoff_numeric: f64,
    pub kl_numeric: f64,
    #[serde(with = "sentinel")]
    pub epsilon_dp_level: f64,
}

fn sweep_row(epsilon: f64, multiplier: f64, theta: f64, sensitivity: f64) -> Result<SweepRow> {
    let s = AttackScenario::new(epsilon, sensitivity, multiplier * sensitivity, theta, 0.5)?;
    let (p, q) = scenario_to_hypotheses(&s)?;
    Ok(SweepRow {
        epsilon,
        multiplier,
        theta,
        delta_mu: round_sig(s.delta_mu),
        b: round_sig(s.b()),
        kl_closed: round_sig(kl_laplace_closed_form(&s)?.value),
        chernoff_closed: round_sig(chernoff_laplace_closed_form(&s)?.value),
        chernoff_numeric: round_sig(chernoff_numeric(&p, &q, DEFAULT_TOL)?.value),
        kl_numeric: round_sig(kl_numeric(&p, &q, DEFAULT_TOL)?.value),
        epsilon_dp_level: round_sig(epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q))),
    })
}

/// Rows in grid order: epsilon outermost, then multiplier, then theta.
/// Rows are computed in parallel; the order does not depend on scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &e in &cfg.epsilon_grid {
        for &m in &cfg.delta_mu_multipliers {
            for &t in &cfg.theta_values {
                points.push((e, m, t));
            }
        }
    }
    points.into_par_iter().map(|(e, m, t)| sweep_row(e, m, t, cfg.sensitivity)).collect()
}

/// Bounds implied by a pure DP level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub epsilon: f64,
    pub kl_bound: f64,
    /// Closed-form Chernoff upper bound.
    pub chernoff_ub: f64,
    /// Bounded objective at the optimal prior (same for both expansions).
    pub chernoff_ub_substituted: f64,
    pub alpha_q: f64,
    pub alpha_q_clamped: bool,
    pub alpha_p: f64,
    pub alpha_p_clamped: bool,
}

pub fn run_bounds_table(epsilon_grid: &[f64]) -> Result<Vec<BoundsRow>> {
    validate_epsilon_grid(epsilon_grid)?;
    epsilon_grid
        .iter()
        .map(|&eps| {
            let aq = alpha_star_ub(eps, Expansion::QBased)?;
            let ap = alpha_star_ub(eps, Expansion::PBased)?;
            Ok(BoundsRow {
                epsilon: eps,
                kl_bound: round_sig(kl_bound_from_epsilon(eps)?),
                chernoff_ub: round_sig(chernoff_ub_from_epsilon(eps)?),
                chernoff_ub_substituted: round_sig(chernoff_ub_via_expansion(eps, Expansion::QBased)?),
                alpha_q: round_sig(aq.value),
                alpha_q_clamped: aq.clamped,
                alpha_p: round_sig(ap.value),
                alpha_p_clamped: ap.clamped,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_row_hand_values() {
        // x = dmu/b = 0.5: KL = 0.5 - 1 + e^-0.5
        let r = sweep_row(0.5, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.b, 2.0);
        assert!((r.kl_closed - 0.10653).abs() < 1e-5);
        assert!((r.kl_numeric - r.kl_closed).abs() < 1e-8);
        assert!((r.epsilon_dp_level - 0.5).abs() < 1e-9);
        // equal scales: 0.25 - log 1.25
        assert!((r.chernoff_numeric - (0.25 - 1.25f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn zero_shift_row_is_zero() {
        let r = sweep_row(0.3, 0.0, 1.0, 1.0).unwrap();
        assert_eq!((r.kl_closed, r.chernoff_closed, r.kl_numeric, r.chernoff_numeric), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.epsilon_dp_level, 0.0);
    }

    #[test]
    fn sweep_order_and_sentinel() {
        let cfg = SweepConfig {
            epsilon_grid: vec![0.2, 0.4],
            delta_mu_multipliers: vec![1.0, 2.0],
            theta_values: vec![1.0, 1.5],
            ..SweepConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.epsilon, r.multiplier, r.theta)).collect();
        assert_eq!(keys[1], (0.2, 1.0, 1.5));
        assert_eq!(keys[2], (0.2, 2.0, 1.0));
        assert_eq!(keys[7], (0.4, 2.0, 1.5));
        for r in &rows {
            assert_eq!(r.epsilon_dp_level.is_infinite(), r.theta > 1.0);
        }
    }

    #[test]
    fn bounds_row_values() {
        let rows = run_bounds_table(&[0.5]).unwrap();
        let r = &rows[0];
        assert!((r.kl_bound - 0.122459).abs() < 1e-6);
        assert!((r.chernoff_ub - 1.34107).abs() < 1e-5);
        assert!((r.alpha_q - 0.09861).abs() < 1e-5);
        assert!(!r.alpha_q_clamped);
        assert_eq!(r.alpha_p, 1.0);
        assert!(r.alpha_p_clamped);
        assert!(run_bounds_table(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn bounds_near_zero_epsilon() {
        let r = &run_bounds_table(&[1e-4]).unwrap()[0];
        assert!(r.kl_bound < 1e-8);
        assert!(r.alpha_q < 1e-8);
        assert!((r.alpha_p - 1.0).abs() < 1e-8);
    }
}
