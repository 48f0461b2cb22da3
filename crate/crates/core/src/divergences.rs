//! KL divergence, the alpha-skewed Bhattacharyya coefficient, and Chernoff
//! information, by quadrature for arbitrary densities and in closed form for
//! the Laplace hypothesis pair of an [`AttackScenario`].
//!
//! All values are in nats.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::distributions::{identical, joint_kinks, joint_range, Density};
use crate::error::{Error, Result};
use crate::mechanism::AttackScenario;
use crate::numeric::{integrate, try_maximize_concave};

/// Default absolute quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// The alpha search is confined to `[ALPHA_MIN, 1 - ALPHA_MIN]`.
pub const ALPHA_MIN: f64 = 1e-6;

/// Bracket width at which the alpha search stops.
pub const ALPHA_TOL: f64 = 1e-7;

pub const CLOSED_FORM_CHERNOFF_NOTE: &str =
    "closed-form Laplace expression |dmu|/(theta b) - log(1 + |dmu|/(theta b)); \
     differs from the numerically computed Chernoff information of the same pair";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
    /// Maximizing alpha; present exactly for Chernoff information.
    pub alpha_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl DivergenceEstimate {
    fn closed_form(value: f64) -> Self {
        DivergenceEstimate { value, method: Method::ClosedForm, error_bound: 0.0, alpha_star: None, note: None }
    }
}

/// Change of variables used to evaluate `C_alpha(P, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinityForm {
    /// `∫ p^a q^(1-a) dx`
    Direct,
    /// `∫ (p/q)^a dQ`
    QBased,
    /// `∫ (q/p)^(1-a) dP`
    PBased,
}

/// `D(P || Q) = ∫ p log(p/q)` by adaptive quadrature.
pub fn kl_numeric(p: &dyn Density, q: &dyn Density, tol: f64) -> Result<DivergenceEstimate> {
    if identical(p, q) {
        return Ok(DivergenceEstimate { method: Method::Quadrature, ..DivergenceEstimate::closed_form(0.0) });
    }
    // the integrand vanishes off supp(P)
    let range = joint_range(p, q).clip(&p.support());
    let kinks = joint_kinks(p, q, range);
    let violation = Cell::new(None);
    let r = integrate(
        |x| {
            let lp = p.log_eval(x);
            if lp == f64::NEG_INFINITY {
                return 0.0;
            }
            let lq = q.log_eval(x);
            if lq == f64::NEG_INFINITY {
                if violation.get().is_none() {
                    violation.set(Some(x));
                }
                return 0.0;
            }
            lp.exp() * (lp - lq)
        },
        range.lo,
        range.hi,
        &kinks,
        tol,
    );
    if let Some(x) = violation.get() {
        return Err(Error::AbsoluteContinuity { x });
    }
    let r = r?;
    Ok(DivergenceEstimate {
        value: r.value,
        method: Method::Quadrature,
        error_bound: r.error_estimate,
        alpha_star: None,
        note: None,
    })
}

/// `C_alpha(P, Q) = ∫ p^alpha q^(1-alpha)`.
pub fn bhattacharyya_alpha(p: &dyn Density, q: &dyn Density, alpha: f64, tol: f64) -> Result<f64> {
    Ok(bhattacharyya_alpha_form(p, q, alpha, AffinityForm::Direct, tol)?.0)
}

/// `C_alpha(P, Q)` through one of its change-of-variable forms; returns the
/// value and its quadrature error estimate.
pub fn bhattacharyya_alpha_form(
    p: &dyn Density,
    q: &dyn Density,
    alpha: f64,
    form: AffinityForm,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if identical(p, q) {
        return Ok((1.0, 0.0));
    }
    let range = joint_range(p, q).clip(&p.support()).clip(&q.support());
    if !(range.width() > 0.0) {
        return Ok((0.0, 0.0));
    }
    let kinks = joint_kinks(p, q, range);
    let integrand = |x: f64| {
        let lp = p.log_eval(x);
        let lq = q.log_eval(x);
        if lp == f64::NEG_INFINITY || lq == f64::NEG_INFINITY {
            return 0.0;
        }
        match form {
            AffinityForm::Direct => (alpha * lp + (1.0 - alpha) * lq).exp(),
            AffinityForm::QBased => (alpha * (lp - lq)).exp() * lq.exp(),
            AffinityForm::PBased => ((1.0 - alpha) * (lq - lp)).exp() * lp.exp(),
        }
    };
    let r = integrate(integrand, range.lo, range.hi, &kinks, tol)?;
    Ok((r.value, r.error_estimate))
}

/// `max over alpha of -log C_alpha(P, Q)`, searched on `[1e-6, 1 - 1e-6]`.
pub fn chernoff_numeric(p: &dyn Density, q: &dyn Density, tol: f64) -> Result<DivergenceEstimate> {
    if identical(p, q) {
        return Ok(DivergenceEstimate {
            value: 0.0,
            method: Method::Quadrature,
            error_bound: 0.0,
            alpha_star: Some(0.5),
            note: None,
        });
    }
    let worst_err = Cell::new(0.0f64);
    let opt = try_maximize_concave(
        |alpha| {
            let (c, err) = bhattacharyya_alpha_form(p, q, alpha, AffinityForm::Direct, tol)?;
            if !(c > 0.0) {
                return Err(Error::domain(format!("affinity vanished at alpha = {alpha}")));
            }
            worst_err.set(worst_err.get().max(err / c));
            Ok(-c.ln())
        },
        ALPHA_MIN,
        1.0 - ALPHA_MIN,
        ALPHA_TOL,
    )?;
    Ok(DivergenceEstimate {
        value: opt.max_value.max(0.0),
        method: Method::Quadrature,
        error_bound: worst_err.get(),
        alpha_star: Some(opt.argmax),
        note: None,
    })
}

fn check_scenario_scales(s: &AttackScenario) -> Result<f64> {
    if !(s.theta > 0.0 && s.theta.is_finite()) {
        return Err(Error::domain(format!("theta must be positive, got {}", s.theta)));
    }
    let b = s.b();
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(format!("noise scale s/eps must be positive, got {b}")));
    }
    if !s.delta_mu.is_finite() {
        return Err(Error::domain("delta_mu must be finite"));
    }
    Ok(b)
}

/// `D(Lap(0,b) || Lap(dmu, theta b)) = log theta - 1 + |dmu|/(theta b) + e^(-|dmu|/b) / theta`.
pub fn kl_laplace_closed_form(s: &AttackScenario) -> Result<DivergenceEstimate> {
    let b = check_scenario_scales(s)?;
    let t = s.theta;
    let d = s.delta_mu.abs();
    if d == 0.0 && t == 1.0 {
        return Ok(DivergenceEstimate::closed_form(0.0));
    }
    let value = t.ln() - 1.0 + d / (t * b) + (-d / b).exp() / t;
    Ok(DivergenceEstimate::closed_form(value))
}

/// The closed-form Laplace Chernoff expression `x - log(1 + x)`, `x = |dmu|/(theta b)`.
///
/// Evaluated verbatim; for equal scales the Chernoff information of the
/// pair is `x/2 - log(1 + x/2)` instead, which `chernoff_numeric` recovers.
pub fn chernoff_laplace_closed_form(s: &AttackScenario) -> Result<DivergenceEstimate> {
    let b = check_scenario_scales(s)?;
    let x = s.delta_mu.abs() / (s.theta * b);
    let value = if x == 0.0 { 0.0 } else { x - x.ln_1p() };
    Ok(DivergenceEstimate { note: Some(CLOSED_FORM_CHERNOFF_NOTE.to_string()), ..DivergenceEstimate::closed_form(value) })
}
