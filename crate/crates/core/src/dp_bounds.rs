//! Relations between ε-DP and the divergence-based notions.
//!
//! Covers the pure-DP level of a pair of densities (sup of the log
//! Radon-Nikodym derivative), the KL bound implied by ε-DP, the two
//! Radon-Nikodym models used to rewrite `C_alpha`, the optimal priors and the
//! Chernoff upper bound derived from them, and sequential composition.

use serde::{Deserialize, Serialize};

use crate::distributions::{joint_kinks, joint_range, Density};
use crate::divergences::{bhattacharyya_alpha, chernoff_numeric, kl_numeric, ALPHA_MIN};
use crate::error::{Error, Result};
use crate::numeric::{integrate_tensor, try_maximize_concave, Axis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0, 1], got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        PrivacyBudget::new(epsilon, 0.0)
    }
}

/// Simple sequential composition: budgets add. Delta saturates at 1.
pub fn compose_budgets(budgets: &[PrivacyBudget]) -> PrivacyBudget {
    let epsilon = budgets.iter().map(|b| b.epsilon).sum();
    let delta = budgets.iter().map(|b| b.delta).sum::<f64>().min(1.0);
    PrivacyBudget { epsilon, delta }
}

/// Grid on which `|log dP/dQ|` is maximized.
///
/// The grid is `center ± i * unit / points_per_unit` and is widened by
/// doubling from one unit up to `2^max_doublings` units. A maximum that still
/// grows by more than `growth_tol` on the last doubling is reported as
/// unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub center: f64,
    pub unit: f64,
    pub points_per_unit: usize,
    pub max_doublings: u32,
    pub growth_tol: f64,
}

impl EvalGrid {
    pub fn for_pair(p: &dyn Density, q: &dyn Density) -> Self {
        let kinks: Vec<f64> = p.kink_points().into_iter().chain(q.kink_points()).filter(|k| k.is_finite()).collect();
        let center = if kinks.is_empty() {
            let r = joint_range(p, q);
            0.5 * (r.lo + r.hi)
        } else {
            kinks.iter().sum::<f64>() / kinks.len() as f64
        };
        EvalGrid {
            center,
            unit: p.scale().max(q.scale()),
            points_per_unit: 16,
            max_doublings: 10,
            growth_tol: 1e-9,
        }
    }
}

/// Smallest ε with `|log dP/dQ| <= ε` on the grid, or `f64::INFINITY` when the
/// log-ratio is unbounded (still growing as the grid widens, or one density
/// vanishes where the other does not).
pub fn epsilon_dp_level(p: &dyn Density, q: &dyn Density, grid: &EvalGrid) -> f64 {
    // None when exactly one density vanishes at x.
    let ratio = |x: f64| -> Option<f64> {
        let lp = p.log_eval(x);
        let lq = q.log_eval(x);
        match (lp == f64::NEG_INFINITY, lq == f64::NEG_INFINITY) {
            (true, true) => Some(0.0),
            (false, false) => Some((lp - lq).abs()),
            _ => None,
        }
    };

    let mut best = 0.0f64;
    let fixed = p.kink_points().into_iter().chain(q.kink_points()).filter(|k| k.is_finite());
    for x in fixed.chain(std::iter::once(grid.center)) {
        match ratio(x) {
            Some(r) => best = best.max(r),
            None => return f64::INFINITY,
        }
    }

    let step = grid.unit / grid.points_per_unit as f64;
    let mut covered = 0usize;
    let mut previous = f64::NAN;
    for level in 0..=grid.max_doublings {
        previous = best;
        let half_steps = grid.points_per_unit << level;
        for i in covered + 1..=half_steps {
            let offset = step * i as f64;
            match (ratio(grid.center - offset), ratio(grid.center + offset)) {
                (Some(l), Some(r)) => best = best.max(l).max(r),
                _ => return f64::INFINITY,
            }
        }
        covered = half_steps;
    }
    if best - previous > grid.growth_tol * best.max(1.0) {
        return f64::INFINITY;
    }
    best
}

/// `eps (e^eps - 1)(1 - e^-eps) / (e^eps - e^-eps)`, the largest KL divergence
/// between two ε-close measures. Evaluated as `eps tanh(eps/2)`, which is the
/// same expression.
pub fn kl_bound_from_epsilon(eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::domain(format!("epsilon must be >= 0, got {eps}")));
    }
    if eps == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(eps * (0.5 * eps).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RnModelKind {
    /// `Z = e^eps` with probability `p`, `e^-eps` otherwise, so that `E[Z] = 1`.
    TwoPoint,
    /// Unit (unnormalized) density on `[e^-eps, e^eps]`.
    UniformRange,
}

/// A law for the Radon-Nikodym derivative `Z = dP/dQ` of an ε-DP pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnDerivativeModel {
    pub kind: RnModelKind,
    pub epsilon: f64,
}

impl RnDerivativeModel {
    pub fn new(kind: RnModelKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(RnDerivativeModel { kind, epsilon })
    }

    /// `P(Z = e^eps) = (1 - e^-eps) / (e^eps - e^-eps)` in the two-point model.
    pub fn upper_mass(&self) -> f64 {
        let e = self.epsilon;
        (-(-e).exp_m1()) / (2.0 * e.sinh())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    /// `E[Z^k]`
    Power(f64),
    /// `E[Z log Z]`
    ZLogZ,
}

/// Expectation of `Z^k` or `Z log Z` under the model.
///
/// For the uniform range, `E[Z^k] = (e^{eps(k+1)} - e^{-eps(k+1)}) / (k + 1)`,
/// continued to `2 eps` at `k = -1`.
pub fn rn_expectation(model: &RnDerivativeModel, moment: Moment) -> f64 {
    let e = model.epsilon;
    match (model.kind, moment) {
        (RnModelKind::TwoPoint, Moment::Power(k)) => {
            let p = model.upper_mass();
            p * (e * k).exp() + (1.0 - p) * (-e * k).exp()
        }
        (RnModelKind::TwoPoint, Moment::ZLogZ) => {
            let p = model.upper_mass();
            p * e.exp() * e - (1.0 - p) * (-e).exp() * e
        }
        (RnModelKind::UniformRange, Moment::Power(k)) => {
            let j = k + 1.0;
            let u = e * j;
            if u.abs() < 1e-5 {
                // 2 sinh(u)/j = 2 eps (1 + u^2/6 + u^4/120)
                2.0 * e * (1.0 + u * u / 6.0 + u.powi(4) / 120.0)
            } else {
                2.0 * u.sinh() / j
            }
        }
        (RnModelKind::UniformRange, Moment::ZLogZ) => {
            // ∫ z ln z dz = z^2 ln z / 2 - z^2 / 4
            let anti = |z: f64| 0.5 * z * z * z.ln() - 0.25 * z * z;
            anti(e.exp()) - anti((-e).exp())
        }
    }
}

/// Which change of variables the optimal prior is derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    /// `C_alpha = E_Q[Z^alpha]`
    QBased,
    /// `C_alpha = E_P[Z^(alpha-1)]`
    PBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaStar {
    /// Value confined to `(0, 1]`.
    pub value: f64,
    /// Formula value before confinement.
    pub raw: f64,
    pub clamped: bool,
}

fn check_unit_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1) for log((1+eps)/(1-eps)) to be defined, got {eps}"
        )));
    }
    Ok(())
}

/// `(1/2eps) log((1+eps)/(1-eps))`, i.e. `artanh(eps)/eps`.
fn half_log_ratio_over_eps(eps: f64) -> f64 {
    eps.atanh() / eps
}

/// Optimal prior maximizing the bounded Chernoff objective of each expansion:
/// `artanh(eps)/eps - 1` (Q-based) or `artanh(eps)/eps` (P-based), confined to
/// `(0, 1]` with an explicit flag when the raw value exceeds 1.
pub fn alpha_star_ub(eps: f64, expansion: Expansion) -> Result<AlphaStar> {
    check_unit_epsilon(eps)?;
    let base = half_log_ratio_over_eps(eps);
    let raw = match expansion {
        Expansion::QBased => base - 1.0,
        Expansion::PBased => base,
    };
    let clamped = raw > 1.0;
    Ok(AlphaStar { value: if clamped { 1.0 } else { raw }, raw, clamped })
}

/// `(1/(2eps) + 1/2) log((1+eps)/(1-eps)) - 1 + log(2eps/(1-eps))`, evaluated
/// verbatim.
///
/// Substituting either optimal prior into its bounded objective gives the same
/// expression with `- log(2eps/(1-eps))` instead; see
/// [`chernoff_ub_via_expansion`].
pub fn chernoff_ub_from_epsilon(eps: f64) -> Result<f64> {
    check_unit_epsilon(eps)?;
    let l = (2.0 * eps.atanh()).max(0.0);
    Ok((0.5 / eps + 0.5) * l - 1.0 + (2.0 * eps / (1.0 - eps)).ln())
}

/// Bounded Chernoff objective of each expansion, before maximization:
/// Q-based `a + eps(a+1) - log(e^{2 eps (a+1)} - 1)`,
/// P-based `a - 1 + eps a - log(e^{2 eps a} - 1)`.
pub fn chernoff_ub_objective(eps: f64, alpha: f64, expansion: Expansion) -> f64 {
    match expansion {
        Expansion::QBased => alpha + eps * (alpha + 1.0) - (2.0 * eps * (alpha + 1.0)).exp_m1().ln(),
        Expansion::PBased => alpha - 1.0 + eps * alpha - (2.0 * eps * alpha).exp_m1().ln(),
    }
}

/// Value of the bounded objective at the unconfined optimal prior.
pub fn chernoff_ub_via_expansion(eps: f64, expansion: Expansion) -> Result<f64> {
    let a = alpha_star_ub(eps, expansion)?;
    Ok(chernoff_ub_objective(eps, a.raw, expansion))
}

/// Joint-vs-marginal comparison for a product of independent mechanisms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub pairs: usize,
    pub tol: f64,
    pub alpha: f64,
    pub kl_marginals: Vec<f64>,
    pub kl_sum: f64,
    pub kl_joint: f64,
    pub kl_additive: bool,
    pub affinity_marginals: Vec<f64>,
    pub affinity_product: f64,
    pub affinity_joint: f64,
    pub affinity_multiplicative: bool,
    pub chernoff_marginals: Vec<f64>,
    pub chernoff_sum: f64,
    pub chernoff_joint: f64,
    pub chernoff_joint_alpha_star: f64,
    pub chernoff_subadditive: bool,
}

/// Largest number of pairs the joint quadrature accepts.
pub const MAX_JOINT_PAIRS: usize = 3;

/// Checks, by integrating over the joint product measure, that KL adds and
/// `C_alpha` multiplies across independent coordinates, and that the joint
/// Chernoff information does not exceed the sum of the marginal ones.
pub fn verify_composition_additivity(pairs: &[(&dyn Density, &dyn Density)], tol: f64) -> Result<CompositionReport> {
    verify_composition_additivity_at(pairs, 0.5, tol)
}

pub fn verify_composition_additivity_at(
    pairs: &[(&dyn Density, &dyn Density)],
    alpha: f64,
    tol: f64,
) -> Result<CompositionReport> {
    let m = pairs.len();
    if m == 0 {
        return Err(Error::domain("composition check needs at least one pair"));
    }
    if m > MAX_JOINT_PAIRS {
        return Err(Error::domain(format!(
            "joint quadrature supports at most {MAX_JOINT_PAIRS} pairs, got {m}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }

    let mut kl_marginals = Vec::with_capacity(m);
    let mut affinity_marginals = Vec::with_capacity(m);
    let mut chernoff_marginals = Vec::with_capacity(m);
    for (p, q) in pairs {
        kl_marginals.push(kl_numeric(*p, *q, tol)?.value);
        affinity_marginals.push(bhattacharyya_alpha(*p, *q, alpha, tol)?);
        chernoff_marginals.push(chernoff_numeric(*p, *q, tol)?.value);
    }

    let joint = JointPair::new(pairs);
    let kl_joint = joint.kl()?;
    let affinity_joint = joint.affinity(alpha)?;
    let (chernoff_joint, chernoff_joint_alpha_star) = joint.chernoff()?;

    let kl_sum: f64 = kl_marginals.iter().sum();
    let affinity_product: f64 = affinity_marginals.iter().product();
    let chernoff_sum: f64 = chernoff_marginals.iter().sum();
    let slack = m as f64 * tol;

    Ok(CompositionReport {
        pairs: m,
        tol,
        alpha,
        kl_additive: (kl_joint - kl_sum).abs() <= slack,
        affinity_multiplicative: (affinity_joint - affinity_product).abs() <= slack,
        chernoff_subadditive: chernoff_joint <= chernoff_sum + tol,
        kl_marginals,
        kl_sum,
        kl_joint,
        affinity_marginals,
        affinity_product,
        affinity_joint,
        chernoff_marginals,
        chernoff_sum,
        chernoff_joint,
        chernoff_joint_alpha_star,
    })
}

/// The product measures `P_1 x ... x P_m` and `Q_1 x ... x Q_m`, integrated as
/// genuine m-dimensional densities.
struct JointPair<'a> {
    pairs: &'a [(&'a dyn Density, &'a dyn Density)],
    axes: Vec<Axis>,
    order: usize,
}

impl<'a> JointPair<'a> {
    fn new(pairs: &'a [(&'a dyn Density, &'a dyn Density)]) -> Self {
        let axes = pairs
            .iter()
            .map(|(p, q)| {
                let range = joint_range(*p, *q);
                Axis {
                    lo: range.lo,
                    hi: range.hi,
                    kinks: joint_kinks(*p, *q, range),
                    max_panel: 2.0 * p.scale().min(q.scale()),
                    growth: 1.5,
                }
            })
            .collect();
        let order = match pairs.len() {
            1 => 16,
            2 => 12,
            _ => 6,
        };
        JointPair { pairs, axes, order }
    }

    fn log_densities(&self, x: &[f64]) -> (f64, f64) {
        self.pairs
            .iter()
            .zip(x)
            .fold((0.0, 0.0), |(lp, lq), ((p, q), xi)| (lp + p.log_eval(*xi), lq + q.log_eval(*xi)))
    }

    fn kl(&self) -> Result<f64> {
        let r = integrate_tensor(
            |x| {
                let (lp, lq) = self.log_densities(x);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    lp.exp() * (lp - lq)
                }
            },
            &self.axes,
            self.order,
        )?;
        Ok(r.value)
    }

    fn affinity(&self, alpha: f64) -> Result<f64> {
        let r = integrate_tensor(
            |x| {
                let (lp, lq) = self.log_densities(x);
                (alpha * lp + (1.0 - alpha) * lq).exp()
            },
            &self.axes,
            self.order,
        )?;
        Ok(r.value)
    }

    fn chernoff(&self) -> Result<(f64, f64)> {
        let opt = try_maximize_concave(
            |a| {
                let c = self.affinity(a)?;
                if !(c > 0.0) {
                    return Err(Error::domain(format!("joint affinity vanished at alpha = {a}")));
                }
                Ok(-c.ln())
            },
            ALPHA_MIN,
            1.0 - ALPHA_MIN,
            1e-5,
        )?;
        Ok((opt.max_value.max(0.0), opt.argmax))
    }
}
