use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::output::sentinel;
use crate::classify::{error_rate_curve, fit_exponent, ErrorKind, ErrorRates, ExponentFit, MonteCarlo};
use crate::distributions::{Density, LaplaceDistribution};
use crate::divergences::{
    chernoff_laplace_closed_form, chernoff_numeric, kl_laplace_closed_form, kl_numeric, DivergenceEstimate, DEFAULT_TOL,
};
use crate::dp_bounds::{
    compose_budgets, epsilon_dp_level, kl_bound_from_epsilon, verify_composition_additivity, CompositionReport, EvalGrid,
    PrivacyBudget,
};
use crate::error::{Error, Result};
use crate::mechanism::{apply_attack, laplace_mechanism, scenario_to_hypotheses, Attack, AttackScenario, Dataset, LinearQuery};

/// Closed forms next to their numeric counterparts for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub scenario: AttackScenario,
    pub b: f64,
    pub kl_closed: DivergenceEstimate,
    pub kl_numeric: DivergenceEstimate,
    pub kl_reverse_numeric: DivergenceEstimate,
    pub chernoff_closed: DivergenceEstimate,
    pub chernoff_numeric: DivergenceEstimate,
    /// Closed-form expression minus the numeric Chernoff information.
    pub chernoff_closed_deviation: f64,
    #[serde(with = "sentinel")]
    pub epsilon_dp_level: f64,
    /// KL ceiling implied by the scenario's nominal epsilon.
    pub kl_bound: f64,
}

pub fn run_divergence(s: &AttackScenario) -> Result<DivergenceReport> {
    s.validate()?;
    let (p, q) = scenario_to_hypotheses(s)?;
    let chernoff_closed = chernoff_laplace_closed_form(s)?;
    let chernoff_num = chernoff_numeric(&p, &q, DEFAULT_TOL)?;
    Ok(DivergenceReport {
        scenario: *s,
        b: s.b(),
        kl_closed: kl_laplace_closed_form(s)?,
        kl_numeric: kl_numeric(&p, &q, DEFAULT_TOL)?,
        kl_reverse_numeric: kl_numeric(&q, &p, DEFAULT_TOL)?,
        chernoff_closed_deviation: chernoff_closed.value - chernoff_num.value,
        chernoff_closed,
        chernoff_numeric: chernoff_num,
        epsilon_dp_level: epsilon_dp_level(&p, &q, &EvalGrid::for_pair(&p, &q)),
        kl_bound: kl_bound_from_epsilon(s.epsilon)?,
    })
}

/// Fit of one error kind against the divergence it should approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEntry {
    pub which: ErrorKind,
    /// Expected exponent.
    pub oracle: f64,
    pub fit: Option<ExponentFit>,
    /// `|-slope - oracle| / oracle`, when both exist and the oracle is positive.
    pub relative_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub scenario: AttackScenario,
    pub seed: u64,
    pub shards: usize,
    pub trials: usize,
    pub m_grid: Vec<usize>,
    /// Set when the two hypotheses coincide and no exponent exists.
    pub degenerate: bool,
    /// `D(null || alternative)`, the miss exponent.
    pub kl_null_alt: f64,
    /// `D(alternative || null)`, the false-alarm exponent.
    pub kl_alt_null: f64,
    /// Chernoff information, the average-error exponent.
    pub chernoff: f64,
    pub rates: Vec<ErrorRates>,
    pub fits: Vec<FitEntry>,
}

pub fn run_classify(s: &AttackScenario, m_grid: &[usize], trials: usize, mc: &MonteCarlo) -> Result<ClassifyReport> {
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("m grid must be nonempty and strictly increasing"));
    }
    let (p, q) = scenario_to_hypotheses(s)?;
    let kl_null_alt = kl_numeric(&p, &q, DEFAULT_TOL)?.value;
    let kl_alt_null = kl_numeric(&q, &p, DEFAULT_TOL)?.value;
    let chernoff = chernoff_numeric(&p, &q, DEFAULT_TOL)?.value;
    let rates = error_rate_curve(s, m_grid, trials, mc)?;

    let fits = [(ErrorKind::Fa, kl_alt_null), (ErrorKind::Miss, kl_null_alt), (ErrorKind::Avg, chernoff)]
        .into_iter()
        .map(|(which, oracle)| match fit_exponent(&rates, which) {
            Ok(fit) => {
                let relative_error = (oracle > 0.0).then(|| (-fit.slope - oracle).abs() / oracle);
                FitEntry { which, oracle, fit: Some(fit), relative_error, error: None }
            }
            Err(e) => FitEntry { which, oracle, fit: None, relative_error: None, error: Some(e.to_string()) },
        })
        .collect();

    Ok(ClassifyReport {
        scenario: *s,
        seed: mc.seed,
        shards: mc.shards,
        trials,
        m_grid: m_grid.to_vec(),
        degenerate: crate::distributions::identical(&p, &q),
        kl_null_alt,
        kl_alt_null,
        chernoff,
        rates,
        fits,
    })
}

/// Two Laplace laws `Lap(mu0, b0)` vs `Lap(mu1, b1)` for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePair {
    pub mu0: f64,
    pub b0: f64,
    pub mu1: f64,
    pub b1: f64,
}

impl LaplacePair {
    pub fn distributions(&self) -> Result<(LaplaceDistribution, LaplaceDistribution)> {
        Ok((LaplaceDistribution::new(self.mu0, self.b0)?, LaplaceDistribution::new(self.mu1, self.b1)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub budgets: Vec<PrivacyBudget>,
    pub composed: PrivacyBudget,
    pub pairs: Vec<LaplacePair>,
    pub verification: Option<CompositionReport>,
}

pub fn run_compose(budgets: &[PrivacyBudget], pairs: &[LaplacePair]) -> Result<ComposeReport> {
    let verification = if pairs.is_empty() {
        None
    } else {
        let laws = pairs.iter().map(LaplacePair::distributions).collect::<Result<Vec<_>>>()?;
        let refs: Vec<(&dyn Density, &dyn Density)> = laws.iter().map(|(p, q)| (p as &dyn Density, q as &dyn Density)).collect();
        Some(verify_composition_additivity(&refs, 1e-6)?)
    };
    Ok(ComposeReport { budgets: budgets.to_vec(), composed: compose_budgets(budgets), pairs: pairs.to_vec(), verification })
}

/// One release before and one after a single-record attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismReport {
    pub query: LinearQuery,
    pub records: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub sensitivity: f64,
    pub true_value: f64,
    pub released: f64,
    pub attack: Attack,
    pub attacked_true_value: f64,
    pub attacked_released: f64,
    pub scenario: AttackScenario,
    pub kl_closed: f64,
    pub chernoff_numeric: f64,
}

pub fn run_mechanism(
    d: &Dataset,
    query: &LinearQuery,
    attack: Attack,
    epsilon: f64,
    theta: f64,
    seed: u64,
) -> Result<MechanismReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attacked = apply_attack(d, attack)?;
    let released = laplace_mechanism(d, query, epsilon, &mut rng)?;
    let attacked_released = laplace_mechanism(&attacked, query, epsilon, &mut rng)?;
    let scenario = AttackScenario::from_attack(d, query, attack, epsilon, theta, 0.5)?;
    let (p, q) = scenario_to_hypotheses(&scenario)?;
    Ok(MechanismReport {
        query: *query,
        records: d.len(),
        epsilon,
        seed,
        sensitivity: query.sensitivity(),
        true_value: query.evaluate(d),
        released,
        attack,
        attacked_true_value: query.evaluate(&attacked),
        attacked_released,
        scenario,
        kl_closed: kl_laplace_closed_form(&scenario)?.value,
        chernoff_numeric: chernoff_numeric(&p, &q, DEFAULT_TOL)?.value,
    })
}
