//! Bayesian binary hypothesis testing between the two output laws of an
//! attack scenario: a likelihood-ratio decision on `m` i.i.d. observations,
//! Monte Carlo error rates, and least-squares error-exponent fits.
//!
//! Trials are split into shards. Each shard draws from its own ChaCha8 stream
//! derived from `(seed, m, hypothesis, shard)`, so for a fixed seed and shard
//! count the counts do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Density, LaplaceDistribution};
use crate::error::{Error, Result};
use crate::mechanism::{scenario_to_hypotheses, AttackScenario};

pub const MIN_TRIALS: usize = 1000;

/// Fit points with fewer error events are dropped.
pub const MIN_ERROR_EVENTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// Decides H1 iff `Σ log(p1(x)/p0(x)) > log(alpha / (1 - alpha))`. Ties go to H0.
pub fn llr_decide<D0, D1>(observations: &[f64], p0: &D0, p1: &D1, prior_alpha: f64) -> Result<Hypothesis>
where
    D0: Density + ?Sized,
    D1: Density + ?Sized,
{
    if observations.is_empty() {
        return Err(Error::domain("at least one observation is required"));
    }
    if !(prior_alpha > 0.0 && prior_alpha < 1.0) {
        return Err(Error::domain(format!("prior_alpha must lie in (0, 1), got {prior_alpha}")));
    }
    let mut llr = 0.0;
    for &x in observations {
        let (l0, l1) = (p0.log_eval(x), p1.log_eval(x));
        if l0 == f64::NEG_INFINITY || l1 == f64::NEG_INFINITY {
            return Err(Error::ZeroDensity { x });
        }
        llr += l1 - l0;
    }
    Ok(if llr > threshold(prior_alpha) { Hypothesis::H1 } else { Hypothesis::H0 })
}

fn threshold(prior_alpha: f64) -> f64 {
    (prior_alpha / (1.0 - prior_alpha)).ln()
}

/// Empirical error probabilities at one observation count `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub m: usize,
    pub trials: usize,
    pub prior_alpha: f64,
    pub false_alarms: u64,
    pub misses: u64,
    pub p_fa: f64,
    pub p_miss: f64,
    /// `alpha p_fa + (1 - alpha) p_miss`
    pub p_e: f64,
    /// Largest 95% normal-approximation half-width among the three rates.
    pub ci_radius: f64,
}

/// Seed and sharding of a Monte Carlo run. Together they fix every draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub seed: u64,
    pub shards: usize,
}

impl MonteCarlo {
    pub fn new(seed: u64, shards: usize) -> Result<Self> {
        if shards == 0 {
            return Err(Error::domain("shard count must be at least 1"));
        }
        Ok(MonteCarlo { seed, shards })
    }

    fn rng(&self, m: usize, hypothesis: Hypothesis, shard: usize) -> ChaCha8Rng {
        let tag = match hypothesis {
            Hypothesis::H0 => 0x5eed_0000u64,
            Hypothesis::H1 => 0x5eed_0001u64,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(splitmix(self.seed ^ tag) ^ m as u64));
        rng.set_stream(shard as u64);
        rng
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce5_e9b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn shard_sizes(trials: usize, shards: usize) -> impl Iterator<Item = (usize, usize)> {
    let base = trials / shards;
    let extra = trials % shards;
    (0..shards).map(move |j| (j, base + usize::from(j < extra)))
}

/// Counts trials under `truth` that the LLR rule assigns to the other hypothesis.
fn count_errors(
    p0: &LaplaceDistribution,
    p1: &LaplaceDistribution,
    truth: Hypothesis,
    m: usize,
    trials: usize,
    prior_alpha: f64,
    mc: &MonteCarlo,
) -> u64 {
    let source = match truth {
        Hypothesis::H0 => p0,
        Hypothesis::H1 => p1,
    };
    let t = threshold(prior_alpha);
    let shards: Vec<(usize, usize)> = shard_sizes(trials, mc.shards).collect();
    shards
        .into_par_iter()
        .map(|(shard, n)| {
            let mut rng = mc.rng(m, truth, shard);
            let mut errors = 0u64;
            for _ in 0..n {
                let mut llr = 0.0;
                for _ in 0..m {
                    let x = source.draw(&mut rng);
                    llr += p1.log_pdf(x) - p0.log_pdf(x);
                }
                let decided_h1 = llr > t;
                let wrong = match truth {
                    Hypothesis::H0 => decided_h1,
                    Hypothesis::H1 => !decided_h1,
                };
                errors += u64::from(wrong);
            }
            errors
        })
        .sum()
}

fn ci95(rate: f64, trials: usize) -> f64 {
    1.96 * (rate * (1.0 - rate) / trials as f64).sqrt()
}

/// Runs `trials` simulations under each hypothesis with `m` draws apiece.
pub fn estimate_error_rates(s: &AttackScenario, m: usize, trials: usize, mc: &MonteCarlo) -> Result<ErrorRates> {
    s.validate()?;
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    if trials < MIN_TRIALS {
        return Err(Error::domain(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    let (p0, p1) = scenario_to_hypotheses(s)?;
    let false_alarms = count_errors(&p0, &p1, Hypothesis::H0, m, trials, s.prior_alpha, mc);
    let misses = count_errors(&p0, &p1, Hypothesis::H1, m, trials, s.prior_alpha, mc);
    let n = trials as f64;
    let p_fa = false_alarms as f64 / n;
    let p_miss = misses as f64 / n;
    let p_e = s.prior_alpha * p_fa + (1.0 - s.prior_alpha) * p_miss;
    let ci_radius = ci95(p_fa, trials).max(ci95(p_miss, trials)).max(ci95(p_e, trials));
    Ok(ErrorRates { m, trials, prior_alpha: s.prior_alpha, false_alarms, misses, p_fa, p_miss, p_e, ci_radius })
}

/// Error rates for every `m` in the grid, in grid order.
pub fn error_rate_curve(s: &AttackScenario, m_grid: &[usize], trials: usize, mc: &MonteCarlo) -> Result<Vec<ErrorRates>> {
    m_grid.iter().map(|&m| estimate_error_rates(s, m, trials, mc)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    /// False alarm; exponent D(Q || P).
    Fa,
    /// Miss; exponent D(P || Q).
    Miss,
    /// Prior-weighted average; exponent C(P, Q).
    Avg,
}

impl ErrorKind {
    fn rate(&self, r: &ErrorRates) -> f64 {
        match self {
            ErrorKind::Fa => r.p_fa,
            ErrorKind::Miss => r.p_miss,
            ErrorKind::Avg => r.p_e,
        }
    }

    fn events(&self, r: &ErrorRates) -> u64 {
        match self {
            ErrorKind::Fa => r.false_alarms,
            ErrorKind::Miss => r.misses,
            ErrorKind::Avg => r.false_alarms + r.misses,
        }
    }
}

/// Least-squares line through `(m, ln rate)`; `slope` estimates minus the
/// error exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub which: ErrorKind,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(usize, f64)>,
    /// Grid values dropped for having fewer than 100 error events.
    pub discarded: Vec<usize>,
}

/// Fits `ln rate = intercept + slope * m` over the given rates.
pub fn fit_exponent(rates: &[ErrorRates], which: ErrorKind) -> Result<ExponentFit> {
    if rates.windows(2).any(|w| w[1].m <= w[0].m) {
        return Err(Error::domain("m values must be strictly increasing"));
    }
    if let Some(r) = rates.iter().find(|r| which.rate(r) == 0.0) {
        return Err(Error::DegenerateFit(format!(
            "no {which:?} error events at m = {}; raise trials or shrink m",
            r.m
        )));
    }
    let mut points = Vec::new();
    let mut discarded = Vec::new();
    for r in rates {
        if which.events(r) < MIN_ERROR_EVENTS {
            discarded.push(r.m);
        } else {
            points.push((r.m, which.rate(r).ln()));
        }
    }
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "only {} grid point(s) with at least {MIN_ERROR_EVENTS} error events",
            points.len()
        )));
    }

    let n = points.len() as f64;
    let mx = points.iter().map(|(m, _)| *m as f64).sum::<f64>() / n;
    let my = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(m, _)| (*m as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|(m, y)| (*m as f64 - mx) * (y - my)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A flat series is fitted perfectly by a zero slope.
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };

    Ok(ExponentFit { which, slope, intercept, r_squared, points, discarded })
}

/// Simulates the grid and fits one exponent.
pub fn fit_error_exponent(
    s: &AttackScenario,
    m_grid: &[usize],
    trials: usize,
    mc: &MonteCarlo,
    which: ErrorKind,
) -> Result<ExponentFit> {
    if m_grid.len() < 4 {
        return Err(Error::domain("m grid needs at least 4 values"));
    }
    if m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("m grid must be strictly increasing"));
    }
    let rates = error_rate_curve(s, m_grid, trials, mc)?;
    fit_exponent(&rates, which)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    fn pair() -> (LaplaceDistribution, LaplaceDistribution) {
        (LaplaceDistribution::new(0.0, 1.0).unwrap(), LaplaceDistribution::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn single_observation_decisions() {
        let (p0, p1) = pair();
        assert_eq!(llr_decide(&[0.0], &p0, &p1, 0.5).unwrap(), Hypothesis::H0);
        assert_eq!(llr_decide(&[1.0], &p0, &p1, 0.5).unwrap(), Hypothesis::H1);
        // LLR is exactly zero at the midpoint
        assert_eq!(llr_decide(&[0.5], &p0, &p1, 0.5).unwrap(), Hypothesis::H0);
    }

    #[test]
    fn prior_moves_threshold() {
        let (p0, p1) = pair();
        // LLR(0.8) = 0.6 > log(0.6/0.4) = 0.405 but < log(0.7/0.3) = 0.847
        assert_eq!(llr_decide(&[0.8], &p0, &p1, 0.6).unwrap(), Hypothesis::H1);
        assert_eq!(llr_decide(&[0.8], &p0, &p1, 0.7).unwrap(), Hypothesis::H0);
    }

    #[test]
    fn decide_rejects_bad_input() {
        let (p0, p1) = pair();
        assert!(llr_decide(&[], &p0, &p1, 0.5).is_err());
        assert!(llr_decide(&[0.0], &p0, &p1, 0.0).is_err());
    }

    #[test]
    fn indistinguishable_hypotheses() {
        let s = AttackScenario::new(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let r = estimate_error_rates(&s, 3, 2000, &MonteCarlo::new(1, 4).unwrap()).unwrap();
        assert_eq!(r.p_fa, 0.0);
        assert_eq!(r.p_miss, 1.0);
        assert_eq!(r.p_e, 0.5);
    }

    #[test]
    fn bayes_error_at_one_observation() {
        let s = AttackScenario::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let (p0, p1) = pair();
        let a = s.prior_alpha;
        let exact = integrate(|x| (a * p0.pdf(x)).min((1.0 - a) * p1.pdf(x)), -41.0, 41.0, &[0.0, 1.0], 1e-12)
            .unwrap()
            .value;
        let r = estimate_error_rates(&s, 1, 200_000, &MonteCarlo::new(11, 8).unwrap()).unwrap();
        assert!((r.p_e - exact).abs() <= 3.0 * r.ci_radius, "{} vs {exact}", r.p_e);
        assert!((r.p_e - (a * r.p_fa + (1.0 - a) * r.p_miss)).abs() <= 2.0 / r.trials as f64);
    }

    #[test]
    fn deterministic_given_seed_and_shards() {
        let s = AttackScenario::new(0.7, 1.0, 1.0, 1.3, 0.4).unwrap();
        let mc = MonteCarlo::new(99, 5).unwrap();
        let a = estimate_error_rates(&s, 4, 5000, &mc).unwrap();
        let b = estimate_error_rates(&s, 4, 5000, &mc).unwrap();
        assert_eq!(a, b);
        let c = estimate_error_rates(&s, 4, 5000, &MonteCarlo::new(100, 5).unwrap()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shard_sizes_cover_trials() {
        let total: usize = shard_sizes(1003, 4).map(|(_, n)| n).sum();
        assert_eq!(total, 1003);
    }

    #[test]
    fn rejects_bad_monte_carlo_arguments() {
        let s = AttackScenario::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let mc = MonteCarlo::new(0, 1).unwrap();
        assert!(estimate_error_rates(&s, 0, 1000, &mc).is_err());
        assert!(estimate_error_rates(&s, 1, 999, &mc).is_err());
        assert!(MonteCarlo::new(0, 0).is_err());
    }

    fn synthetic(m: usize, rate: f64, trials: usize) -> ErrorRates {
        let events = (rate * trials as f64).round() as u64;
        ErrorRates {
            m,
            trials,
            prior_alpha: 0.5,
            false_alarms: events,
            misses: events,
            p_fa: rate,
            p_miss: rate,
            p_e: rate,
            ci_radius: 0.0,
        }
    }

    #[test]
    fn fit_recovers_exact_exponential() {
        let rates: Vec<ErrorRates> = [5, 10, 15, 20].iter().map(|&m| synthetic(m, 0.8 * (-0.2 * m as f64).exp(), 1_000_000)).collect();
        let fit = fit_exponent(&rates, ErrorKind::Avg).unwrap();
        assert!((fit.slope + 0.2).abs() < 1e-3);
        assert!(fit.r_squared > 0.999);
        assert!(fit.discarded.is_empty());
    }

    #[test]
    fn fit_discards_sparse_points_and_rejects_zero_rates() {
        let mut rates: Vec<ErrorRates> = [5, 10, 15, 20].iter().map(|&m| synthetic(m, (-0.4 * m as f64).exp(), 10_000)).collect();
        let fit = fit_exponent(&rates, ErrorKind::Fa).unwrap();
        assert_eq!(fit.discarded, vec![15, 20]);
        rates[3].p_fa = 0.0;
        rates[3].false_alarms = 0;
        assert!(matches!(fit_exponent(&rates, ErrorKind::Fa), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn identical_hypotheses_fit() {
        let s = AttackScenario::new(1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let mc = MonteCarlo::new(3, 2).unwrap();
        let avg = fit_error_exponent(&s, &[1, 2, 3, 4], 1000, &mc, ErrorKind::Avg).unwrap();
        assert_eq!(avg.slope, 0.0);
        assert!(matches!(fit_error_exponent(&s, &[1, 2, 3, 4], 1000, &mc, ErrorKind::Fa), Err(Error::DegenerateFit(_))));
    }
}
