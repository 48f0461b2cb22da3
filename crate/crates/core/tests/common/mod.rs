#![allow(dead_code)]

use chernoff_dp::distributions::{Density, Interval, LaplaceDistribution, TAIL_SCALE_UNITS};
use rand::{Rng, RngCore};

pub fn lap(mu: f64, b: f64) -> LaplaceDistribution {
    LaplaceDistribution::new(mu, b).unwrap()
}

/// Finite mixture of Laplace laws sharing one scale. Two such mixtures have a
/// bounded log-ratio: at most `max |mu_i - nu_j| / b`.
#[derive(Debug, Clone)]
pub struct LaplaceMixture {
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub b: f64,
}

impl LaplaceMixture {
    pub fn new(weights: Vec<f64>, means: Vec<f64>, b: f64) -> Self {
        assert_eq!(weights.len(), means.len());
        let total: f64 = weights.iter().sum();
        LaplaceMixture { weights: weights.iter().map(|w| w / total).collect(), means, b }
    }

    pub fn random<R: Rng>(rng: &mut R, components: usize, spread: f64, b: f64) -> Self {
        let weights = (0..components).map(|_| rng.random_range(0.1..1.0)).collect();
        let means = (0..components).map(|_| rng.random_range(-spread..spread)).collect();
        LaplaceMixture::new(weights, means, b)
    }
}

impl Density for LaplaceMixture {
    fn log_eval(&self, x: f64) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.means)
            .map(|(w, m)| w.ln() - (2.0 * self.b).ln() - (x - m).abs() / self.b)
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }

    fn support(&self) -> Interval {
        Interval::REAL_LINE
    }

    fn kink_points(&self) -> Vec<f64> {
        let mut k = self.means.clone();
        k.sort_by(f64::total_cmp);
        k
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        let mut u: f64 = rng.random();
        for (w, m) in self.weights.iter().zip(&self.means) {
            if u < *w {
                return lap(*m, self.b).draw(rng);
            }
            u -= w;
        }
        lap(*self.means.last().unwrap(), self.b).draw(rng)
    }

    fn scale(&self) -> f64 {
        self.b
    }

    fn effective_range(&self) -> Interval {
        let lo = self.means.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo - TAIL_SCALE_UNITS * self.b, hi + TAIL_SCALE_UNITS * self.b)
    }
}
