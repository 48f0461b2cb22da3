//! One-dimensional densities.
//!
//! [`Density`] is the carrier used by every numerical routine in the crate.
//! [`LaplaceDistribution`] is the only concrete family; other implementations
//! (mixtures, truncated shapes) are expected to come from callers and tests.

use std::any::Any;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of scale units kept on either side of a Laplace location when an
/// integral over the real line is truncated. The dropped tail mass is
/// `exp(-40) ~ 4e-18`.
pub const TAIL_SCALE_UNITS: f64 = 40.0;

/// A closed interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Intersection; may come out empty (`lo >= hi`).
    pub fn clip(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// A probability density on the real line with respect to Lebesgue measure.
///
/// Implementations must keep `eval(x) == log_eval(x).exp()` wherever the
/// density is positive, and return zero (`-inf` in log space) outside
/// [`Density::support`].
pub trait Density: Any + Send + Sync {
    fn log_eval(&self, x: f64) -> f64;

    fn eval(&self, x: f64) -> f64 {
        self.log_eval(x).exp()
    }

    fn support(&self) -> Interval;

    /// Ordered points where the density is not smooth. Quadrature splits there.
    fn kink_points(&self) -> Vec<f64>;

    fn sample(&self, rng: &mut dyn RngCore) -> f64;

    /// Characteristic width, used to size evaluation grids.
    fn scale(&self) -> f64;

    /// Window outside of which the remaining probability mass is negligible
    /// (below double-precision noise). Integrals over the support are
    /// truncated to this window.
    fn effective_range(&self) -> Interval;

    fn as_laplace(&self) -> Option<&LaplaceDistribution> {
        None
    }
}

/// Returns true when both densities are known to be the same measure.
pub(crate) fn identical(p: &dyn Density, q: &dyn Density) -> bool {
    match (p.as_laplace(), q.as_laplace()) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

/// Laplace density `(1/2b) exp(-|x - mu| / b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceDistribution {
    mu: f64,
    b: f64,
}

impl LaplaceDistribution {
    pub fn new(mu: f64, b: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!("Laplace location must be finite, got {mu}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("Laplace scale must be positive and finite, got {b}")));
        }
        Ok(LaplaceDistribution { mu, b })
    }

    pub fn standard() -> Self {
        LaplaceDistribution { mu: 0.0, b: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (-(x - self.mu).abs() / self.b).exp() / (2.0 * self.b)
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        -(x - self.mu).abs() / self.b - (2.0 * self.b).ln()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.b;
        if z < 0.0 {
            0.5 * z.exp()
        } else {
            1.0 - 0.5 * (-z).exp()
        }
    }

    /// Inverse CDF for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        if p < 0.5 {
            self.mu + self.b * (2.0 * p).ln()
        } else {
            self.mu - self.b * (2.0 - 2.0 * p).ln()
        }
    }

    /// Inverse-CDF draw: `mu - b sgn(u) ln(1 - 2|u|)` with `u` uniform on the
    /// open interval (-1/2, 1/2).
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = loop {
            let v: f64 = rng.random();
            // v == 0 maps to u = -1/2, which sends ln(1 - 2|u|) to -inf.
            if v > 0.0 {
                break v - 0.5;
            }
        };
        self.mu - self.b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }
}

impl Density for LaplaceDistribution {
    fn log_eval(&self, x: f64) -> f64 {
        self.log_pdf(x)
    }

    fn eval(&self, x: f64) -> f64 {
        self.pdf(x)
    }

    fn support(&self) -> Interval {
        Interval::REAL_LINE
    }

    fn kink_points(&self) -> Vec<f64> {
        vec![self.mu]
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        self.draw(rng)
    }

    fn scale(&self) -> f64 {
        self.b
    }

    fn effective_range(&self) -> Interval {
        Interval::new(
            self.mu - TAIL_SCALE_UNITS * self.b,
            self.mu + TAIL_SCALE_UNITS * self.b,
        )
    }

    fn as_laplace(&self) -> Option<&LaplaceDistribution> {
        Some(self)
    }
}

/// `(1/(2b)) exp(-|x - mu| / b)`.
pub fn laplace_pdf(d: &LaplaceDistribution, x: f64) -> f64 {
    d.pdf(x)
}

pub fn laplace_sample<R: Rng + ?Sized>(d: &LaplaceDistribution, rng: &mut R) -> f64 {
    d.draw(rng)
}

/// Pointwise log Radon-Nikodym derivative `log p(x) - log q(x)`.
pub fn log_density_ratio(p: &dyn Density, q: &dyn Density, x: f64) -> Result<f64> {
    let lq = q.log_eval(x);
    if lq == f64::NEG_INFINITY {
        return Err(Error::UndefinedRatio { x });
    }
    Ok(p.log_eval(x) - lq)
}

/// Sorted, deduplicated kink points of both densities that fall inside `range`.
pub(crate) fn joint_kinks(p: &dyn Density, q: &dyn Density, range: Interval) -> Vec<f64> {
    let mut kinks: Vec<f64> = p
        .kink_points()
        .into_iter()
        .chain(q.kink_points())
        .filter(|k| k.is_finite() && range.lo < *k && *k < range.hi)
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    kinks
}

/// Integration window covering both densities, clipped to their supports.
pub(crate) fn joint_range(p: &dyn Density, q: &dyn Density) -> Interval {
    let window = p.effective_range().hull(&q.effective_range());
    let support = p.support().hull(&q.support());
    Interval::new(window.lo.max(support.lo), window.hi.min(support.hi))
}
