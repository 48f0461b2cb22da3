//! Laplace mechanism over clamped scalar records, single-record attacks, and
//! the null/alternative pair an attack induces on the released value.

use std::io::BufRead;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::LaplaceDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::domain(format!("clamp bounds must satisfy lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Bounds { lo, hi })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Scalar records, each inside the declared bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    records: Vec<f64>,
    bounds: Bounds,
}

impl Dataset {
    /// Builds a dataset, clamping every value into `bounds`.
    pub fn new(values: impl IntoIterator<Item = f64>, bounds: Bounds) -> Result<Self> {
        let mut records = Vec::new();
        for v in values {
            if v.is_nan() {
                return Err(Error::domain("dataset records must not be NaN"));
            }
            records.push(bounds.clamp(v));
        }
        Ok(Dataset { records, bounds })
    }

    pub fn empty(bounds: Bounds) -> Self {
        Dataset { records: Vec::new(), bounds }
    }

    /// Reads one numeric record per line. Blank lines are skipped; anything
    /// else that does not parse is an error carrying its 1-based line number.
    pub fn read_from<R: BufRead>(reader: R, bounds: Bounds) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let v: f64 = trimmed.parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("cannot parse {trimmed:?} as a number: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: i + 1, message: format!("record {trimmed:?} is not finite") });
            }
            values.push(v);
        }
        Dataset::new(values, bounds)
    }

    pub fn records(&self) -> &[f64] {
        &self.records
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Sum,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearQuery {
    pub kind: QueryKind,
    pub clamp: Bounds,
}

impl LinearQuery {
    /// Sum queries need `lo <= 0 <= hi`: adding or removing a record then
    /// moves the sum by at most `hi - lo`.
    pub fn new(kind: QueryKind, clamp: Bounds) -> Result<Self> {
        if kind == QueryKind::Sum && !(clamp.lo <= 0.0 && 0.0 <= clamp.hi) {
            return Err(Error::domain(format!(
                "sum query clamp [{}, {}] must contain 0",
                clamp.lo, clamp.hi
            )));
        }
        Ok(LinearQuery { kind, clamp })
    }

    pub fn sensitivity(&self) -> f64 {
        match self.kind {
            QueryKind::Sum => self.clamp.hi - self.clamp.lo,
            QueryKind::Count => 1.0,
        }
    }

    pub fn evaluate(&self, d: &Dataset) -> f64 {
        match self.kind {
            QueryKind::Sum => d.records.iter().map(|x| self.clamp.clamp(*x)).sum(),
            QueryKind::Count => d.records.len() as f64,
        }
    }
}

/// `q(d) + Z` with `Z ~ Lap(0, s / eps)`.
pub fn laplace_mechanism<R: Rng + ?Sized>(d: &Dataset, q: &LinearQuery, eps: f64, rng: &mut R) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {eps}")));
    }
    let noise = LaplaceDistribution::new(0.0, q.sensitivity() / eps)?;
    Ok(q.evaluate(d) + noise.draw(rng))
}

/// A single-record change made by the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attack {
    Insert(f64),
    Delete(usize),
}

/// Returns the neighbouring dataset produced by `attack`.
pub fn apply_attack(d: &Dataset, attack: Attack) -> Result<Dataset> {
    let mut records = d.records.clone();
    match attack {
        Attack::Insert(v) => {
            if !d.bounds.contains(v) {
                return Err(Error::OutOfBounds { value: v, lo: d.bounds.lo, hi: d.bounds.hi });
            }
            records.push(v);
        }
        Attack::Delete(i) => {
            if i >= records.len() {
                return Err(Error::IndexOutOfRange { index: i, len: records.len() });
            }
            records.remove(i);
        }
    }
    Ok(Dataset { records, bounds: d.bounds })
}

/// Parameters of the null-vs-alternative test on a released value.
///
/// Null: `Lap(0, b)`; alternative: `Lap(delta_mu, theta * b)`, with
/// `b = sensitivity / epsilon`. `prior_alpha` is the prior of the null.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    pub epsilon: f64,
    pub sensitivity: f64,
    pub delta_mu: f64,
    pub theta: f64,
    pub prior_alpha: f64,
}

impl AttackScenario {
    pub fn new(epsilon: f64, sensitivity: f64, delta_mu: f64, theta: f64, prior_alpha: f64) -> Result<Self> {
        let s = AttackScenario { epsilon, sensitivity, delta_mu, theta, prior_alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(Error::domain(format!("sensitivity must be positive, got {}", self.sensitivity)));
        }
        if !self.delta_mu.is_finite() {
            return Err(Error::domain("delta_mu must be finite"));
        }
        if !(self.theta >= 1.0 && self.theta.is_finite()) {
            return Err(Error::domain(format!("theta must be >= 1, got {}", self.theta)));
        }
        if !(self.prior_alpha > 0.0 && self.prior_alpha < 1.0) {
            return Err(Error::domain(format!("prior_alpha must lie in (0, 1), got {}", self.prior_alpha)));
        }
        Ok(())
    }

    /// Noise scale `s / eps` of the unattacked release.
    pub fn b(&self) -> f64 {
        self.sensitivity / self.epsilon
    }

    /// Scenario whose shift is the query change caused by `attack` on `d`.
    pub fn from_attack(
        d: &Dataset,
        q: &LinearQuery,
        attack: Attack,
        epsilon: f64,
        theta: f64,
        prior_alpha: f64,
    ) -> Result<Self> {
        let after = apply_attack(d, attack)?;
        let delta_mu = q.evaluate(&after) - q.evaluate(d);
        AttackScenario::new(epsilon, q.sensitivity(), delta_mu, theta, prior_alpha)
    }
}

/// `(Lap(0, b), Lap(delta_mu, theta * b))`.
pub fn scenario_to_hypotheses(s: &AttackScenario) -> Result<(LaplaceDistribution, LaplaceDistribution)> {
    let b = s.b();
    Ok((LaplaceDistribution::new(0.0, b)?, LaplaceDistribution::new(s.delta_mu, s.theta * b)?))
}
