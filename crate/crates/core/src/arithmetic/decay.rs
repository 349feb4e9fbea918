use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::ArithmeticError;

/// Closed form of a positive sequence, used for extrapolation and for
/// definite Bruno verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    /// `a_k = c`.
    Constant { c: f64 },
    /// `a_k = c·ratio^k`.
    Geometric { c: f64, ratio: f64 },
    /// `a_k = c·(k+1)^{−power}`.
    Polynomial { c: f64, power: f64 },
    /// `a_k = scale·base^{−growth^k}` with `base > 1`.
    DoublyExponential { scale: f64, base: f64, growth: f64 },
}

impl Descriptor {
    pub fn ln_value(&self, k: usize) -> f64 {
        let k = k as f64;
        match *self {
            Descriptor::Constant { c } => c.ln(),
            Descriptor::Geometric { c, ratio } => c.ln() + k * ratio.ln(),
            Descriptor::Polynomial { c, power } => c.ln() - power * (k + 1.0).ln(),
            Descriptor::DoublyExponential { scale, base, growth } => scale.ln() - growth.powf(k) * base.ln(),
        }
    }

    fn validate(&self) -> Result<(), ArithmeticError> {
        let ok = match *self {
            Descriptor::Constant { c } => c > 0.0,
            Descriptor::Geometric { c, ratio } => c > 0.0 && ratio > 0.0,
            Descriptor::Polynomial { c, power } => c > 0.0 && power.is_finite(),
            Descriptor::DoublyExponential { scale, base, growth } => scale > 0.0 && base > 1.0 && growth > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ArithmeticError::InvalidInput(format!("descriptor {self:?}")))
        }
    }

    fn is_nonincreasing(&self) -> bool {
        match *self {
            Descriptor::Constant { .. } => true,
            Descriptor::Geometric { ratio, .. } => ratio <= 1.0,
            Descriptor::Polynomial { power, .. } => power >= 0.0,
            Descriptor::DoublyExponential { growth, .. } => growth >= 1.0,
        }
    }

    /// Whether `Σ −log min(1,a_k)/2^k` converges.
    pub fn is_moderate(&self) -> bool {
        match *self {
            Descriptor::DoublyExponential { growth, .. } => growth < 2.0,
            _ => true,
        }
    }
}

/// A positive sequence `(a_k)`. Logarithms are kept next to the values so
/// that very fast decay never underflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySequence {
    values: Vec<f64>,
    ln_values: Vec<f64>,
    pub generator: Option<Descriptor>,
    pub monotone: bool,
}

impl DecaySequence {
    pub fn new(values: Vec<f64>, monotone: bool) -> Result<Self, ArithmeticError> {
        if let Some(i) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(ArithmeticError::NonPositive { index: i });
        }
        let ln = values.iter().map(|v| v.ln()).collect();
        Self::build(values, ln, None, monotone)
    }

    pub fn from_descriptor(desc: Descriptor, k_max: usize) -> Result<Self, ArithmeticError> {
        desc.validate()?;
        let ln = (0..=k_max).map(|k| desc.ln_value(k)).collect();
        let mono = desc.is_nonincreasing();
        Self::from_ln(ln, Some(desc), mono)
    }

    fn from_ln(ln_values: Vec<f64>, generator: Option<Descriptor>, monotone: bool) -> Result<Self, ArithmeticError> {
        let values = ln_values.iter().map(|v| v.exp()).collect();
        Self::build(values, ln_values, generator, monotone)
    }

    fn build(
        values: Vec<f64>,
        ln_values: Vec<f64>,
        generator: Option<Descriptor>,
        monotone: bool,
    ) -> Result<Self, ArithmeticError> {
        if let Some(i) = ln_values.iter().position(|v| !v.is_finite()) {
            return Err(ArithmeticError::NonPositive { index: i });
        }
        if monotone {
            if let Some(i) = ln_values.windows(2).position(|w| w[1] > w[0]) {
                return Err(ArithmeticError::NotMonotone { index: i + 1 });
            }
        }
        Ok(Self { values, ln_values, generator, monotone })
    }

    /// Number of stored terms (`K_max + 1`).
    pub fn len(&self) -> usize {
        self.ln_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_values.is_empty()
    }

    /// `log a_k`, extrapolated by the generator past the stored terms.
    pub fn ln_value(&self, k: usize) -> Result<f64, ArithmeticError> {
        if let Some(v) = self.ln_values.get(k) {
            return Ok(*v);
        }
        match &self.generator {
            Some(d) => Ok(d.ln_value(k)),
            None => Err(ArithmeticError::TooShort { have: self.ln_values.len(), need: k }),
        }
    }

    pub fn value(&self, k: usize) -> Result<f64, ArithmeticError> {
        match self.values.get(k) {
            Some(v) => Ok(*v),
            None => self.ln_value(k).map(f64::exp),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Termwise product `(ρ_k a_k)`.
    pub fn product(&self, other: &DecaySequence) -> Result<DecaySequence, ArithmeticError> {
        let n = self.len().min(other.len());
        let ln = (0..n).map(|k| Ok(self.ln_value(k)? + other.ln_value(k)?)).collect::<Result<_, _>>()?;
        let vals = (0..n).map(|k| Ok(self.value(k)? * other.value(k)?)).collect::<Result<_, _>>()?;
        Self::build(vals, ln, None, self.monotone && other.monotone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Moderate,
    NotModerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrunoReport {
    pub partial_sum: f64,
    pub verdict: Verdict,
    pub k: usize,
}

/// `S_K = −Σ_{k≤K} log min(1, a_k)/2^k` with a three-valued verdict that is
/// definite only when a closed-form generator is attached.
pub fn bruno_diagnostic(a: &DecaySequence, k: usize) -> Result<BrunoReport, ArithmeticError> {
    let mut s = 0.0;
    for j in 0..=k {
        let l = a.ln_value(j)?;
        s += -l.min(0.0) / 2f64.powi(j as i32);
    }
    let verdict = match &a.generator {
        Some(d) if d.is_moderate() => Verdict::Moderate,
        Some(_) => Verdict::NotModerate,
        None => Verdict::Inconclusive,
    };
    Ok(BrunoReport { partial_sum: s, verdict, k })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    /// `Σ_{k≤K} 2^{(k+1)n+1} √ρ_k`.
    pub hypothesis_sum: f64,
    /// `Σ_{k≤K} 2^{(k+1)n+k} √ρ_k`.
    pub proof_sum: f64,
    pub hypothesis_partials: Vec<f64>,
    pub proof_partials: Vec<f64>,
}

/// Both density series (hypothesis and proof forms), with terms formed in log space.
pub fn density_series_bound(rho: &DecaySequence, n: usize, k: usize) -> Result<SeriesBound, ArithmeticError> {
    let (mut hs, mut ps) = (0.0, 0.0);
    let mut hp = Vec::with_capacity(k + 1);
    let mut pp = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let half = 0.5 * rho.ln_value(j)?;
        let base = ((j + 1) * n) as f64;
        hs += ((base + 1.0) * LN_2 + half).exp();
        ps += ((base + j as f64) * LN_2 + half).exp();
        hp.push(hs);
        pp.push(ps);
    }
    Ok(SeriesBound { hypothesis_sum: hs, proof_sum: ps, hypothesis_partials: hp, proof_partials: pp })
}
