//! Small-divisor arithmetic of frequency vectors: the sequence `σ(α)`,
//! arithmetic classes `D_a`, Bruno bookkeeping, lattice flows and the
//! Monte-Carlo density experiment.

mod decay;
mod density;
mod lattice;
mod sigma;
mod strips;

pub use decay::{bruno_diagnostic, density_series_bound, BrunoReport, DecaySequence, Descriptor, SeriesBound, Verdict};
pub use density::{density_estimate, in_class_point, sample_ball, DensityReport, DensitySpec, MapDescriptor};
pub use lattice::{flow_and_shortest, lattice_basis, lemma_eps_t, LatticeBasis, ShortestVector};
pub use sigma::{
    exp_index, in_class, in_class_exact, sigma, sigma_exact, visit_half_space, IndexNorm, SigmaOptions,
    SigmaSequence,
};
pub use strips::{strip_analysis, Strip};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArithmeticError {
    #[error("frequency vector must have at least one component")]
    DimensionZero,
    #[error("component {0} is not finite")]
    NonFinite(usize),
    #[error("enumeration of ~{estimate} index vectors exceeds the cap {cap}")]
    BudgetExceeded { estimate: u128, cap: u128 },
    #[error("term {index} of the sequence is not positive")]
    NonPositive { index: usize },
    #[error("sequence is not nonincreasing at index {index}")]
    NotMonotone { index: usize },
    #[error("sequence is defined up to {have}, index {need} requested")]
    TooShort { have: usize, need: usize },
    #[error("integer overflow in exact enumeration")]
    Overflow,
    #[error("invalid map descriptor: {0}")]
    InvalidMap(String),
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("α is not in the class: σ_{k} = {sigma} < a_{k} = {a}")]
    NotInClass { k: usize, sigma: f64, a: f64 },
}

/// A real frequency vector `α ∈ ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    components: Vec<f64>,
}

impl FrequencyVector {
    pub fn new(components: Vec<f64>) -> Result<Self, ArithmeticError> {
        if components.is_empty() {
            return Err(ArithmeticError::DimensionZero);
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(ArithmeticError::NonFinite(i));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn dot(&self, i: &[i64]) -> f64 {
        self.components.iter().zip(i).map(|(a, &b)| a * b as f64).sum()
    }
}
