//! The Newton-type normal-form iteration with Hadamard quasi-inverses:
//! fiber normalization modulo `I²`, the counterterm scenario with frequency
//! parameters, and the remainder estimates for `e^{−u}`.

use thiserror::Error;

use crate::jets::JetError;
use crate::poisson::PoissonError;

mod extended;
mod fiber;
mod ideal;
mod iterate;
mod quasi;
mod reste;

pub use extended::{counterterm_model, extended_scenario, extended_scenario_staged, frequency_deviation, ExtendedReport};
pub use fiber::{fiber_normalize, split_morse, FiberResult};
pub use ideal::{in_action_square, ActionIdeal, Decomposition, IdealCertificate};
pub use iterate::{kam_iterate, verify_conjugacy, KamProblem, KamRun, KamState, NormLedger, Schedule, StageSummary};
pub use quasi::{hadamard_divide, hadamard_quasi_inverse, QuasiInverse};
pub use reste::{fit_n1, reste_inequalities_check, reste_with_constant, Inequality, ResteReport, RESTE_GRID};

#[allow(unused_imports)]
pub(crate) use fiber::diagnostic_frequencies;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KamError {
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("exact resonance at {monomial}")]
    Resonance { monomial: String },
    #[error("small divisor {value:e} at {monomial} (floor {floor:e})")]
    SmallDivisor { monomial: String, value: f64, floor: f64 },
    #[error("order did not increase at stage {stage}: {before} -> {after}")]
    OrderNotIncreasing { stage: usize, before: u32, after: u32 },
    #[error("resonant component {monomial} of pair {pair} is outside the frequency space")]
    OutsideFrequencySpace { pair: usize, monomial: String },
    #[error("{monomial} (degree {degree}) is not in the ideal")]
    NotInIdeal { monomial: String, degree: u32 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid frequency basis: {0}")]
    InvalidBasis(String),
    #[error("iteration did not terminate within {stages} stages")]
    NotConverged { stages: usize },
}
