//! Truncated multivariate power series.

mod io;
mod jet;
mod norms;
mod shape;

pub use io::{parse_jet, write_jet, JetJson, TermJson};
pub use jet::{monomial_name, Jet};
pub use norms::{l2_weight, NormError};
pub use shape::{MultiIndex, Shape, VarKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Shape, right: Shape },
    #[error("expected {expected} substitutions, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("substitution for variable {var} has order {ord}, needs at least {required}")]
    OrderViolation { var: usize, ord: u32, required: u32 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
