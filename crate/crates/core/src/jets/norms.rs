use std::f64::consts::PI;

use thiserror::Error;

use super::jet::Jet;
use super::shape::MultiIndex;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("polydisc radius must be positive, got {0}")]
pub struct NormError(pub f64);

/// `‖z^i‖²` in `L²` of the polydisc of radius `s`: `Π_j π s^{2(i_j+1)}/(i_j+1)`.
pub fn l2_weight(idx: &MultiIndex, s: f64) -> f64 {
    idx.exps()
        .iter()
        .map(|&e| {
            let k = e as f64 + 1.0;
            PI * s.powf(2.0 * k) / k
        })
        .product()
}

impl<C: Scalar> Jet<C> {
    /// `Σ |a_i| s^{|i|}`, an upper bound for the sup of the jet on the
    /// polydisc of radius `s` (plain total degree, not the weighted one).
    pub fn sup_norm_bound(&self, s: f64) -> Result<f64, NormError> {
        if !(s > 0.0) {
            return Err(NormError(s));
        }
        Ok(self.l1_norm(s))
    }

    /// Unchecked variant of [`Jet::sup_norm_bound`].
    pub fn l1_norm(&self, s: f64) -> f64 {
        self.iter()
            .map(|(k, c)| c.magnitude() * s.powi(k.total_degree() as i32))
            .sum()
    }

    /// `L²` norm on the polydisc of radius `s`; monomials are orthogonal.
    pub fn l2_norm(&self, s: f64) -> Result<f64, NormError> {
        if !(s > 0.0) {
            return Err(NormError(s));
        }
        let sq: f64 = self
            .iter()
            .map(|(k, c)| c.magnitude().powi(2) * l2_weight(k, s))
            .sum();
        Ok(sq.sqrt())
    }
}
