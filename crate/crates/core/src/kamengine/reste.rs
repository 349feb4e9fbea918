use serde::{Deserialize, Serialize};

use super::KamError;
use crate::jets::Jet;
use crate::poisson::{lie_exp, HamiltonianDerivation};
use crate::scalar::Scalar;
use crate::scalednorms::fit_bounded_constant;

/// Grid size used when fitting `N̂¹_τ(u)`.
pub const RESTE_GRID: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, margin: rhs - lhs, holds: lhs <= rhs * (1.0 + 1e-12) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResteReport {
    pub s: f64,
    pub tau: f64,
    pub n_hat: f64,
    /// `3N̂/(τ−s)`; the estimates are stated for values `≤ 1/2`.
    pub guard: f64,
    pub guard_ok: bool,
    pub items: [Inequality; 5],
}

impl ResteReport {
    pub fn all_hold(&self) -> bool {
        self.items.iter().all(|i| i.holds)
    }
}

/// Fit `N̂¹_τ(u)` with the ℓ¹-majorant norm on monomials up to the jet
/// truncation.
pub fn fit_n1<C: Scalar>(u: &HamiltonianDerivation<C>, tau: f64, trunc: u32) -> Result<f64, KamError> {
    let shape = u.generator.shape();
    let fit = fit_bounded_constant(
        |f: &Jet<C>| u.apply(f).unwrap_or_else(|_| Jet::zero(shape, trunc)),
        shape,
        trunc,
        1,
        tau,
        trunc,
        RESTE_GRID,
    )
    .map_err(|e| KamError::InvalidModel(e.to_string()))?;
    Ok(fit.n_hat)
}

/// Evaluate both sides of
///
/// ```text
/// 1) |(e^{−u}(Id+u) − Id)x|_s ≤ 36 |x|_τ N² / (τ−s)²
/// 2) |(e^{−u}(Id+u) − Id)x|_s ≤ 2 |u(x)|_τ N / (τ−s)
/// 3) |(e^{−u} − Id)x|_s       ≤ 6 |x|_τ N / (τ−s)
/// 4) |(e^{−u} − Id)x|_s       ≤ 2 |u(x)|_τ
/// 5) |e^u x|_s                ≤ 2 |x|_τ
/// ```
///
/// with `N = N̂¹_τ(u)` fitted on a grid. Diagnostic only.
pub fn reste_inequalities_check<C: Scalar>(
    u: &HamiltonianDerivation<C>,
    x: &Jet<C>,
    s: f64,
    tau: f64,
) -> Result<ResteReport, KamError> {
    let n_hat = fit_n1(u, tau, x.trunc())?;
    reste_with_constant(u, x, s, tau, n_hat)
}

/// As [`reste_inequalities_check`] with a given `N̂`.
pub fn reste_with_constant<C: Scalar>(
    u: &HamiltonianDerivation<C>,
    x: &Jet<C>,
    s: f64,
    tau: f64,
    n_hat: f64,
) -> Result<ResteReport, KamError> {
    if !(0.0 < s && s < tau) {
        return Err(KamError::InvalidModel(format!("need 0 < s < τ, got s = {s}, τ = {tau}")));
    }
    let w = tau - s;
    let ux = u.apply(x)?;
    let x_t = x.l1_norm(tau);
    let ux_t = ux.l1_norm(tau);
    let shifted = lie_exp(&u.neg(), &(x + &ux))?;
    let l12 = (&shifted - x).l1_norm(s);
    let l34 = (&lie_exp(&u.neg(), x)? - x).l1_norm(s);
    let l5 = lie_exp(u, x)?.l1_norm(s);
    let guard = 3.0 * n_hat / w;
    Ok(ResteReport {
        s,
        tau,
        n_hat,
        guard,
        guard_ok: guard <= 0.5,
        items: [
            Inequality::new(l12, 36.0 * x_t * n_hat * n_hat / (w * w)),
            Inequality::new(l12, 2.0 * ux_t * n_hat / w),
            Inequality::new(l34, 6.0 * x_t * n_hat / w),
            Inequality::new(l34, 2.0 * ux_t),
            Inequality::new(l5, 2.0 * x_t),
        ],
    })
}
