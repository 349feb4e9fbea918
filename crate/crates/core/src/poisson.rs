//! Poisson brackets, Hamiltonian derivations and Lie-series exponentials.
//!
//! Sign convention: `{q_i, p_j} = δ_ij`, that is
//! `{f, g} = Σ_i ∂_{q_i} f ∂_{p_i} g − ∂_{p_i} f ∂_{q_i} g`.
//! Parameter blocks (`λ`, `μ`) and free variables are Casimirs.

use num_complex::Complex64;
use thiserror::Error;

use crate::jets::{Jet, JetError, Shape};
use crate::linalg;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoissonError {
    #[error(transparent)]
    Layout(#[from] JetError),
    #[error("jet has no canonical pairs")]
    NoPairs,
    #[error("generator order {ord} too low: need at least 3 for a terminating series")]
    OrderTooLow { ord: u32 },
    #[error("∂_μ coefficient {index} is not admissible: {reason}")]
    MuCoefficient { index: usize, reason: &'static str },
    #[error("Lie series did not terminate after {0} terms")]
    NotTerminated(usize),
    #[error("linear part of the transform is not invertible (rank {rank} < {dim})")]
    NonInvertibleLinearPart { rank: usize, dim: usize },
}

/// `{f, g}` truncated at the smaller truncation degree.
pub fn bracket<C: Scalar>(f: &Jet<C>, g: &Jet<C>) -> Result<Jet<C>, PoissonError> {
    let sh = f.shape();
    if sh != g.shape() {
        return Err(JetError::ShapeMismatch { left: sh, right: g.shape() }.into());
    }
    if sh.pairs == 0 {
        return Err(PoissonError::NoPairs);
    }
    let n = sh.pairs;
    let trunc = f.trunc().min(g.trunc());
    let mut out = Jet::zero(sh, trunc);
    for (ka, ca) in f.iter() {
        for (kb, cb) in g.iter() {
            if ka.degree() + kb.degree() > trunc + 2 {
                continue;
            }
            let prod = ka.mul(kb);
            let c = ca.clone() * cb.clone();
            for i in 0..n {
                let (qa, pa) = (ka.get(sh.q(i)) as i64, ka.get(sh.p(i)) as i64);
                let (qb, pb) = (kb.get(sh.q(i)) as i64, kb.get(sh.p(i)) as i64);
                let w = qa * pb - pa * qb;
                if w == 0 {
                    continue;
                }
                let idx = prod.lower(sh.q(i), 1).and_then(|x| x.lower(sh.p(i), 1)).expect("bracket exponent");
                out.add_term(idx, c.clone() * C::from_i64(w));
            }
        }
    }
    Ok(out)
}

/// The `H₂ = Σ α_k p_k q_k` eigenvalue of `m ↦ {m, H₂}` on `q^i p^j`,
/// which is `(α, i − j)`.
pub fn ad_eigenvalue<C: Scalar>(alpha: &[C], i: &[u8], j: &[u8]) -> C {
    let mut c = C::zero();
    for ((a, &x), &y) in alpha.iter().zip(i).zip(j) {
        let d = x as i64 - y as i64;
        if d != 0 {
            c = c + a.clone() * C::from_i64(d);
        }
    }
    c
}

/// `H₂ = Σ α_k p_k q_k`.
pub fn quadratic_model<C: Scalar>(shape: Shape, trunc: u32, alpha: &[C]) -> Jet<C> {
    let mut h = Jet::zero(shape, trunc);
    for (k, a) in alpha.iter().enumerate() {
        let mut idx = shape.unit_index(shape.q(k));
        idx = idx.raise(shape.p(k), 1);
        h.add_term(idx, a.clone());
    }
    h
}

/// The derivation `f ↦ {h, f} + Σ a_i ∂_{μ_i} f`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianDerivation<C: Scalar> {
    pub generator: Jet<C>,
    pub mu_coeffs: Vec<Jet<C>>,
}

impl<C: Scalar> HamiltonianDerivation<C> {
    pub fn new(generator: Jet<C>) -> Self {
        Self { generator, mu_coeffs: Vec::new() }
    }

    pub fn with_mu(generator: Jet<C>, mu_coeffs: Vec<Jet<C>>) -> Self {
        Self { generator, mu_coeffs }
    }

    pub fn zero(shape: Shape, trunc: u32) -> Self {
        Self::new(Jet::zero(shape, trunc))
    }

    pub fn is_zero(&self) -> bool {
        self.generator.is_zero() && self.mu_coeffs.iter().all(|a| a.is_zero())
    }

    pub fn neg(&self) -> Self {
        Self { generator: -&self.generator, mu_coeffs: self.mu_coeffs.iter().map(|a| -a).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.mu_coeffs.len().max(other.mu_coeffs.len());
        let sh = self.generator.shape();
        let tr = self.generator.trunc();
        let mu = (0..d)
            .map(|i| {
                let a = self.mu_coeffs.get(i).cloned().unwrap_or_else(|| Jet::zero(sh, tr));
                let b = other.mu_coeffs.get(i).cloned().unwrap_or_else(|| Jet::zero(sh, tr));
                &a + &b
            })
            .collect();
        Self { generator: &self.generator + &other.generator, mu_coeffs: mu }
    }

    pub fn scale(&self, c: &C) -> Self {
        Self {
            generator: self.generator.scale(c),
            mu_coeffs: self.mu_coeffs.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Check that `e^u` is a finite sum on jets: every term of the
    /// generator has weighted order ≥ 3, and each `a_i ∂_{μ_i}` either
    /// raises the weighted degree or, for μ-free terms, is nilpotent.
    pub fn check_admissible(&self) -> Result<(), PoissonError> {
        if !self.generator.is_zero() && self.generator.ord() < 3 {
            return Err(PoissonError::OrderTooLow { ord: self.generator.ord() });
        }
        let sh = self.generator.shape();
        if self.mu_coeffs.len() > sh.mu {
            return Err(PoissonError::MuCoefficient { index: sh.mu, reason: "more coefficients than μ variables" });
        }
        for (i, a) in self.mu_coeffs.iter().enumerate() {
            for (k, _) in a.iter() {
                let has_mu = (0..sh.mu).any(|j| k.get(sh.mu_var(j)) > 0);
                let need = if has_mu { 3 } else { 2 };
                if k.degree() < need {
                    return Err(PoissonError::MuCoefficient { index: i, reason: "order too low" });
                }
            }
        }
        Ok(())
    }

    /// `u(f)`.
    pub fn apply(&self, f: &Jet<C>) -> Result<Jet<C>, PoissonError> {
        let mut out = if self.generator.is_zero() {
            Jet::zero(f.shape(), f.trunc().min(self.generator.trunc()))
        } else {
            bracket(&self.generator, f)?
        };
        let sh = f.shape();
        for (i, a) in self.mu_coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let d = f.derivative(sh.mu_var(i));
            if !d.is_zero() {
                out = out.checked_add(&a.checked_mul(&d)?)?;
            }
        }
        Ok(out)
    }
}

/// `e^u f = Σ u^k f / k!`, exact on jets for admissible `u`.
pub fn lie_exp<C: Scalar>(u: &HamiltonianDerivation<C>, f: &Jet<C>) -> Result<Jet<C>, PoissonError> {
    u.check_admissible()?;
    if u.is_zero() {
        return Ok(f.clone());
    }
    let cap = 4 * f.trunc() as usize + 16;
    let mut sum = f.clone();
    let mut term = f.clone();
    for k in 1..=cap {
        term = u.apply(&term)?.scale(&(C::one() / C::from_i64(k as i64)));
        if term.is_zero() {
            return Ok(sum);
        }
        sum = sum.checked_add(&term)?;
    }
    Err(PoissonError::NotTerminated(cap))
}

/// `e^{u_last} ⋯ e^{u_0} f`: the first derivation in the list acts first.
pub fn exp_product<C: Scalar>(us: &[HamiltonianDerivation<C>], f: &Jet<C>) -> Result<Jet<C>, PoissonError> {
    let mut g = f.clone();
    for u in us {
        g = lie_exp(u, &g)?;
    }
    Ok(g)
}

/// The list whose product inverts `exp_product(us, ·)`.
pub fn inverse_list<C: Scalar>(us: &[HamiltonianDerivation<C>]) -> Vec<HamiltonianDerivation<C>> {
    us.iter().rev().map(|u| u.neg()).collect()
}

/// Images of every coordinate under the product of exponentials. Applying
/// the product to any jet `f` equals `f.compose(&images)`.
pub fn coordinate_images<C: Scalar>(
    us: &[HamiltonianDerivation<C>],
    shape: Shape,
    trunc: u32,
) -> Result<Vec<Jet<C>>, PoissonError> {
    (0..shape.num_vars()).map(|v| exp_product(us, &Jet::var(shape, trunc, v))).collect()
}

/// Largest coefficient of `{Q_i,P_j} − δ_ij`, `{Q_i,Q_j}`, `{P_i,P_j}`.
///
/// `images` lists `Q_1..Q_n, P_1..P_n`. Brackets lose one degree of
/// accuracy against linear terms, so degrees up to `N − 1` are compared.
pub fn check_symplectic<C: Scalar>(images: &[Jet<C>]) -> Result<f64, PoissonError> {
    let Some(first) = images.first() else { return Ok(0.0) };
    let sh = first.shape();
    let n = sh.pairs;
    if n == 0 || images.len() != 2 * n {
        return Err(PoissonError::NoPairs);
    }
    let rows: Vec<Vec<Complex64>> = images
        .iter()
        .map(|g| {
            (0..2 * n)
                .map(|v| g.coeff(&sh.unit_index(v)).to_c64())
                .collect()
        })
        .collect();
    let rank = linalg::rank(&rows);
    if rank < 2 * n {
        return Err(PoissonError::NonInvertibleLinearPart { rank, dim: 2 * n });
    }
    let trunc = images.iter().map(|g| g.trunc()).min().unwrap_or(0);
    let keep = trunc.saturating_sub(1);
    let mut worst = 0.0f64;
    for a in 0..2 * n {
        for b in (a + 1)..2 * n {
            let mut br = bracket(&images[a], &images[b])?.truncate(keep);
            if a < n && b == a + n {
                br = &br - &Jet::one(sh, br.trunc());
            }
            worst = worst.max(br.max_abs_coeff());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
