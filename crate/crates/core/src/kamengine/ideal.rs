use serde::{Deserialize, Serialize};

use super::KamError;
use crate::jets::{Jet, MultiIndex, Shape};
use crate::linalg;
use crate::scalar::Scalar;

/// Drop coefficients that are roundoff relative to `scale`. Exact jets are
/// returned unchanged.
pub(crate) fn chop<C: Scalar>(j: &Jet<C>, scale: f64) -> Jet<C> {
    if C::EXACT {
        return j.clone();
    }
    let tol = 1e-11 * scale.max(1.0);
    j.filter(|_, c| c.magnitude() > tol)
}

/// The ideal `J = ⟨p_k q_k − x_k(λ)⟩`, `x(λ) = Σ_i λ_i e_i`, together with
/// the split of jets modulo `F = J² + (functions of λ, μ)`.
///
/// Without parameter blocks `x ≡ 0` and `J` is the action ideal
/// `I = ⟨p_1q_1, …, p_nq_n⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionIdeal<C: Scalar> {
    shape: Shape,
    basis: Vec<Vec<C>>,
    pivots: Vec<usize>,
}

/// Pieces of a jet relative to [`ActionIdeal`]. `n0 + n1 + p_jet + f`
/// equals the input exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<C: Scalar> {
    /// Non-resonant, `J`-degree 0 (the `O/I` component).
    pub n0: Jet<C>,
    /// Non-resonant, `J`-degree 1 (the `I/I²` component).
    pub n1: Jet<C>,
    /// Resonant `J`-degree 1 part `Σ_k c_k(λ,μ) Y_k`: the coefficients.
    pub p: Vec<Jet<C>>,
    /// The same part written out, `Y_k = p_k q_k − x_k(λ)`.
    pub p_jet: Jet<C>,
    pub f: Jet<C>,
}

impl<C: Scalar> Decomposition<C> {
    pub fn non_f(&self) -> Jet<C> {
        &(&self.n0 + &self.n1) + &self.p_jet
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealCertificate {
    pub terms_checked: usize,
    pub through_degree: u32,
    /// Smallest `Σ min(q_i, p_i)` over the inspected monomials.
    pub min_action_power: Option<u32>,
}

impl<C: Scalar> ActionIdeal<C> {
    /// `I` on a shape without parameter blocks.
    pub fn fiber(shape: Shape) -> Result<Self, KamError> {
        if shape.lambda != 0 || shape.mu != 0 {
            return Err(KamError::InvalidBasis("fiber ideal takes no parameter blocks".into()));
        }
        Ok(Self { shape, basis: Vec::new(), pivots: Vec::new() })
    }

    /// `J` for the frequency directions `basis` (rows of length `n`).
    /// The basis is stored in reduced echelon form, which also fixes the
    /// meaning of `λ` and `μ`.
    pub fn extended(shape: Shape, basis: &[Vec<C>]) -> Result<Self, KamError> {
        let d = basis.len();
        if shape.lambda != d || shape.mu != d {
            return Err(KamError::InvalidBasis(format!(
                "shape has {} λ and {} μ variables for {d} directions",
                shape.lambda, shape.mu
            )));
        }
        if basis.iter().any(|e| e.len() != shape.pairs) {
            return Err(KamError::InvalidBasis("direction length differs from the number of pairs".into()));
        }
        let (rows, pivots) = linalg::rref(basis);
        if pivots.len() != d {
            return Err(KamError::InvalidBasis(format!("rank {} < {d}", pivots.len())));
        }
        Ok(Self { shape, basis: rows.into_iter().take(d).collect(), pivots })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn basis(&self) -> &[Vec<C>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `x_k(λ) = Σ_i λ_i e_{ik}` for every pair `k`.
    pub fn x(&self, trunc: u32) -> Vec<Jet<C>> {
        let sh = self.shape;
        (0..sh.pairs)
            .map(|k| {
                let mut j = Jet::zero(sh, trunc);
                for (i, e) in self.basis.iter().enumerate() {
                    j.add_term(sh.unit_index(sh.lambda_var(i)), e[k].clone());
                }
                j
            })
            .collect()
    }

    /// `Y_k = p_k q_k − x_k(λ)`.
    pub fn generators(&self, trunc: u32) -> Vec<Jet<C>> {
        let sh = self.shape;
        self.x(trunc)
            .into_iter()
            .enumerate()
            .map(|(k, xk)| {
                let pq = Jet::var(sh, trunc, sh.q(k)).mul_var(sh.p(k));
                &pq - &xk
            })
            .collect()
    }

    pub fn decompose(&self, b: &Jet<C>) -> Decomposition<C> {
        let sh = self.shape;
        let n = sh.pairs;
        let trunc = b.trunc();
        let x = self.x(trunc);
        let y = self.generators(trunc);
        let mut pow_cache: Vec<Vec<Jet<C>>> = x.iter().map(|xk| vec![Jet::one(sh, trunc), xk.clone()]).collect();
        let mut xpow = |k: usize, e: usize| -> Jet<C> {
            while pow_cache[k].len() <= e {
                let next = pow_cache[k].last().unwrap() * &pow_cache[k][1];
                pow_cache[k].push(next);
            }
            pow_cache[k][e].clone()
        };
        let mut n0 = Jet::zero(sh, trunc);
        let mut n1 = Jet::zero(sh, trunc);
        let mut p = vec![Jet::zero(sh, trunc); n];
        for (idx, c) in b.iter() {
            let mut base = idx.exps().to_vec();
            let mut m = vec![0usize; n];
            for k in 0..n {
                let mk = base[sh.q(k)].min(base[sh.p(k)]);
                m[k] = mk as usize;
                base[sh.q(k)] -= mk;
                base[sh.p(k)] -= mk;
            }
            let resonant = (0..n).all(|k| base[sh.q(k)] == 0 && base[sh.p(k)] == 0);
            let total: usize = m.iter().sum();
            if self.basis.is_empty() {
                // x ≡ 0: only J-degree 0 and 1 survive, as plain monomials
                match (total, resonant) {
                    (0, false) => n0.add_term(idx.clone(), c.clone()),
                    (1, false) => n1.add_term(idx.clone(), c.clone()),
                    (1, true) => {
                        let k = m.iter().position(|&v| v == 1).unwrap();
                        p[k].add_term(sh.index(&base), c.clone());
                    }
                    _ => {}
                }
                continue;
            }
            let base_jet = Jet::monomial(sh, trunc, &base, c.clone());
            if !resonant {
                let mut t0 = base_jet.clone();
                for (k, &mk) in m.iter().enumerate() {
                    if mk > 0 {
                        t0 = &t0 * &xpow(k, mk);
                    }
                }
                n0 = &n0 + &t0;
            }
            for k in 0..n {
                if m[k] == 0 {
                    continue;
                }
                let mut w = base_jet.scale(&C::from_i64(m[k] as i64));
                for (l, &ml) in m.iter().enumerate() {
                    let e = if l == k { ml - 1 } else { ml };
                    if e > 0 {
                        w = &w * &xpow(l, e);
                    }
                }
                if resonant {
                    p[k] = &p[k] + &w;
                } else {
                    n1 = &n1 + &(&w * &y[k]);
                }
            }
        }
        let mut p_jet = Jet::zero(sh, trunc);
        for (k, pk) in p.iter().enumerate() {
            if !pk.is_zero() {
                p_jet = &p_jet + &(pk * &y[k]);
            }
        }
        let f = &(&(b - &n0) - &n1) - &p_jet;
        Decomposition { n0, n1, p, p_jet, f }
    }

    /// The `F`-component of `b`.
    pub fn project_f(&self, b: &Jet<C>) -> Jet<C> {
        self.decompose(b).f
    }

    /// Coordinates `a` with `Σ_i a_i e_i = c`, monomial by monomial in the
    /// parameters. Fails if `c` leaves the span.
    pub fn frequency_coords(&self, c: &[Jet<C>], scale: f64) -> Result<Vec<Jet<C>>, KamError> {
        let sh = self.shape;
        let trunc = c.first().map(|j| j.trunc()).unwrap_or(0);
        let a: Vec<Jet<C>> = self.pivots.iter().map(|&k| c[k].clone()).collect();
        for (k, ck) in c.iter().enumerate() {
            let mut back = Jet::zero(sh, trunc);
            for (i, ai) in a.iter().enumerate() {
                back = &back + &ai.scale(&self.basis[i][k]);
            }
            let diff = ck - &back;
            let diff = chop(&diff, scale);
            let first = diff.iter().next().map(|(idx, _)| diff.monomial_name(idx));
            if let Some(monomial) = first {
                return Err(KamError::OutsideFrequencySpace { pair: k, monomial });
            }
        }
        Ok(a)
    }

    /// Membership of `b` in `F`, through weighted degree `through`.
    ///
    /// Without parameters this is pure exponent inspection: every monomial
    /// must carry `Σ min(q_i, p_i) ≥ 2`.
    pub fn certify(&self, b: &Jet<C>, through: u32, scale: f64) -> Result<IdealCertificate, KamError> {
        let b = chop(&b.truncate(through), scale);
        let n = self.shape.pairs;
        if self.basis.is_empty() {
            let mut min_pow = None;
            for (idx, _) in b.iter() {
                let k = idx.action_power(n);
                if k < 2 {
                    return Err(KamError::NotInIdeal { monomial: b.monomial_name(idx), degree: idx.degree() });
                }
                min_pow = Some(min_pow.map_or(k, |m: u32| m.min(k)));
            }
            return Ok(IdealCertificate { terms_checked: b.len(), through_degree: through, min_action_power: min_pow });
        }
        let rest = chop(&self.decompose(&b).non_f(), scale);
        if let Some((idx, _)) = rest.iter().next() {
            return Err(KamError::NotInIdeal { monomial: rest.monomial_name(idx), degree: idx.degree() });
        }
        let min_pow = b.iter().map(|(k, _)| k.action_power(n)).min();
        Ok(IdealCertificate { terms_checked: b.len(), through_degree: through, min_action_power: min_pow })
    }
}

/// `Σ min(q_i, p_i) ≥ 2`: membership of a monomial in `I²`.
pub fn in_action_square(idx: &MultiIndex, pairs: usize) -> bool {
    idx.action_power(pairs) >= 2
}
