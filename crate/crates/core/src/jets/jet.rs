use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::shape::{MultiIndex, Shape};
use super::JetError;
use crate::scalar::Scalar;

/// Truncated multivariate power series.
///
/// Stores only nonzero coefficients of monomials whose weighted degree is at
/// most `trunc`. All ring operations are exact modulo degree `> trunc`.
#[derive(Clone, PartialEq)]
pub struct Jet<C> {
    shape: Shape,
    trunc: u32,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: Scalar> Jet<C> {
    pub fn zero(shape: Shape, trunc: u32) -> Self {
        Self { shape, trunc, terms: BTreeMap::new() }
    }

    pub fn constant(shape: Shape, trunc: u32, c: C) -> Self {
        let mut j = Self::zero(shape, trunc);
        j.add_term(shape.zero_index(), c);
        j
    }

    pub fn one(shape: Shape, trunc: u32) -> Self {
        Self::constant(shape, trunc, C::one())
    }

    pub fn var(shape: Shape, trunc: u32, var: usize) -> Self {
        let mut j = Self::zero(shape, trunc);
        j.add_term(shape.unit_index(var), C::one());
        j
    }

    pub fn monomial(shape: Shape, trunc: u32, exps: &[u8], c: C) -> Self {
        let mut j = Self::zero(shape, trunc);
        j.add_term(shape.index(exps), c);
        j
    }

    pub fn from_terms<I>(shape: Shape, trunc: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u8>, C)>,
    {
        let mut j = Self::zero(shape, trunc);
        for (e, c) in terms {
            j.add_term(shape.index(&e), c);
        }
        j
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> C {
        self.terms.get(idx).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff_of(&self, exps: &[u8]) -> C {
        self.coeff(&self.shape.index(exps))
    }

    /// Add `c` to the coefficient of `idx`, dropping the term if it cancels
    /// and ignoring monomials above the truncation degree.
    pub fn add_term(&mut self, idx: MultiIndex, c: C) {
        if idx.degree() > self.trunc || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&idx) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&idx);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
    }

    /// Same series viewed at another truncation degree.
    pub fn with_trunc(&self, trunc: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k.degree() <= trunc)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { shape: self.shape, trunc, terms }
    }

    /// Drop all terms of weighted degree above `deg`, keeping the truncation.
    pub fn truncate(&self, deg: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k.degree() <= deg)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { shape: self.shape, trunc: self.trunc, terms }
    }

    /// Order: smallest degree carrying a nonzero coefficient, or `trunc + 1`
    /// for the zero jet.
    pub fn ord(&self) -> u32 {
        self.terms.keys().next().map(|k| k.degree()).unwrap_or(self.trunc + 1)
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|k| k.degree())
    }

    pub fn homogeneous(&self, deg: u32) -> Self {
        self.filter(|k, _| k.degree() == deg)
    }

    pub fn filter<F: Fn(&MultiIndex, &C) -> bool>(&self, keep: F) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, v)| keep(k, v))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self { shape: self.shape, trunc: self.trunc, terms }
    }

    /// Apply `f` to every coefficient, dropping results that vanish.
    pub fn map_coeffs<D: Scalar, F: Fn(&MultiIndex, &C) -> D>(&self, f: F) -> Jet<D> {
        let mut out = Jet::zero(self.shape, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), f(k, v));
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.shape, self.trunc);
        }
        self.map_coeffs(|_, v| v.clone() * c.clone())
    }

    fn check(&self, other: &Self) -> Result<(), JetError> {
        if self.shape != other.shape {
            return Err(JetError::ShapeMismatch { left: self.shape, right: other.shape });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = self.with_trunc(self.trunc.min(other.trunc));
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let mut out = self.with_trunc(self.trunc.min(other.trunc));
        for (k, v) in &other.terms {
            out.add_term(k.clone(), -v.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(self.shape, trunc);
        for (ka, va) in &self.terms {
            if ka.degree() > trunc {
                break;
            }
            let room = trunc - ka.degree();
            for (kb, vb) in &other.terms {
                if kb.degree() > room {
                    break;
                }
                out.add_term(ka.mul(kb), va.clone() * vb.clone());
            }
        }
        Ok(out)
    }

    /// Coefficient-wise (Hadamard) product `Σ a_i b_i z^i`.
    pub fn checked_hadamard(&self, other: &Self) -> Result<Self, JetError> {
        self.check(other)?;
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(self.shape, trunc);
        let (small, large) =
            if self.len() <= other.len() { (self, other) } else { (other, self) };
        for (k, v) in &small.terms {
            if let Some(w) = large.terms.get(k) {
                out.add_term(k.clone(), v.clone() * w.clone());
            }
        }
        Ok(out)
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        self.checked_hadamard(other).expect("hadamard: shape mismatch")
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.shape, self.trunc);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let w = self.shape.weight(var);
        let mut out = Self::zero(self.shape, self.trunc);
        for (k, v) in &self.terms {
            let e = k.get(var);
            if let Some(lower) = k.lower(var, w) {
                out.add_term(lower, v.clone() * C::from_i64(e as i64));
            }
        }
        out
    }

    /// Multiply by a single variable.
    pub fn mul_var(&self, var: usize) -> Self {
        let w = self.shape.weight(var);
        let mut out = Self::zero(self.shape, self.trunc);
        for (k, v) in &self.terms {
            out.add_term(k.raise(var, w), v.clone());
        }
        out
    }

    /// Substitute `subs[v]` for variable `v` (`f(g_1, …, g_k)`).
    ///
    /// Every substituted jet must have order at least the weight of the
    /// variable it replaces, so that truncation stays consistent.
    pub fn compose(&self, subs: &[Jet<C>]) -> Result<Jet<C>, JetError> {
        if subs.len() != self.shape.num_vars() {
            return Err(JetError::Arity { expected: self.shape.num_vars(), got: subs.len() });
        }
        let target = subs.first().map(|g| (g.shape, g.trunc));
        let (shape, trunc) = match target {
            Some(t) => t,
            None => return Ok(Jet::constant(self.shape, self.trunc, self.coeff(&self.shape.zero_index()))),
        };
        for (v, g) in subs.iter().enumerate() {
            if g.shape != shape {
                return Err(JetError::ShapeMismatch { left: shape, right: g.shape });
            }
            let need = self.shape.weight(v);
            if !g.is_zero() && g.ord() < need {
                return Err(JetError::OrderViolation { var: v, ord: g.ord(), required: need });
            }
        }
        let trunc = subs.iter().map(|g| g.trunc).min().unwrap_or(trunc);
        // cache of powers per variable
        let mut powers: Vec<Vec<Jet<C>>> = subs.iter().map(|g| vec![Jet::one(shape, trunc), g.with_trunc(trunc)]).collect();
        let mut out = Jet::zero(shape, trunc);
        for (k, c) in &self.terms {
            let mut term = Jet::constant(shape, trunc, c.clone());
            for (v, &e) in k.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[v].len() <= e as usize {
                    let next = powers[v].last().unwrap() * &powers[v][1];
                    powers[v].push(next);
                }
                term = &term * &powers[v][e as usize];
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Re-embed into a larger shape, placing variable `v` at `map[v]`.
    pub fn embed(&self, target: Shape, map: &[usize]) -> Jet<C> {
        let mut out = Jet::zero(target, self.trunc);
        for (k, c) in &self.terms {
            let mut e = vec![0u8; target.num_vars()];
            for (v, &x) in k.exps().iter().enumerate() {
                e[map[v]] += x;
            }
            out.add_term(target.index(&e), c.clone());
        }
        out
    }

    /// Value at a point, one coordinate per variable.
    pub fn eval(&self, x: &[C]) -> C {
        let mut acc = C::zero();
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in k.exps().iter().enumerate() {
                for _ in 0..e {
                    t = t * x[v].clone();
                }
            }
            acc = acc + t;
        }
        acc
    }

    /// Largest coefficient magnitude (0 for the zero jet).
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Render a monomial like `q1^2*p1`.
    pub fn monomial_name(&self, idx: &MultiIndex) -> String {
        monomial_name(self.shape, idx)
    }
}

pub fn monomial_name(shape: Shape, idx: &MultiIndex) -> String {
    let parts: Vec<String> = idx
        .exps()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(v, &e)| if e == 1 { shape.var_name(v) } else { format!("{}^{}", shape.var_name(v), e) })
        .collect();
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl<C: Scalar> fmt::Debug for Jet<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[N={}](", self.trunc)?;
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({v})*{}", self.monomial_name(k))?;
        }
        write!(f, ")")
    }
}

impl<'a, C: Scalar> Add<&'a Jet<C>> for &'a Jet<C> {
    type Output = Jet<C>;
    fn add(self, o: &'a Jet<C>) -> Jet<C> {
        self.checked_add(o).expect("jet add: shape mismatch")
    }
}

impl<'a, C: Scalar> Sub<&'a Jet<C>> for &'a Jet<C> {
    type Output = Jet<C>;
    fn sub(self, o: &'a Jet<C>) -> Jet<C> {
        self.checked_sub(o).expect("jet sub: shape mismatch")
    }
}

impl<'a, C: Scalar> Mul<&'a Jet<C>> for &'a Jet<C> {
    type Output = Jet<C>;
    fn mul(self, o: &'a Jet<C>) -> Jet<C> {
        self.checked_mul(o).expect("jet mul: shape mismatch")
    }
}

impl<C: Scalar> Neg for &Jet<C> {
    type Output = Jet<C>;
    fn neg(self) -> Jet<C> {
        self.map_coeffs(|_, v| -v.clone())
    }
}
