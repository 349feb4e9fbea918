use super::ideal::{chop, ActionIdeal};
use super::KamError;
use crate::jets::Jet;
use crate::poisson::{ad_eigenvalue, bracket, HamiltonianDerivation};
use crate::scalar::Scalar;

/// Hadamard product with `g = Σ (α, i−j)^{−1} q^i p^j` over weighted degree
/// `≤ cutoff`; terms above the cutoff are dropped.
///
/// Returns the quotient and the smallest divisor magnitude used.
pub fn hadamard_divide<C: Scalar>(
    alpha: &[C],
    f: &Jet<C>,
    cutoff: u32,
    divisor_floor: f64,
) -> Result<(Jet<C>, f64), KamError> {
    let n = f.shape().pairs;
    let mut out = Jet::zero(f.shape(), f.trunc());
    let mut min_div = f64::INFINITY;
    for (idx, c) in f.iter() {
        if idx.degree() > cutoff {
            continue;
        }
        let (i, j) = idx.qp(n);
        let lam = ad_eigenvalue(alpha, i, j);
        if lam.is_zero() {
            return Err(KamError::Resonance { monomial: f.monomial_name(idx) });
        }
        let m = lam.magnitude();
        if !C::EXACT && m <= divisor_floor {
            return Err(KamError::SmallDivisor { monomial: f.monomial_name(idx), value: m, floor: divisor_floor });
        }
        min_div = min_div.min(m);
        out.add_term(idx.clone(), c.clone() / lam);
    }
    Ok((out, min_div))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiInverse<C: Scalar> {
    pub u: HamiltonianDerivation<C>,
    pub min_divisor: f64,
}

/// The quasi-inverse `j(α)` of `u ↦ u(a + α)` at UV cutoff `cutoff`.
///
/// With `(a, b)` the `O/J` and `J/J²` components of the target, the
/// generator is `a⋆g + b⋆g − {a⋆g, α}⋆g`; the resonant `J/J²` residue is
/// absorbed by `Σ a_i ∂_{μ_i}` along the frequency directions of `ideal`.
/// `model` is the full current model, `alpha_acc` its accumulated
/// `F`-part.
pub fn hadamard_quasi_inverse<C: Scalar>(
    alpha: &[C],
    ideal: &ActionIdeal<C>,
    model: &Jet<C>,
    alpha_acc: &Jet<C>,
    target: &Jet<C>,
    cutoff: u32,
    divisor_floor: f64,
) -> Result<QuasiInverse<C>, KamError> {
    let sh = target.shape();
    let trunc = target.trunc();
    let d = ideal.dim();
    let scale = target.max_abs_coeff().max(model.max_abs_coeff());
    let tgt = chop(&target.truncate(cutoff), scale);
    if tgt.is_zero() {
        return Ok(QuasiInverse { u: HamiltonianDerivation::zero(sh, trunc), min_divisor: f64::INFINITY });
    }
    let dec = ideal.decompose(&tgt);
    let (g0, m0) = hadamard_divide(alpha, &chop(&dec.n0, scale), cutoff, divisor_floor)?;
    let (g1, m1) = hadamard_divide(alpha, &chop(&dec.n1, scale), cutoff, divisor_floor)?;
    let mut h = &g0 + &g1;
    let mut min_div = m0.min(m1);
    if !g0.is_zero() && !alpha_acc.is_zero() {
        let corr = bracket(&g0, alpha_acc)?;
        let cd = ideal.decompose(&corr);
        let (g2, m2) = hadamard_divide(alpha, &chop(&(&cd.n0 + &cd.n1), scale), cutoff, divisor_floor)?;
        h = &h - &g2;
        min_div = min_div.min(m2);
    }
    let mut u = HamiltonianDerivation::new(h);
    if d > 0 {
        let r = &tgt - &u.apply(model)?;
        let pr = ideal.decompose(&r.truncate(cutoff));
        let c: Vec<Jet<C>> = pr.p.iter().map(|j| chop(j, scale)).collect();
        let a = ideal.frequency_coords(&c, scale)?;
        u = HamiltonianDerivation::with_mu(u.generator, a);
    } else if let Some(pk) = dec.p.iter().map(|j| chop(j, scale)).find(|j| !j.is_zero()) {
        let (idx, _) = pk.iter().next().unwrap();
        return Err(KamError::OutsideFrequencySpace { pair: 0, monomial: pk.monomial_name(idx) });
    }
    Ok(QuasiInverse { u, min_divisor: min_div })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Shape;
    use crate::poisson::quadratic_model;
    use crate::scalar::QSqrt5;

    type Q = QSqrt5;

    #[test]
    fn single_cubic_and_resonant_targets() {
        let sh = Shape::symplectic(1);
        let alpha = [Q::integer(1)];
        let model = quadratic_model(sh, 8, &alpha);
        let ideal = ActionIdeal::fiber(sh).unwrap();
        let zero = Jet::zero(sh, 8);
        let q3 = Jet::from_terms(sh, 8, vec![(vec![3, 0], Q::integer(1))]);
        let qi = hadamard_quasi_inverse(&alpha, &ideal, &model, &zero, &q3, 8, 0.0).unwrap();
        // {q³/3, pq} = q³ under {q,p} = 1
        assert_eq!(qi.u.generator, q3.scale(&Q::from_ratio(1, 3)));
        assert_eq!(bracket(&qi.u.generator, &model).unwrap(), q3);
        let pq2 = Jet::from_terms(sh, 8, vec![(vec![2, 2], Q::integer(1))]);
        assert!(hadamard_quasi_inverse(&alpha, &ideal, &model, &zero, &pq2, 8, 0.0).unwrap().u.is_zero());
        assert!(hadamard_quasi_inverse(&alpha, &ideal, &model, &zero, &zero, 8, 0.0).unwrap().u.is_zero());
    }

    #[test]
    fn correction_term_cancels_accumulated_part() {
        // model pq + (pq)², target q³: the I-component of {q³⋆g, (pq)²} is removed
        let sh = Shape::symplectic(1);
        let alpha = [Q::integer(1)];
        let acc = Jet::from_terms(sh, 10, vec![(vec![2, 2], Q::integer(1))]);
        let model = &quadratic_model(sh, 10, &alpha) + &acc;
        let ideal = ActionIdeal::fiber(sh).unwrap();
        let q3 = Jet::from_terms(sh, 10, vec![(vec![3, 0], Q::integer(1))]);
        let qi = hadamard_quasi_inverse(&alpha, &ideal, &model, &acc, &q3, 10, 0.0).unwrap();
        let back = &qi.u.apply(&model).unwrap() - &q3;
        assert!(ideal.certify(&back, 10, 1.0).is_ok(), "{back:?}");
    }

    #[test]
    fn resonance_and_floor() {
        let sh = Shape::symplectic(2);
        let alpha = [Q::integer(1), Q::integer(1)];
        let f = Jet::from_terms(sh, 6, vec![(vec![1, 0, 0, 1], Q::integer(1))]);
        assert!(matches!(hadamard_divide(&alpha, &f, 6, 0.0), Err(KamError::Resonance { .. })));
        let fl = Jet::from_terms(sh, 6, vec![(vec![1, 0, 0, 1], 1.0)]);
        let r = hadamard_divide(&[1.0, 1.0 + 1e-14], &fl, 6, 1e-12);
        assert!(matches!(r, Err(KamError::SmallDivisor { .. })));
    }
}
