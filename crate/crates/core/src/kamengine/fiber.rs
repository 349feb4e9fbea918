use super::ideal::{ActionIdeal, IdealCertificate};
use super::iterate::{kam_iterate, verify_conjugacy, KamProblem, KamRun, Schedule};
use super::KamError;
use crate::arithmetic::{bruno_diagnostic, sigma, BrunoReport, FrequencyVector, SigmaOptions};
use crate::jets::Jet;
use crate::poisson::{exp_product, quadratic_model, HamiltonianDerivation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct FiberResult<C: Scalar> {
    pub alpha: Vec<C>,
    /// Generators whose product conjugates `H + R` into `H₂ + I²`.
    pub transform: Vec<HamiltonianDerivation<C>>,
    pub transformed: Jet<C>,
    pub certificate: IdealCertificate,
    pub run: KamRun<C>,
    /// Small-divisor diagnostic for `α`; never a gate.
    pub bruno: Option<BrunoReport>,
}

/// `α` and `R` from `H = Σ α_i p_i q_i + R`, `ord R ≥ 3`.
pub fn split_morse<C: Scalar>(h: &Jet<C>) -> Result<(Vec<C>, Jet<C>), KamError> {
    let sh = h.shape();
    let n = sh.pairs;
    if n == 0 {
        return Err(KamError::InvalidModel("no canonical pairs".into()));
    }
    let mut alpha = vec![C::zero(); n];
    for (idx, c) in h.iter() {
        if idx.degree() > 2 {
            break;
        }
        let e = idx.exps();
        let k = (0..n).find(|&k| e[sh.q(k)] == 1 && e[sh.p(k)] == 1);
        match k {
            Some(k) if idx.degree() == 2 => alpha[k] = c.clone(),
            _ => {
                return Err(KamError::InvalidModel(format!(
                    "term {} is not of the form α p_i q_i",
                    h.monomial_name(idx)
                )))
            }
        }
    }
    if let Some(k) = alpha.iter().position(|a| a.is_zero()) {
        return Err(KamError::InvalidModel(format!("α_{} vanishes", k + 1)));
    }
    let r = h.filter(|k, _| k.degree() > 2);
    Ok((alpha, r))
}

/// Best-effort real frequency vector for diagnostics: the real parts if all
/// imaginary parts vanish, the imaginary parts if all real parts do.
pub(crate) fn diagnostic_frequencies<C: Scalar>(alpha: &[C]) -> Option<FrequencyVector> {
    let z: Vec<_> = alpha.iter().map(|a| a.to_c64()).collect();
    let v: Vec<f64> = if z.iter().all(|c| c.im.abs() <= 1e-15 * c.norm()) {
        z.iter().map(|c| c.re).collect()
    } else if z.iter().all(|c| c.re.abs() <= 1e-15 * c.norm()) {
        z.iter().map(|c| c.im).collect()
    } else {
        return None;
    };
    FrequencyVector::new(v).ok()
}

/// Drive the iteration with `M = M³`, `F = I² ∩ M³` on
/// `H = Σ α_i p_i q_i + R` and certify `exp(H) − Σ α_i p_i q_i ∈ I²` at the
/// truncation of `h`.
pub fn fiber_normalize<C: Scalar>(h: &Jet<C>, schedule: Schedule) -> Result<FiberResult<C>, KamError> {
    let (alpha, r) = split_morse(h)?;
    let sh = h.shape();
    let trunc = h.trunc();
    let model = quadratic_model(sh, trunc, &alpha);
    let mut problem = KamProblem::new(alpha.clone(), model.clone(), r, ActionIdeal::fiber(sh)?);
    problem.schedule = schedule;
    let run = kam_iterate(&problem)?;
    if !run.converged {
        return Err(KamError::NotConverged { stages: run.trace.len() });
    }
    verify_conjugacy(&problem, &run)?;
    let transformed = exp_product(&run.transform, h)?;
    let certificate = problem.ideal.certify(&(&transformed - &model), trunc, h.max_abs_coeff())?;
    let bruno = diagnostic_frequencies(&alpha).and_then(|fv| {
        let s = sigma(&fv, 6, SigmaOptions::default()).ok()?;
        bruno_diagnostic(&s.to_decay().ok()?, 6).ok()
    });
    Ok(FiberResult { alpha, transform: run.transform.clone(), transformed, certificate, run, bruno })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Shape;
    use crate::poisson::{check_symplectic, coordinate_images};
    use crate::scalar::QSqrt5;

    type Q = QSqrt5;

    #[test]
    fn trivial_cases() {
        let sh = Shape::symplectic(1);
        let h = quadratic_model(sh, 8, &[Q::integer(2)]);
        let res = fiber_normalize(&h, Schedule::default()).unwrap();
        assert!(res.transform.iter().all(|u| u.is_zero()));
        let r = &h + &Jet::from_terms(sh, 8, vec![(vec![3, 3], Q::integer(1))]);
        let res = fiber_normalize(&r, Schedule::default()).unwrap();
        assert!(res.transform.iter().all(|u| u.is_zero()));
        assert_eq!(res.certificate.min_action_power, Some(3));
    }

    #[test]
    fn golden_pair_with_cubic_terms() {
        let sh = Shape::symplectic(2);
        let alpha = [Q::integer(1), Q::golden()];
        let h = &quadratic_model(sh, 8, &alpha)
            + &Jet::from_terms(sh, 8, vec![(vec![2, 1, 0, 0], Q::integer(1)), (vec![0, 0, 3, 0], Q::integer(1))]);
        let res = fiber_normalize(&h, Schedule::default()).unwrap();
        assert!(res.certificate.terms_checked > 0);
        let imgs = coordinate_images(&res.transform, sh, 8).unwrap();
        assert_eq!(check_symplectic(&imgs[..4]).unwrap(), 0.0);
        assert_eq!(h.compose(&imgs).unwrap(), res.transformed);
        assert!(res.bruno.is_some());
    }

    #[test]
    fn rejects_non_morse_quadratic_part() {
        let sh = Shape::symplectic(1);
        let h = Jet::from_terms(sh, 6, vec![(vec![2, 0], Q::integer(1)), (vec![0, 2], Q::integer(1))]);
        assert!(matches!(fiber_normalize(&h, Schedule::default()), Err(KamError::InvalidModel(_))));
    }
}
