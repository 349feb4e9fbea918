//! Birkhoff normalization near an elliptic equilibrium: the polynomial
//! `A_l` in the actions, its frequency map, the frequency space, and the
//! prenormal form `Σ α_i p_i q_i + R`, `R ∈ I²`.
//!
//! Normalization runs in complex Morse coordinates, where the quadratic
//! part is `Σ α_i p_i q_i` and `ad` is diagonal on monomials. Real elliptic
//! inputs `Σ α_i (p_i² + q_i²) + …` go through the linear symplectic map
//! `q = Q + (i/2)P`, `p = iQ + P/2`, which sends `α(p² + q²)` to `2iα QP`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Jet, JetError, MultiIndex, Shape};
use crate::kamengine::{fiber_normalize, ActionIdeal, IdealCertificate, KamError, Schedule};
use crate::linalg;
use crate::poisson::{ad_eigenvalue, lie_exp, quadratic_model, HamiltonianDerivation, PoissonError};
use crate::scalar::{ComplexScalar, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BirkhoffError {
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Kam(#[from] KamError),
    #[error("quadratic part is not of the required form: {0}")]
    NotElliptic(String),
    #[error("truncation {trunc} is below the requested order {needed}")]
    TruncationTooLow { trunc: u32, needed: u32 },
    #[error("resonance (α, i−j) = 0 at {monomial} (i = {i:?}, j = {j:?})")]
    Resonance { monomial: String, i: Vec<u8>, j: Vec<u8> },
    #[error("small divisor |(α, i−j)| = {value:e} at {monomial} (i = {i:?}, j = {j:?}), floor {floor:e}")]
    SmallDivisor { monomial: String, i: Vec<u8>, j: Vec<u8>, value: f64, floor: f64 },
    #[error("non-resonant term {monomial} of degree {degree} survived normalization")]
    NotNormalized { monomial: String, degree: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMode {
    /// Quadratic part `Σ α_i (p_i² + q_i²)`.
    RealElliptic,
    /// Quadratic part `Σ α_i p_i q_i`.
    ComplexMorse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipticHamiltonian<K: Scalar> {
    h: Jet<K>,
    alpha: Vec<K>,
    mode: CoordinateMode,
}

impl<K: Scalar> EllipticHamiltonian<K> {
    /// Read `α` off the quadratic part and check that it has exactly the
    /// shape prescribed by `mode`.
    pub fn new(h: Jet<K>, mode: CoordinateMode) -> Result<Self, BirkhoffError> {
        let sh = h.shape();
        let n = sh.pairs;
        if n == 0 || sh != Shape::symplectic(n) {
            return Err(BirkhoffError::NotElliptic("expected a jet in canonical pairs only".into()));
        }
        let mut alpha = vec![K::zero(); n];
        let mut partner: Vec<Option<K>> = vec![None; n];
        for (idx, c) in h.iter() {
            if idx.degree() > 2 {
                break;
            }
            let name = h.monomial_name(idx);
            if idx.degree() < 2 {
                return Err(BirkhoffError::NotElliptic(format!("term {name} of degree {}", idx.degree())));
            }
            let e = idx.exps();
            let ok = match mode {
                CoordinateMode::ComplexMorse => (0..n).find(|&k| e[sh.q(k)] == 1 && e[sh.p(k)] == 1).map(|k| {
                    alpha[k] = c.clone();
                }),
                CoordinateMode::RealElliptic => {
                    if let Some(k) = (0..n).find(|&k| e[sh.q(k)] == 2) {
                        alpha[k] = c.clone();
                        Some(())
                    } else if let Some(k) = (0..n).find(|&k| e[sh.p(k)] == 2) {
                        partner[k] = Some(c.clone());
                        Some(())
                    } else {
                        None
                    }
                }
            };
            if ok.is_none() {
                return Err(BirkhoffError::NotElliptic(format!("unexpected quadratic term {name}")));
            }
        }
        if let Some(k) = alpha.iter().position(|a| a.is_zero()) {
            return Err(BirkhoffError::NotElliptic(format!("α_{} vanishes", k + 1)));
        }
        if mode == CoordinateMode::RealElliptic {
            for k in 0..n {
                if partner[k].as_ref() != Some(&alpha[k]) {
                    return Err(BirkhoffError::NotElliptic(format!(
                        "coefficients of q{0}^2 and p{0}^2 differ",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self { h, alpha, mode })
    }

    pub fn jet(&self) -> &Jet<K> {
        &self.h
    }

    pub fn alpha(&self) -> &[K] {
        &self.alpha
    }

    pub fn mode(&self) -> CoordinateMode {
        self.mode
    }

    pub fn pairs(&self) -> usize {
        self.alpha.len()
    }
}

/// `H` in Morse coordinates together with the linear maps in both
/// directions: `h = original.compose(forward)` and
/// `original = h.compose(inverse)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseForm<K: Scalar> {
    pub h: Jet<K>,
    pub alpha: Vec<K>,
    pub forward: Vec<Jet<K>>,
    pub inverse: Vec<Jet<K>>,
}

fn linear_map<K: Scalar>(sh: Shape, trunc: u32, rows: impl Fn(usize) -> [(usize, K); 2]) -> Vec<Jet<K>> {
    (0..sh.num_vars())
        .map(|v| {
            let mut j = Jet::zero(sh, trunc);
            for (w, c) in rows(v) {
                j.add_term(sh.unit_index(w), c);
            }
            j
        })
        .collect()
}

pub fn to_complex_morse<K: ComplexScalar>(h: &EllipticHamiltonian<K>) -> Result<MorseForm<K>, BirkhoffError> {
    let sh = h.h.shape();
    let tr = h.h.trunc();
    let n = h.pairs();
    match h.mode {
        CoordinateMode::ComplexMorse => {
            let id: Vec<Jet<K>> = (0..sh.num_vars()).map(|v| Jet::var(sh, tr, v)).collect();
            Ok(MorseForm { h: h.h.clone(), alpha: h.alpha.clone(), forward: id.clone(), inverse: id })
        }
        CoordinateMode::RealElliptic => {
            let i = K::i();
            let half = K::from_ratio(1, 2);
            let forward = linear_map(sh, tr, |v| {
                if v < n {
                    [(sh.q(v), K::one()), (sh.p(v), i.clone() * half.clone())]
                } else {
                    let k = v - n;
                    [(sh.q(k), i.clone()), (sh.p(k), half.clone())]
                }
            });
            let inverse = linear_map(sh, tr, |v| {
                if v < n {
                    [(sh.q(v), half.clone()), (sh.p(v), -(i.clone() * half.clone()))]
                } else {
                    let k = v - n;
                    [(sh.q(k), -i.clone()), (sh.p(k), K::one())]
                }
            });
            let hm = h.h.compose(&forward)?;
            let two_i = i * K::from_i64(2);
            let alpha = h.alpha.iter().map(|a| a.clone() * two_i.clone()).collect();
            Ok(MorseForm { h: hm, alpha, forward, inverse })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveOrder {
    /// One generator per degree.
    PerDegree,
    /// One exponential per non-resonant monomial.
    PerMonomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffOptions {
    /// Float mode only; exact mode aborts on true resonances alone.
    pub divisor_floor: f64,
    pub order: SolveOrder,
}

impl Default for BirkhoffOptions {
    fn default() -> Self {
        Self { divisor_floor: 1e-12, order: SolveOrder::PerDegree }
    }
}

/// Output of the degree-by-degree normalization in Morse coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseNormalForm<K: Scalar> {
    pub normalized: Jet<K>,
    /// `A_l` in free variables `X_1..X_n`, truncation `l`.
    pub a: Jet<K>,
    pub generators: Vec<HamiltonianDerivation<K>>,
    /// `normalized − A_l(p_1q_1, …, p_nq_n)`; order `> 2l`.
    pub residual: Jet<K>,
    pub achieved_order: u32,
    pub min_divisor: f64,
}

fn divide<K: Scalar>(
    alpha: &[K],
    sh: Shape,
    idx: &MultiIndex,
    c: &K,
    floor: f64,
) -> Result<(K, f64), BirkhoffError> {
    let (i, j) = idx.qp(sh.pairs);
    let lam = ad_eigenvalue(alpha, i, j);
    let name = || crate::jets::monomial_name(sh, idx);
    if lam.is_zero() {
        return Err(BirkhoffError::Resonance { monomial: name(), i: i.to_vec(), j: j.to_vec() });
    }
    let m = lam.magnitude();
    if !K::EXACT && m <= floor {
        return Err(BirkhoffError::SmallDivisor { monomial: name(), i: i.to_vec(), j: j.to_vec(), value: m, floor });
    }
    Ok((-(c.clone() / lam), m))
}

/// The actions `p_k q_k` as jets.
pub fn action_jets<K: Scalar>(sh: Shape, trunc: u32) -> Vec<Jet<K>> {
    (0..sh.pairs).map(|k| Jet::var(sh, trunc, sh.q(k)).mul_var(sh.p(k))).collect()
}

/// `A(X)` from the resonant part of a normalized jet through degree `2l`.
pub fn birkhoff_polynomial<K: Scalar>(g: &Jet<K>, l: u32) -> Jet<K> {
    let n = g.shape().pairs;
    let free = Shape::free(n);
    let mut a = Jet::zero(free, l);
    for (idx, c) in g.iter() {
        if idx.degree() <= 2 * l && idx.is_resonant(n) {
            let (i, _) = idx.qp(n);
            a.add_term(free.index(i), c.clone());
        }
    }
    a
}

/// Normalize `h = Σ α_k p_k q_k + O(3)` through degree `2l`.
pub fn normalize_morse<K: Scalar>(
    h: &Jet<K>,
    alpha: &[K],
    l: u32,
    opts: BirkhoffOptions,
) -> Result<MorseNormalForm<K>, BirkhoffError> {
    let sh = h.shape();
    let n = sh.pairs;
    let trunc = h.trunc();
    if trunc < 2 * l {
        return Err(BirkhoffError::TruncationTooLow { trunc, needed: 2 * l });
    }
    let scale = h.max_abs_coeff();
    let tol = if K::EXACT { 0.0 } else { 1e-11 * scale.max(1.0) };
    let mut g = h.clone();
    let mut generators = Vec::new();
    let mut min_div = f64::INFINITY;
    for d in 3..=2 * l {
        let terms: Vec<(MultiIndex, K)> = g
            .homogeneous(d)
            .iter()
            .filter(|(idx, c)| !idx.is_resonant(n) && c.magnitude() > tol)
            .map(|(i, c)| (i.clone(), c.clone()))
            .collect();
        if terms.is_empty() {
            continue;
        }
        let solved: Vec<(MultiIndex, K, f64)> = terms
            .par_iter()
            .map(|(idx, c)| divide(alpha, sh, idx, c, opts.divisor_floor).map(|(x, m)| (idx.clone(), x, m)))
            .collect::<Result<_, _>>()?;
        match opts.order {
            SolveOrder::PerDegree => {
                let mut chi = Jet::zero(sh, trunc);
                for (idx, x, m) in solved {
                    min_div = min_div.min(m);
                    chi.add_term(idx, x);
                }
                let u = HamiltonianDerivation::new(chi);
                g = lie_exp(&u, &g)?;
                generators.push(u);
            }
            SolveOrder::PerMonomial => {
                for (idx, x, m) in solved {
                    min_div = min_div.min(m);
                    let mut chi = Jet::zero(sh, trunc);
                    chi.add_term(idx, x);
                    let u = HamiltonianDerivation::new(chi);
                    g = lie_exp(&u, &g)?;
                    generators.push(u);
                }
            }
        }
        if !K::EXACT {
            g = g.filter(|_, c| c.magnitude() > tol);
        }
    }
    let a = birkhoff_polynomial(&g, l);
    let residual = &g - &a.compose(&action_jets(sh, trunc))?;
    let low = residual.truncate(2 * l).filter(|_, c| c.magnitude() > tol);
    if let Some((idx, _)) = low.iter().next() {
        return Err(BirkhoffError::NotNormalized { monomial: low.monomial_name(idx), degree: idx.degree() });
    }
    Ok(MorseNormalForm { normalized: g, a, generators, residual, achieved_order: 2 * l, min_divisor: min_div })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffResult<K: Scalar> {
    pub mode: CoordinateMode,
    pub morse: MorseForm<K>,
    /// `H ∘ exp_l` in Morse coordinates.
    pub normalized: Jet<K>,
    /// `A_l` in the Morse actions `Y_k = p_k q_k`.
    pub a: Jet<K>,
    /// `A_l` in the real actions `X_k = (p_k² + q_k²)/2`, for real inputs.
    pub a_real: Option<Jet<K>>,
    pub generators: Vec<HamiltonianDerivation<K>>,
    pub residual: Jet<K>,
    pub achieved_order: u32,
    pub min_divisor: f64,
}

/// Birkhoff normal form through degree `2l`. For real inputs the real
/// action `(p² + q²)/2` equals `i Y`, so `A_real(X) = A(−iX)`.
pub fn birkhoff_normalize<K: ComplexScalar>(
    h: &EllipticHamiltonian<K>,
    l: u32,
    opts: BirkhoffOptions,
) -> Result<BirkhoffResult<K>, BirkhoffError> {
    let morse = to_complex_morse(h)?;
    let nf = normalize_morse(&morse.h, &morse.alpha, l, opts)?;
    let a_real = match h.mode {
        CoordinateMode::ComplexMorse => None,
        CoordinateMode::RealElliptic => {
            let free = nf.a.shape();
            let mi = -K::i();
            let subs: Vec<Jet<K>> = (0..free.num_vars()).map(|v| Jet::var(free, l, v).scale(&mi)).collect();
            Some(nf.a.compose(&subs)?)
        }
    };
    Ok(BirkhoffResult {
        mode: h.mode,
        morse,
        normalized: nf.normalized,
        a: nf.a,
        a_real,
        generators: nf.generators,
        residual: nf.residual,
        achieved_order: nf.achieved_order,
        min_divisor: nf.min_divisor,
    })
}

/// `∇A = (∂A/∂X_1, …, ∂A/∂X_n)`.
pub fn frequency_map<K: Scalar>(a: &Jet<K>) -> Vec<Jet<K>> {
    let sh = a.shape();
    (0..sh.free).map(|k| a.derivative(sh.free_var(k))).collect()
}

/// Affine span `base + span(basis)` of the image of `∇A`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpace<K: Scalar> {
    pub base: Vec<K>,
    /// Reduced echelon form.
    pub basis: Vec<Vec<K>>,
    pub pivots: Vec<usize>,
    pub dim: usize,
}

/// The smallest affine subspace containing the image of a polynomial map
/// `∇A`: its constant term plus the span of the coefficient vectors of the
/// nonconstant monomials.
pub fn frequency_space_of<K: Scalar>(a: &Jet<K>) -> FrequencySpace<K> {
    let grad = frequency_map(a);
    let n = grad.len();
    let free = a.shape();
    let zero = free.zero_index();
    let base = grad.iter().map(|g| g.coeff(&zero)).collect();
    let mut monos: Vec<MultiIndex> = grad.iter().flat_map(|g| g.iter().map(|(i, _)| i.clone())).collect();
    monos.sort();
    monos.dedup();
    let rows: Vec<Vec<K>> = monos
        .iter()
        .filter(|m| m.degree() > 0)
        .map(|m| (0..n).map(|k| grad[k].coeff(m)).collect())
        .collect();
    let (basis, pivots) = linalg::rref(&rows);
    let dim = basis.len();
    FrequencySpace { base, basis, pivots, dim }
}

/// Frequency space of `H` computed from `A_l` (Morse coordinates).
pub fn frequency_space<K: ComplexScalar>(
    h: &EllipticHamiltonian<K>,
    l: u32,
    opts: BirkhoffOptions,
) -> Result<FrequencySpace<K>, BirkhoffError> {
    Ok(frequency_space_of(&birkhoff_normalize(h, l, opts)?.a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    /// Certify the input as given.
    None,
    /// Birkhoff normalization through degree `2k` first.
    Birkhoff,
    /// Fiber normalization modulo `I²` first.
    Fiber,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrenormalForm<K: Scalar> {
    /// `H′ = Σ α_i p_i q_i + R` in Morse coordinates.
    pub h: Jet<K>,
    pub alpha: Vec<K>,
    pub r: Jet<K>,
    pub certificate: IdealCertificate,
    pub transform: Vec<HamiltonianDerivation<K>>,
    /// `A_k`, when a normalization ran and `α` is non-resonant to `2k`.
    pub a: Option<Jet<K>>,
}

/// Bring `H` to the shape `Σ α_i p_i q_i + R` with a certificate that
/// `R ∈ I²` (through the truncation, or through `2k` after Birkhoff
/// normalization).
pub fn prenormal_form<K: ComplexScalar>(
    h: &EllipticHamiltonian<K>,
    k: u32,
    pre: Preprocessing,
    opts: BirkhoffOptions,
) -> Result<PrenormalForm<K>, BirkhoffError> {
    let morse = to_complex_morse(h)?;
    let sh = morse.h.shape();
    let trunc = morse.h.trunc();
    let h2 = quadratic_model(sh, trunc, &morse.alpha);
    let ideal = ActionIdeal::fiber(sh)?;
    let scale = morse.h.max_abs_coeff();
    let (hp, through, transform) = match pre {
        Preprocessing::None => (morse.h.clone(), trunc, Vec::new()),
        Preprocessing::Birkhoff => {
            let nf = normalize_morse(&morse.h, &morse.alpha, k, opts)?;
            (nf.normalized, 2 * k, nf.generators)
        }
        Preprocessing::Fiber => {
            let fr = fiber_normalize(&morse.h, Schedule::Full)?;
            (fr.transformed, trunc, fr.transform)
        }
    };
    let r = &hp - &h2;
    let certificate = ideal.certify(&r, through, scale)?;
    let a = match pre {
        Preprocessing::None => None,
        _ if trunc >= 2 * k => normalize_morse(&morse.h, &morse.alpha, k, opts).ok().map(|nf| nf.a),
        _ => None,
    };
    Ok(PrenormalForm { h: hp, alpha: morse.alpha, r, certificate, transform, a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{check_symplectic, coordinate_images, exp_product};
    use crate::scalar::{CQSqrt5, QSqrt5};
    use num_complex::Complex;

    type K = CQSqrt5;

    fn r(n: i64, d: i64) -> K {
        K::from_ratio(n, d)
    }

    fn ci(re: i64, im: i64) -> K {
        Complex::new(QSqrt5::integer(re), QSqrt5::integer(im))
    }

    #[test]
    fn real_to_morse_round_trip() {
        let sh = Shape::symplectic(2);
        let h = Jet::from_terms(
            sh,
            6,
            vec![
                (vec![2, 0, 0, 0], r(2, 1)),
                (vec![0, 0, 2, 0], r(2, 1)),
                (vec![0, 2, 0, 0], r(2, 1)),
                (vec![0, 0, 0, 2], r(2, 1)),
                (vec![3, 0, 0, 0], r(1, 1)),
            ],
        );
        let eh = EllipticHamiltonian::new(h.clone(), CoordinateMode::RealElliptic).unwrap();
        let m = to_complex_morse(&eh).unwrap();
        assert_eq!(m.alpha, vec![ci(0, 4), ci(0, 4)]);
        assert_eq!(m.h.homogeneous(2), quadratic_model(sh, 6, &m.alpha));
        assert_eq!(m.h.compose(&m.inverse).unwrap(), h);
        assert_eq!(check_symplectic(&m.forward[..4]).unwrap(), 0.0);
    }

    #[test]
    fn morse_input_is_identity() {
        let sh = Shape::symplectic(1);
        let h = quadratic_model(sh, 4, &[r(3, 1)]);
        let eh = EllipticHamiltonian::new(h.clone(), CoordinateMode::ComplexMorse).unwrap();
        let m = to_complex_morse(&eh).unwrap();
        assert_eq!(m.h, h);
    }

    #[test]
    fn rejects_bad_quadratic_parts() {
        let sh = Shape::symplectic(1);
        let h = Jet::from_terms(sh, 4, vec![(vec![2, 0], r(1, 1)), (vec![0, 2], r(2, 1))]);
        assert!(EllipticHamiltonian::new(h.clone(), CoordinateMode::RealElliptic).is_err());
        assert!(EllipticHamiltonian::new(h, CoordinateMode::ComplexMorse).is_err());
        let h = Jet::from_terms(sh, 4, vec![(vec![1, 0], r(1, 1)), (vec![1, 1], r(1, 1))]);
        assert!(EllipticHamiltonian::new(h, CoordinateMode::ComplexMorse).is_err());
    }

    #[test]
    fn already_normal() {
        let sh = Shape::symplectic(1);
        let h = &quadratic_model(sh, 8, &[r(3, 1)]) + &Jet::from_terms(sh, 8, vec![(vec![2, 2], r(1, 1))]);
        let eh = EllipticHamiltonian::new(h, CoordinateMode::ComplexMorse).unwrap();
        let res = birkhoff_normalize(&eh, 4, BirkhoffOptions::default()).unwrap();
        assert!(res.generators.is_empty());
        let free = Shape::free(1);
        assert_eq!(res.a, Jet::from_terms(free, 4, vec![(vec![1], r(3, 1)), (vec![2], r(1, 1))]));
        assert!(res.residual.is_zero());
    }

    fn quartic_oscillator(trunc: u32) -> EllipticHamiltonian<K> {
        let sh = Shape::symplectic(1);
        let h = Jet::from_terms(
            sh,
            trunc,
            vec![(vec![2, 0], r(1, 2)), (vec![0, 2], r(1, 2)), (vec![4, 0], r(1, 1))],
        );
        EllipticHamiltonian::new(h, CoordinateMode::RealElliptic).unwrap()
    }

    /// Mean of `q⁴` over `q = √(2X) cos θ` is `4X² · 3/8`.
    fn angle_average_coefficient() -> K {
        let mean_cos4 = r(3, 8);
        r(4, 1) * mean_cos4
    }

    #[test]
    fn quartic_action_coefficient() {
        let res = birkhoff_normalize(&quartic_oscillator(8), 4, BirkhoffOptions::default()).unwrap();
        let ar = res.a_real.unwrap();
        assert_eq!(ar.coeff_of(&[1]), r(1, 1));
        assert_eq!(ar.coeff_of(&[2]), angle_average_coefficient());
        assert!(res.residual.ord() > 8);
        let sh = Shape::symplectic(1);
        let imgs = coordinate_images(&res.generators, sh, 8).unwrap();
        assert_eq!(check_symplectic(&imgs).unwrap(), 0.0);
        assert_eq!(exp_product(&res.generators, &res.morse.h).unwrap(), res.normalized);
        let grad = frequency_map(&ar);
        assert_eq!((grad[0].coeff_of(&[0]), grad[0].coeff_of(&[1])), (r(1, 1), r(3, 1)));
    }

    #[test]
    fn orderings_agree() {
        let sh = Shape::symplectic(2);
        let alpha = [r(1, 1), Complex::new(QSqrt5::golden(), QSqrt5::integer(0))];
        let h = &quadratic_model(sh, 6, &alpha)
            + &Jet::from_terms(sh, 6, vec![(vec![2, 1, 0, 0], r(1, 1)), (vec![0, 0, 3, 0], r(1, 1)), (vec![1, 0, 0, 2], r(2, 1))]);
        let a = normalize_morse(&h, &alpha, 3, BirkhoffOptions::default()).unwrap();
        let b = normalize_morse(&h, &alpha, 3, BirkhoffOptions { order: SolveOrder::PerMonomial, ..Default::default() }).unwrap();
        assert_eq!(a.a, b.a);
        assert!(b.generators.len() > a.generators.len());
    }

    #[test]
    fn exact_resonance_is_reported() {
        let sh = Shape::symplectic(2);
        let alpha = [r(1, 1), r(1, 1)];
        let h = &quadratic_model(sh, 6, &alpha) + &Jet::from_terms(sh, 6, vec![(vec![2, 0, 1, 1], r(1, 1))]);
        // q1² p1 p2: i − j = (2,0) − (1,1), (α, i−j) = 0
        let err = normalize_morse(&h, &alpha, 2, BirkhoffOptions::default()).unwrap_err();
        assert!(matches!(err, BirkhoffError::Resonance { .. }), "{err:?}");
    }

    #[test]
    fn frequency_spaces() {
        let free = Shape::free(2);
        let lin = Jet::from_terms(free, 3, vec![(vec![1, 0], r(1, 1)), (vec![0, 1], r(2, 1))]);
        assert_eq!(frequency_space_of(&lin).dim, 0);
        assert!(frequency_map(&Jet::<K>::constant(free, 3, r(1, 1))).iter().all(|g| g.is_zero()));
        // A = X₁ + 2X₂ + (2X₁ + 3X₂)²: ∇A moves along (2, 3) only
        let a = &lin
            + &Jet::from_terms(free, 3, vec![(vec![2, 0], r(4, 1)), (vec![1, 1], r(12, 1)), (vec![0, 2], r(9, 1))]);
        let fs = frequency_space_of(&a);
        assert_eq!(fs.dim, 1);
        assert_eq!(fs.basis[0], vec![r(1, 1), r(3, 2)]);
    }

    #[test]
    fn prenormal_forms() {
        let sh = Shape::symplectic(1);
        let h = &quadratic_model(sh, 8, &[r(1, 1)]) + &Jet::from_terms(sh, 8, vec![(vec![3, 0], r(1, 1))]);
        let eh = EllipticHamiltonian::new(h, CoordinateMode::ComplexMorse).unwrap();
        let err = prenormal_form(&eh, 3, Preprocessing::None, BirkhoffOptions::default()).unwrap_err();
        assert!(err.to_string().contains("q1^3"), "{err}");
        let pf = prenormal_form(&eh, 3, Preprocessing::Fiber, BirkhoffOptions::default()).unwrap();
        assert!(pf.certificate.terms_checked > 0 || pf.r.is_zero());
        let pb = prenormal_form(&eh, 3, Preprocessing::Birkhoff, BirkhoffOptions::default()).unwrap();
        assert_eq!(pb.certificate.through_degree, 6);
        assert!(pb.a.is_some());
    }
}
