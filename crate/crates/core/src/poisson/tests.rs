use proptest::prelude::*;

use super::*;
use crate::jets::Shape;
use crate::scalar::{QSqrt5, Scalar};

type Q = QSqrt5;

fn q(v: i64) -> Q {
    Q::integer(v)
}

fn mono(sh: Shape, n: u32, e: &[u8], c: i64) -> Jet<Q> {
    Jet::monomial(sh, n, e, q(c))
}

/// Bracket computed from its definition with derivatives, used as an
/// oracle against the monomial-pair implementation.
fn bracket_by_derivatives(f: &Jet<Q>, g: &Jet<Q>) -> Jet<Q> {
    let sh = f.shape();
    let mut out = Jet::zero(sh, f.trunc());
    for i in 0..sh.pairs {
        let a = &f.derivative(sh.q(i)) * &g.derivative(sh.p(i));
        let b = &f.derivative(sh.p(i)) * &g.derivative(sh.q(i));
        out = &out + &(&a - &b);
    }
    out
}

#[test]
fn canonical_normalization() {
    let sh = Shape::symplectic(1);
    let (qv, pv) = (Jet::<Q>::var(sh, 4, 0), Jet::<Q>::var(sh, 4, 1));
    assert_eq!(bracket(&qv, &pv).unwrap(), Jet::one(sh, 4));
    let pq = mono(sh, 4, &[1, 1], 1);
    assert_eq!(bracket(&pq, &qv).unwrap(), -&qv);
}

#[test]
fn bracket_requires_pairs() {
    let f = Jet::<Q>::var(Shape::free(2), 3, 0);
    assert_eq!(bracket(&f, &f), Err(PoissonError::NoPairs));
    let g = Jet::<Q>::var(Shape::symplectic(2), 3, 0);
    assert!(matches!(bracket(&g, &Jet::var(Shape::symplectic(1), 3, 0)), Err(PoissonError::Layout(_))));
}

#[test]
fn ad_eigenvalue_matches_bracket() {
    let alpha = [q(1), Q::golden()];
    let sh = Shape::symplectic(2);
    let n = 6;
    let h2 = quadratic_model(sh, n, &alpha);
    for e in exps(4, n) {
        let m = Jet::monomial(sh, n, &e, q(1));
        let c = ad_eigenvalue(&alpha, &e[..2], &e[2..]);
        assert_eq!(bracket(&m, &h2).unwrap(), m.scale(&c), "monomial {e:?}");
        if e[..2] == e[2..] {
            assert!(c.is_zero());
        }
    }
    assert_eq!(ad_eigenvalue(&[q(5)], &[3], &[0]), q(15));
    assert_eq!(ad_eigenvalue(&[q(5)], &[2], &[2]), q(0));
}

fn exps(m: usize, n: u32) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u8>| {
                (0..=n as u8).map(move |x| {
                    let mut e2 = e.clone();
                    e2.push(x);
                    e2
                })
            })
            .collect();
    }
    out.retain(|e| e.iter().map(|&x| x as u32).sum::<u32>() <= n);
    out
}

#[test]
fn lie_exp_of_cubic_on_p() {
    let sh = Shape::symplectic(1);
    let u = HamiltonianDerivation::new(mono(sh, 4, &[3, 0], 1));
    let p = Jet::var(sh, 4, 1);
    // {q³, p} = 3q², then {q³, 3q²} = 0
    assert_eq!(lie_exp(&u, &p).unwrap(), &p + &mono(sh, 4, &[2, 0], 3));
    assert_eq!(lie_exp(&HamiltonianDerivation::zero(sh, 4), &p).unwrap(), p);
}

#[test]
fn low_order_generators_are_rejected() {
    let sh = Shape::symplectic(1);
    let u = HamiltonianDerivation::new(mono(sh, 4, &[1, 1], 1));
    assert_eq!(lie_exp(&u, &Jet::var(sh, 4, 0)), Err(PoissonError::OrderTooLow { ord: 2 }));
}

#[test]
fn mu_direction_translates_parameters() {
    let sh = Shape::extended(1, 1);
    let n = 6;
    let lam = Jet::<Q>::var(sh, n, sh.lambda_var(0));
    let mu = Jet::<Q>::var(sh, n, sh.mu_var(0));
    let a = lam.scale(&q(3));
    let u = HamiltonianDerivation::with_mu(Jet::zero(sh, n), vec![a.clone()]);
    assert_eq!(lie_exp(&u, &mu).unwrap(), &mu + &a);
    // e^{a∂μ}(μ²) = (μ + a)²
    let mu2 = &mu * &mu;
    let shifted = &mu + &a;
    assert_eq!(lie_exp(&u, &mu2).unwrap(), &shifted * &shifted);
    let bad = HamiltonianDerivation::<Q>::with_mu(Jet::zero(sh, n), vec![Jet::one(sh, n)]);
    assert!(matches!(bad.check_admissible(), Err(PoissonError::MuCoefficient { .. })));
}

#[test]
fn symplectic_check_examples() {
    let sh = Shape::symplectic(1);
    let n = 6;
    let id = vec![Jet::<Q>::var(sh, n, 0), Jet::var(sh, n, 1)];
    assert_eq!(check_symplectic(&id).unwrap(), 0.0);
    let scaled = vec![Jet::<Q>::var(sh, n, 0).scale(&q(2)), Jet::var(sh, n, 1)];
    assert_eq!(check_symplectic(&scaled).unwrap(), 1.0);
    let degenerate = vec![Jet::<Q>::var(sh, n, 0), Jet::var(sh, n, 0)];
    assert!(matches!(check_symplectic(&degenerate), Err(PoissonError::NonInvertibleLinearPart { .. })));

    let sh2 = Shape::symplectic(2);
    let gens = vec![
        HamiltonianDerivation::new(&mono(sh2, n, &[2, 1, 0, 0], 1) + &mono(sh2, n, &[0, 0, 1, 2], -3)),
        HamiltonianDerivation::new(mono(sh2, n, &[1, 1, 1, 1], 2)),
    ];
    let imgs = coordinate_images(&gens, sh2, n).unwrap();
    assert_eq!(check_symplectic(&imgs).unwrap(), 0.0);
}

#[test]
fn product_then_inverse_is_identity_on_monomials() {
    let sh = Shape::symplectic(1);
    let n = 7;
    let gens = vec![
        HamiltonianDerivation::new(&mono(sh, n, &[3, 0], 1) + &mono(sh, n, &[1, 2], 2)),
        HamiltonianDerivation::new(mono(sh, n, &[0, 3], -1)),
        HamiltonianDerivation::new(&mono(sh, n, &[2, 1], 1) + &mono(sh, n, &[0, 3], 5)),
    ];
    let inv = inverse_list(&gens);
    for e in exps(2, n) {
        let m = Jet::monomial(sh, n, &e, q(1));
        let there = exp_product(&gens, &m).unwrap();
        assert_eq!(exp_product(&inv, &there).unwrap(), m, "monomial {e:?}");
        // images compose to the same operator
        let imgs = coordinate_images(&gens, sh, n).unwrap();
        assert_eq!(m.compose(&imgs).unwrap(), there);
    }
    assert_eq!(exp_product(&[], &Jet::<Q>::var(sh, n, 0)).unwrap(), Jet::var(sh, n, 0));
}

fn arb_poly(n: usize, max_deg: u32, min_deg: u32, trunc: u32) -> impl Strategy<Value = Jet<Q>> {
    prop::collection::vec((prop::collection::vec(0u8..=max_deg as u8, 2 * n), -4i64..=4, 1i64..=3), 0..5)
        .prop_map(move |terms| {
            let sh = Shape::symplectic(n);
            Jet::from_terms(
                sh,
                trunc,
                terms
                    .into_iter()
                    .filter(|(e, _, _)| {
                        let d: u32 = e.iter().map(|&x| x as u32).sum();
                        d <= max_deg && d >= min_deg
                    })
                    .map(|(e, a, b)| (e, Q::from_ratio(a, b))),
            )
        })
}

fn arb_poly_triple() -> impl Strategy<Value = (Jet<Q>, Jet<Q>, Jet<Q>)> {
    // degree ≤ 6 inputs with truncation high enough that nothing is lost
    (1usize..=3).prop_flat_map(|n| (arb_poly(n, 6, 0, 24), arb_poly(n, 6, 0, 24), arb_poly(n, 6, 0, 24)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poisson_algebra_laws((f, g, h) in arb_poly_triple()) {
        let fg = bracket(&f, &g).unwrap();
        prop_assert_eq!(&fg, &bracket_by_derivatives(&f, &g));
        prop_assert!((&fg + &bracket(&g, &f).unwrap()).is_zero());
        let leib = &bracket(&f, &(&g * &h)).unwrap()
            - &(&(&bracket(&f, &g).unwrap() * &h) + &(&g * &bracket(&f, &h).unwrap()));
        prop_assert!(leib.is_zero());
        let jac = &(&bracket(&f, &bracket(&g, &h).unwrap()).unwrap()
            + &bracket(&g, &bracket(&h, &f).unwrap()).unwrap())
            + &bracket(&h, &bracket(&f, &g).unwrap()).unwrap();
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn lie_exp_is_a_ring_morphism(
        (h, f, g) in (1usize..=2).prop_flat_map(|n| (arb_poly(n, 4, 3, 7), arb_poly(n, 3, 0, 7), arb_poly(n, 3, 0, 7)))
    ) {
        let u = HamiltonianDerivation::new(h);
        let lhs = lie_exp(&u, &(&f * &g)).unwrap();
        let rhs = &lie_exp(&u, &f).unwrap() * &lie_exp(&u, &g).unwrap();
        prop_assert_eq!(lhs, rhs);
        let back = lie_exp(&u.neg(), &lie_exp(&u, &f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn commuting_generators_add(a in -3i64..=3, b in -3i64..=3, c in -3i64..=3, f in arb_poly(1, 4, 0, 8)) {
        // functions of the action pq commute, and so do functions of q alone
        let sh = Shape::symplectic(1);
        for (e1, e2) in [([2u8, 2u8], [3u8, 3u8]), ([3, 0], [4, 0])] {
            let u = HamiltonianDerivation::new(mono(sh, 8, &e1, a));
            let v = HamiltonianDerivation::new(&mono(sh, 8, &e2, b) + &mono(sh, 8, &e1, c));
            prop_assert!(bracket(&u.generator, &v.generator).unwrap().is_zero());
            let sum = lie_exp(&u.add(&v), &f).unwrap();
            let seq = lie_exp(&u, &lie_exp(&v, &f).unwrap()).unwrap();
            prop_assert_eq!(sum, seq);
        }
    }
}
