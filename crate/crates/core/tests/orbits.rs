use kamjet::torusverify::{integrate, torus_scan, HamiltonianField, Scheme, TorusOptions};
use kamjet::{Jet, Shape};

fn oscillator(perturbation: f64) -> Jet<f64> {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let mut terms = vec![(vec![2, 0, 0, 0], 1.0), (vec![0, 0, 2, 0], 1.0), (vec![0, 2, 0, 0], phi), (vec![0, 0, 0, 2], phi)];
    if perturbation != 0.0 {
        terms.push((vec![2, 2, 0, 0], perturbation));
    }
    Jet::from_terms(Shape::symplectic(2), 4, terms)
}

#[test]
fn quadratic_energy_is_conserved_to_roundoff() {
    let field = HamiltonianField::new(&oscillator(0.0)).unwrap();
    let x0 = [0.3, -0.1, 0.2, 0.05];
    // midpoint is exact for quadratic H; the triple jump only to its order
    let mid = integrate(&field, &x0, 0.01, 5000, Scheme::Midpoint, 1e3).unwrap();
    assert!(mid.energy_drift < 1e-12, "midpoint drift {}", mid.energy_drift);
    let y4 = integrate(&field, &x0, 0.01, 5000, Scheme::Yoshida4, 1e3).unwrap();
    assert!(y4.energy_drift < 1e-8, "triple-jump drift {}", y4.energy_drift);
}

#[test]
fn fractions_do_not_grow_with_perturbation() {
    let opts = TorusOptions { dt: 0.005, steps: 1 << 13, ..TorusOptions::default() };
    let samples = 40;
    let fr: Vec<(f64, f64)> = [0.0, 0.05, 1.0]
        .iter()
        .map(|&eps| {
            let rep = torus_scan(&oscillator(eps), 0.25, samples, 5, &opts).unwrap();
            (rep.fraction, rep.std_error)
        })
        .collect();
    assert_eq!(fr[0].0, 1.0);
    for w in fr.windows(2) {
        let tol = 2.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
        assert!(w[1].0 <= w[0].0 + tol, "{fr:?}");
    }
}
