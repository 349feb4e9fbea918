use super::fiber::split_morse;
use super::ideal::{ActionIdeal, IdealCertificate};
use super::iterate::{kam_iterate, verify_conjugacy, KamProblem, KamRun, Schedule};
use super::KamError;
use crate::jets::{Jet, Shape};
use crate::poisson::exp_product;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedReport<C: Scalar> {
    pub shape: Shape,
    pub alpha: Vec<C>,
    /// Frequency directions in reduced echelon form.
    pub basis: Vec<Vec<C>>,
    pub run: KamRun<C>,
    /// `exp(G) − G₀ ∈ J² + (functions of λ, μ)`.
    pub certificate: IdealCertificate,
    /// Solution of `T(μ) = 0`: the counterterm `a_i(λ)`.
    pub corrections: Vec<Jet<C>>,
    /// `α + Σ_i a_i(λ) e_i`, one jet per pair.
    pub frequency: Vec<Jet<C>>,
    /// Weighted degree through which `frequency` is determined.
    pub frequency_through: u32,
}

/// The model `G₀ = Σ_k (α + Σ_i μ_i e_i)_k p_k q_k`.
pub fn counterterm_model<C: Scalar>(shape: Shape, trunc: u32, alpha: &[C], basis: &[Vec<C>]) -> Jet<C> {
    let mut g = Jet::zero(shape, trunc);
    for (k, a) in alpha.iter().enumerate() {
        let pq = Jet::var(shape, trunc, shape.q(k)).mul_var(shape.p(k));
        g = &g + &pq.scale(a);
        for (i, e) in basis.iter().enumerate() {
            g = &g + &pq.mul_var(shape.mu_var(i)).scale(&e[k]);
        }
    }
    g
}

/// Run the iteration on `G = Σ α_k p_k q_k + Σ_i μ_i (f, e_i) + R` with
/// `F = J² + (functions of λ, μ)`, `J = ⟨p_k q_k − Σ_i λ_i e_{ik}⟩`.
///
/// Non-resonant components are removed by Hadamard quotients, resonant
/// `J/J²` components by `Σ a_i ∂_{μ_i}`. Afterwards `T(μ) = 0` is solved
/// for `μ = a(λ)`, so the torus `{p_k q_k = x_k(λ)}` of the original
/// Hamiltonian carries the frequency `α + Σ_i a_i(λ) e_i`.
pub fn extended_scenario<C: Scalar>(
    h: &Jet<C>,
    basis: &[Vec<C>],
    schedule: Schedule,
) -> Result<ExtendedReport<C>, KamError> {
    extended_scenario_staged(h, basis, schedule, None)
}

/// As [`extended_scenario`], stopping after at most `max_stage` stages.
pub fn extended_scenario_staged<C: Scalar>(
    h: &Jet<C>,
    basis: &[Vec<C>],
    schedule: Schedule,
    max_stage: Option<usize>,
) -> Result<ExtendedReport<C>, KamError> {
    let (alpha, r) = split_morse(h)?;
    let n = alpha.len();
    let d = basis.len();
    let trunc = h.trunc();
    let shape = Shape::extended(n, d);
    let ideal = ActionIdeal::extended(shape, basis)?;
    let basis = ideal.basis().to_vec();
    let map: Vec<usize> = (0..2 * n).collect();
    let pert = r.embed(shape, &map);
    let model = counterterm_model(shape, trunc, &alpha, &basis);
    let mut problem = KamProblem::new(alpha.clone(), model, pert, ideal);
    problem.schedule = schedule;
    if let Some(m) = max_stage {
        problem.max_stage = m;
    }
    let run = kam_iterate(&problem)?;
    if !run.converged {
        return Err(KamError::NotConverged { stages: run.trace.len() });
    }
    let certificate = verify_conjugacy(&problem, &run)?;

    // T(μ_i) = μ_i + ν_i(λ, μ); iterate μ ← −ν(λ, μ) from μ = 0
    let mut nu = Vec::with_capacity(d);
    for i in 0..d {
        let mu = Jet::var(shape, trunc, shape.mu_var(i));
        let img = exp_product(&run.transform, &mu)?;
        let v = &img - &mu;
        if v.iter().any(|(k, _)| (0..2 * n).any(|j| k.get(j) > 0)) {
            return Err(KamError::InvalidModel("parameter image depends on q, p".into()));
        }
        nu.push(v);
    }
    let mut subs: Vec<Jet<C>> = (0..shape.num_vars()).map(|v| Jet::var(shape, trunc, v)).collect();
    let mut mu_star: Vec<Jet<C>> = vec![Jet::zero(shape, trunc); d];
    for _ in 0..=trunc {
        for i in 0..d {
            subs[shape.mu_var(i)] = mu_star[i].clone();
        }
        let next: Vec<Jet<C>> = nu.iter().map(|v| v.compose(&subs).map(|j| -&j)).collect::<Result<_, _>>()?;
        if next == mu_star {
            break;
        }
        mu_star = next;
    }
    let frequency = (0..n)
        .map(|k| {
            let mut w = Jet::constant(shape, trunc, alpha[k].clone());
            for (i, a) in mu_star.iter().enumerate() {
                w = &w + &a.scale(&basis[i][k]);
            }
            w
        })
        .collect();
    Ok(ExtendedReport {
        shape,
        alpha,
        basis,
        run,
        certificate,
        corrections: mu_star,
        frequency,
        frequency_through: trunc.saturating_sub(2),
    })
}

/// Largest coefficient of `ω(λ) − ∇A(x(λ))` through weighted degree
/// `through`, for a Birkhoff polynomial `a_poly` in the actions.
pub fn frequency_deviation<C: Scalar>(report: &ExtendedReport<C>, a_poly: &Jet<C>, through: u32) -> f64 {
    let sh = report.shape;
    let n = sh.pairs;
    let trunc = report.frequency.first().map(|j| j.trunc()).unwrap_or(0);
    let ideal = ActionIdeal::extended(sh, &report.basis).expect("basis came from an ideal");
    let x = ideal.x(trunc);
    let mut worst = 0.0f64;
    for k in 0..n {
        let grad = a_poly.derivative(a_poly.shape().free_var(k));
        let along = grad.compose(&x).expect("x has order 2");
        let diff = (&report.frequency[k] - &along).truncate(through);
        worst = worst.max(diff.max_abs_coeff());
    }
    worst
}
