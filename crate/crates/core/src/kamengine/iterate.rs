use serde::{Deserialize, Serialize};

use super::ideal::{chop, ActionIdeal, IdealCertificate};
use super::quasi::hadamard_quasi_inverse;
use super::KamError;
use crate::jets::Jet;
use crate::poisson::{exp_product, lie_exp, HamiltonianDerivation};
use crate::scalar::Scalar;

/// UV cutoff of the quasi-inverse at stage `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Solve weighted degrees `≤ base + n`.
    Linear { base: u32 },
    /// No cutoff below the jet truncation.
    Full,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Linear { base: 3 }
    }
}

impl Schedule {
    pub fn cutoff(&self, stage: usize, trunc: u32) -> u32 {
        match *self {
            Schedule::Linear { base } => (base + stage as u32).min(trunc),
            Schedule::Full => trunc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KamProblem<C: Scalar> {
    pub alpha: Vec<C>,
    /// The model `a`, e.g. `Σ α_i p_i q_i`.
    pub model: Jet<C>,
    pub perturbation: Jet<C>,
    pub ideal: ActionIdeal<C>,
    pub max_stage: usize,
    pub schedule: Schedule,
    pub divisor_floor: f64,
    /// Generators at stage `n` must have order `≥ n − k_offset`.
    pub k_offset: u32,
    pub norm_grid: Vec<f64>,
}

impl<C: Scalar> KamProblem<C> {
    pub fn new(alpha: Vec<C>, model: Jet<C>, perturbation: Jet<C>, ideal: ActionIdeal<C>) -> Self {
        let trunc = model.trunc();
        Self {
            alpha,
            model,
            perturbation,
            ideal,
            max_stage: trunc as usize + 2,
            schedule: Schedule::default(),
            divisor_floor: 1e-12,
            k_offset: 0,
            norm_grid: vec![0.1, 0.25, 0.5],
        }
    }

    pub fn trunc(&self) -> u32 {
        self.model.trunc().min(self.perturbation.trunc())
    }

    fn validate(&self) -> Result<(), KamError> {
        let sh = self.model.shape();
        if sh != self.perturbation.shape() || sh != self.ideal.shape() {
            return Err(KamError::InvalidModel("model, perturbation and ideal live on different shapes".into()));
        }
        if self.alpha.len() != sh.pairs {
            return Err(KamError::InvalidModel(format!("{} frequencies for {} pairs", self.alpha.len(), sh.pairs)));
        }
        if !self.perturbation.is_zero() && self.perturbation.ord() < 3 {
            return Err(KamError::InvalidModel(format!(
                "perturbation has order {}, needs at least 3",
                self.perturbation.ord()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLedger {
    pub s: Vec<f64>,
    pub b: Vec<f64>,
    /// Non-`F` part of `b_n`.
    pub b_bar: Vec<f64>,
    /// Lowest-degree homogeneous piece of the non-`F` part.
    pub b_bar_lowest: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KamState<C: Scalar> {
    pub stage: usize,
    pub cutoff: u32,
    pub a: Jet<C>,
    pub b: Jet<C>,
    pub alpha: Jet<C>,
    pub c: Jet<C>,
    pub u: HamiltonianDerivation<C>,
    pub ord_b: u32,
    pub min_divisor: f64,
    pub ledger: NormLedger,
    pub generator_order_ok: bool,
}

/// One line of the JSON trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: usize,
    pub cutoff: u32,
    pub ord_b: u32,
    pub b_terms: usize,
    pub alpha_terms: usize,
    pub c_terms: usize,
    pub u_terms: usize,
    pub min_divisor: Option<f64>,
    pub norms: NormLedger,
    pub generator_order_ok: bool,
}

impl<C: Scalar> KamState<C> {
    pub fn summary(&self) -> StageSummary {
        StageSummary {
            stage: self.stage,
            cutoff: self.cutoff,
            ord_b: self.ord_b,
            b_terms: self.b.len(),
            alpha_terms: self.alpha.len(),
            c_terms: self.c.len(),
            u_terms: self.u.generator.len() + self.u.mu_coeffs.iter().map(|a| a.len()).sum::<usize>(),
            min_divisor: self.min_divisor.is_finite().then_some(self.min_divisor),
            norms: self.ledger.clone(),
            generator_order_ok: self.generator_order_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KamRun<C: Scalar> {
    pub trace: Vec<KamState<C>>,
    /// `[−u_0, −u_1, …]`: `exp_product(transform, a + b)` is the final
    /// `a_n + b_n`.
    pub transform: Vec<HamiltonianDerivation<C>>,
    pub final_model: Jet<C>,
    pub remainder: Jet<C>,
    pub converged: bool,
}

impl<C: Scalar> KamRun<C> {
    pub fn final_state(&self) -> &KamState<C> {
        self.trace.last().expect("a run has at least one stage")
    }

    /// Accumulated `F`-part `Σ α_n`.
    pub fn absorbed(&self, model: &Jet<C>) -> Jet<C> {
        &self.final_model - model
    }
}

/// The four-term recurrence
///
/// ```text
/// u_n       = j_n(Σ_{i<n} α_i) b̄_n
/// α_n + c_n = b_n − u_n(a_n)
/// a_{n+1}   = a_n + α_n
/// b_{n+1}   = e^{−u_n}(a_n + b_n) − a_{n+1}
/// ```
///
/// run until `b_{n+1} = 0` or `max_stage`. The jets keep their truncation
/// throughout; the restriction at stage `n` is the UV cutoff of `j_n`.
pub fn kam_iterate<C: Scalar>(problem: &KamProblem<C>) -> Result<KamRun<C>, KamError> {
    problem.validate()?;
    let trunc = problem.trunc();
    let sh = problem.model.shape();
    let ideal = &problem.ideal;
    let scale = problem.model.max_abs_coeff().max(problem.perturbation.max_abs_coeff());
    let mut a_n = problem.model.with_trunc(trunc);
    let mut b_n = chop(&problem.perturbation.with_trunc(trunc), scale);
    let mut acc = Jet::zero(sh, trunc);
    let mut trace = Vec::new();
    let mut transform = Vec::new();
    for n in 0..=problem.max_stage {
        let cutoff = problem.schedule.cutoff(n, trunc);
        let qi = hadamard_quasi_inverse(
            &problem.alpha,
            ideal,
            &a_n,
            &acc,
            &b_n,
            cutoff,
            problem.divisor_floor,
        )?;
        let u = qi.u;
        let resid = chop(&(&b_n - &u.apply(&a_n)?), scale);
        let dec = ideal.decompose(&resid);
        let alpha_n = chop(&dec.f, scale);
        let c_n = chop(&dec.non_f(), scale);
        let a_next = &a_n + &alpha_n;
        let moved = lie_exp(&u.neg(), &(&a_n + &b_n))?;
        let b_next = chop(&(&moved - &a_next), scale);

        let bbar = chop(&ideal.decompose(&b_n).non_f(), scale);
        let lowest = bbar.homogeneous(bbar.ord());
        let ledger = NormLedger {
            s: problem.norm_grid.clone(),
            b: problem.norm_grid.iter().map(|&s| b_n.l1_norm(s)).collect(),
            b_bar: problem.norm_grid.iter().map(|&s| bbar.l1_norm(s)).collect(),
            b_bar_lowest: problem.norm_grid.iter().map(|&s| lowest.l1_norm(s)).collect(),
            u: problem.norm_grid.iter().map(|&s| u.generator.l1_norm(s)).collect(),
        };
        let need = (n as u32).saturating_sub(problem.k_offset);
        let ord_b = b_n.ord();
        trace.push(KamState {
            stage: n,
            cutoff,
            a: a_n.clone(),
            b: b_n.clone(),
            alpha: alpha_n.clone(),
            c: c_n,
            u: u.clone(),
            ord_b,
            min_divisor: qi.min_divisor,
            ledger,
            generator_order_ok: u.generator.is_zero() || u.generator.ord() >= need,
        });
        transform.push(u.neg());
        acc = &acc + &alpha_n;
        if b_next.is_zero() {
            return Ok(KamRun { trace, transform, final_model: a_next, remainder: b_next, converged: true });
        }
        if b_next.ord() <= ord_b {
            return Err(KamError::OrderNotIncreasing { stage: n, before: ord_b, after: b_next.ord() });
        }
        a_n = a_next;
        b_n = b_next;
    }
    Ok(KamRun { trace, transform, final_model: a_n, remainder: b_n, converged: false })
}

/// Recompute `exp_product(transform, a + b) − a` from scratch and certify
/// that it lies in `F`.
pub fn verify_conjugacy<C: Scalar>(problem: &KamProblem<C>, run: &KamRun<C>) -> Result<IdealCertificate, KamError> {
    let trunc = problem.trunc();
    let h = &problem.model.with_trunc(trunc) + &problem.perturbation.with_trunc(trunc);
    let moved = exp_product(&run.transform, &h)?;
    let diff = &moved - &problem.model.with_trunc(trunc);
    let scale = h.max_abs_coeff();
    problem.ideal.certify(&diff, trunc, scale)
}
