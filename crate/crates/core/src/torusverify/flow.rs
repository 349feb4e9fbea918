use serde::{Deserialize, Serialize};

use super::TorusError;
use crate::jets::Jet;

/// A real polynomial flattened for fast evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl Poly {
    pub fn from_jet(j: &Jet<f64>) -> Self {
        let terms = j
            .iter()
            .map(|(k, &c)| {
                let f = k.exps().iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, &e)| (v, e as i32)).collect();
                (c, f)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, f)| f.iter().fold(*c, |acc, &(v, e)| acc * x[v].powi(e)))
            .sum()
    }
}

/// `H` with its vector field `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianField {
    pub pairs: usize,
    h: Poly,
    /// `∂H/∂p_k` then `−∂H/∂q_k`.
    field: Vec<Poly>,
    lipschitz_terms: Vec<(f64, u32)>,
}

impl HamiltonianField {
    pub fn new(h: &Jet<f64>) -> Result<Self, TorusError> {
        let sh = h.shape();
        let n = sh.pairs;
        if n == 0 || sh.num_vars() != 2 * n {
            return Err(TorusError::BadHamiltonian("expected a jet in canonical pairs only".into()));
        }
        if let Some((_, c)) = h.iter().find(|(_, c)| !c.is_finite()) {
            return Err(TorusError::BadHamiltonian(format!("non-finite coefficient {c}")));
        }
        let mut field = Vec::with_capacity(2 * n);
        for k in 0..n {
            field.push(Poly::from_jet(&h.derivative(sh.p(k))));
        }
        for k in 0..n {
            field.push(Poly::from_jet(&-&h.derivative(sh.q(k))));
        }
        let lipschitz_terms = h.iter().map(|(k, &c)| (c.abs(), k.degree())).collect();
        Ok(Self { pairs: n, h: Poly::from_jet(h), field, lipschitz_terms })
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        self.h.eval(x)
    }

    pub fn vector_field(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(&self.field) {
            *o = f.eval(x);
        }
    }

    /// Crude bound for the Lipschitz constant of the field on the ball of
    /// radius `rad`: `Σ |c| d(d−1) rad^{d−2}`.
    pub fn lipschitz_bound(&self, rad: f64) -> f64 {
        self.lipschitz_terms
            .iter()
            .filter(|(_, d)| *d >= 2)
            .map(|&(c, d)| c * (d * (d - 1)) as f64 * rad.powi(d as i32 - 2))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Implicit midpoint rule, order 2.
    Midpoint,
    /// Triple-jump composition of the midpoint rule, order 4.
    Yoshida4,
}

impl Scheme {
    fn substeps(&self) -> &'static [f64] {
        const W1: f64 = 1.351_207_191_959_657_8; // 1/(2 − 2^{1/3})
        const W0: f64 = -1.702_414_383_919_315_3; // −2^{1/3}/(2 − 2^{1/3})
        match self {
            Scheme::Midpoint => &[1.0],
            Scheme::Yoshida4 => &[W1, W0, W1],
        }
    }
}

const MAX_ITER: usize = 100;

/// One implicit midpoint step `x' = x + h F((x + x')/2)` by fixed-point
/// iteration. Returns `false` if the iteration does not settle.
fn midpoint_step(f: &HamiltonianField, x: &mut [f64], h: f64, mid: &mut [f64], v: &mut [f64], next: &mut [f64]) -> bool {
    f.vector_field(x, v);
    for i in 0..x.len() {
        next[i] = x[i] + h * v[i];
    }
    for _ in 0..MAX_ITER {
        for i in 0..x.len() {
            mid[i] = 0.5 * (x[i] + next[i]);
        }
        f.vector_field(mid, v);
        let mut change = 0.0f64;
        let mut size = 0.0f64;
        for i in 0..x.len() {
            let y = x[i] + h * v[i];
            change = change.max((y - next[i]).abs());
            size = size.max(y.abs());
            next[i] = y;
        }
        if !change.is_finite() {
            return false;
        }
        if change <= 4.0 * f64::EPSILON * size.max(f64::MIN_POSITIVE) {
            x.copy_from_slice(next);
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    /// States at times `0, dt, …` up to the last completed step.
    pub states: Vec<Vec<f64>>,
    /// `max |H(x_t) − H(x_0)| / |H(x_0)|` (absolute if `H(x_0) = 0`).
    pub energy_drift: f64,
    pub escaped: bool,
}

/// Integrate from `x0` for `steps` steps of size `dt`, stopping early once
/// `|x|` exceeds `escape_radius`.
pub fn integrate(
    field: &HamiltonianField,
    x0: &[f64],
    dt: f64,
    steps: usize,
    scheme: Scheme,
    escape_radius: f64,
) -> Result<Trajectory, TorusError> {
    let dim = 2 * field.pairs;
    if x0.len() != dim {
        return Err(TorusError::Dimension { expected: dim, got: x0.len() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TorusError::BadStep(dt));
    }
    let rad = x0.iter().map(|v| v * v).sum::<f64>().sqrt().max(escape_radius.min(1e6));
    let lip = field.lipschitz_bound(rad);
    if dt * lip > 1.0 {
        return Err(TorusError::StepTooLarge { dt, lipschitz: lip });
    }
    let e0 = field.energy(x0);
    let escale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    let mut x = x0.to_vec();
    let (mut mid, mut v, mut next) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    let mut drift = 0.0f64;
    let mut escaped = false;
    'outer: for _ in 0..steps {
        for &w in scheme.substeps() {
            if !midpoint_step(field, &mut x, w * dt, &mut mid, &mut v, &mut next) {
                escaped = true;
                break 'outer;
            }
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > escape_radius {
            escaped = true;
            break;
        }
        drift = drift.max((field.energy(&x) - e0).abs() / escale);
        states.push(x.clone());
    }
    Ok(Trajectory { scheme, dt, steps, states, energy_drift: drift, escaped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Shape;

    fn oscillator() -> Jet<f64> {
        Jet::from_terms(Shape::symplectic(1), 2, vec![(vec![2, 0], 0.5), (vec![0, 2], 0.5)])
    }

    #[test]
    fn harmonic_oscillator_circle() {
        let f = HamiltonianField::new(&oscillator()).unwrap();
        let t = integrate(&f, &[1.0, 0.0], 1e-3, 10_000, Scheme::Yoshida4, 10.0).unwrap();
        assert!(t.energy_drift <= 1e-10, "{}", t.energy_drift);
        // exact flow: q = cos t, p = −sin t
        let last = t.states.last().unwrap();
        let time = 10.0;
        assert!((last[0] - f64::cos(time)).abs() < 1e-10);
        assert!((last[1] + f64::sin(time)).abs() < 1e-10);
    }

    #[test]
    fn zero_hamiltonian_is_stationary() {
        let f = HamiltonianField::new(&Jet::zero(Shape::symplectic(1), 4)).unwrap();
        let t = integrate(&f, &[0.3, -0.2], 0.01, 100, Scheme::Midpoint, 10.0).unwrap();
        assert!(t.states.iter().all(|s| s == &vec![0.3, -0.2]));
        assert_eq!(t.energy_drift, 0.0);
    }

    #[test]
    fn escape_stops_early() {
        // H = p q: hyperbolic, q grows like e^t
        let h = Jet::from_terms(Shape::symplectic(1), 2, vec![(vec![1, 1], 1.0)]);
        let f = HamiltonianField::new(&h).unwrap();
        let t = integrate(&f, &[1.0, 0.0], 0.01, 10_000, Scheme::Yoshida4, 10.0).unwrap();
        assert!(t.escaped);
        assert!(t.states.len() < 1000);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let f = HamiltonianField::new(&oscillator()).unwrap();
        assert!(matches!(integrate(&f, &[1.0, 0.0], 2.0, 10, Scheme::Midpoint, 10.0), Err(TorusError::StepTooLarge { .. })));
    }
}
