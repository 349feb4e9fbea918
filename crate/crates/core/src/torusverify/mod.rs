//! Numerical look at the invariant tori near an elliptic point: integrate
//! the flow with a symplectic scheme, read off windowed frequencies of
//! `q_j + i p_j`, and count torus-like orbits in small balls.
//!
//! Frequency convention: for `H = Σ α_j (p_j² + q_j²)` the signal
//! `q_j + i p_j` turns at angular frequency `−2α_j`; reported frequencies are
//! signed angular frequencies of these signals.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arithmetic::sample_ball;
use crate::jets::Jet;

mod flow;
mod frequency;

pub use flow::{integrate, HamiltonianField, Poly, Scheme, Trajectory};
pub use frequency::{dominant_frequency, frequency_analysis, Peak, WindowedFrequencies, MIN_WINDOW};

pub const CONVENTION: &str = "signed angular frequency of q_j + i p_j; H = sum a_j (p_j^2 + q_j^2) gives -2 a_j";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("invalid Hamiltonian: {0}")]
    BadHamiltonian(String),
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid step size {0}")]
    BadStep(f64),
    #[error("step {dt} too large for Lipschitz bound {lipschitz:.3e}")]
    StepTooLarge { dt: f64, lipschitz: f64 },
    #[error("need at least 2 windows of {min} samples, got {windows} windows of {len}", min = MIN_WINDOW)]
    Windows { windows: usize, len: usize },
    #[error("sample count must be positive")]
    NoSamples,
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Relative energy drift.
    pub energy: f64,
    /// Relative spread of window frequencies.
    pub frequency: f64,
    /// Escape radius as a multiple of the scan radius.
    pub escape_factor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { energy: 1e-6, frequency: 1e-4, escape_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusOptions {
    pub dt: f64,
    pub steps: usize,
    pub windows: usize,
    pub scheme: Scheme,
    pub thresholds: Thresholds,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self { dt: 0.01, steps: 1 << 15, windows: 4, scheme: Scheme::Yoshida4, thresholds: Thresholds::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    TorusLike,
    ChaoticOrEscaping,
    Undecided,
}

impl OrbitClass {
    pub fn label(&self) -> &'static str {
        match self {
            OrbitClass::TorusLike => "torus_like",
            OrbitClass::ChaoticOrEscaping => "chaotic_or_escaping",
            OrbitClass::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub x0: Vec<f64>,
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub energy_drift: f64,
    pub escaped: bool,
    /// `windows × pairs`; `None` for a degenerate signal.
    pub frequencies: Vec<Vec<Option<f64>>>,
    pub stability: Option<f64>,
    pub class: OrbitClass,
}

impl OrbitRecord {
    /// Window average per pair.
    pub fn mean_frequencies(&self) -> Option<Vec<f64>> {
        let n = self.frequencies.first()?.len();
        (0..n)
            .map(|j| {
                let col: Option<Vec<f64>> = self.frequencies.iter().map(|w| w[j]).collect();
                col.map(|c| c.iter().sum::<f64>() / c.len() as f64)
            })
            .collect()
    }
}

/// Torus-like iff bounded, energy drift below threshold and frequencies
/// stable across windows. Escaping or unstable orbits are chaotic;
/// degenerate signals or excessive drift leave the orbit undecided.
pub fn classify(escaped: bool, energy_drift: f64, stability: Option<f64>, th: &Thresholds) -> OrbitClass {
    if escaped {
        return OrbitClass::ChaoticOrEscaping;
    }
    let Some(st) = stability else { return OrbitClass::Undecided };
    if !(energy_drift < th.energy) {
        return OrbitClass::Undecided;
    }
    if st < th.frequency {
        OrbitClass::TorusLike
    } else {
        OrbitClass::ChaoticOrEscaping
    }
}

/// Integrate one orbit and classify it. `r` sets the escape radius.
pub fn analyze_orbit(field: &HamiltonianField, x0: &[f64], r: f64, opts: &TorusOptions) -> Result<OrbitRecord, TorusError> {
    let n = field.pairs;
    let traj = integrate(field, x0, opts.dt, opts.steps, opts.scheme, opts.thresholds.escape_factor * r)?;
    let (frequencies, stability) = if traj.escaped {
        (Vec::new(), None)
    } else {
        let signals: Vec<Vec<Complex64>> =
            (0..n).map(|j| traj.states.iter().map(|s| Complex64::new(s[j], s[n + j])).collect()).collect();
        let wf = frequency_analysis(&signals, opts.dt, opts.windows)?;
        (wf.omegas, wf.stability)
    };
    let class = classify(traj.escaped, traj.energy_drift, stability, &opts.thresholds);
    Ok(OrbitRecord {
        x0: x0.to_vec(),
        dt: opts.dt,
        steps: opts.steps,
        scheme: opts.scheme,
        energy_drift: traj.energy_drift,
        escaped: traj.escaped,
        frequencies,
        stability,
        class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub r: f64,
    pub samples: usize,
    pub seed: u64,
    pub fraction: f64,
    /// Binomial standard error `√(f(1−f)/samples)`.
    pub std_error: f64,
    pub torus_like: usize,
    pub chaotic_or_escaping: usize,
    pub undecided: usize,
    pub options: TorusOptions,
    pub convention: String,
    pub records: Vec<OrbitRecord>,
}

/// Classify `samples` uniform initial points of `B(0, r)` in parallel.
pub fn torus_scan(h: &Jet<f64>, r: f64, samples: usize, seed: u64, opts: &TorusOptions) -> Result<ScanReport, TorusError> {
    if samples == 0 {
        return Err(TorusError::NoSamples);
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(TorusError::BadRadius(r));
    }
    if !h.is_zero() && h.ord() < 2 {
        return Err(TorusError::BadHamiltonian("terms below degree 2; the origin is not an equilibrium".into()));
    }
    let field = HamiltonianField::new(h)?;
    let origin = vec![0.0; 2 * field.pairs];
    let records: Vec<OrbitRecord> = (0..samples as u64)
        .into_par_iter()
        .map(|i| analyze_orbit(&field, &sample_ball(&origin, r, seed, i), r, opts))
        .collect::<Result<_, _>>()?;
    let count = |c: OrbitClass| records.iter().filter(|o| o.class == c).count();
    let torus_like = count(OrbitClass::TorusLike);
    let fraction = torus_like as f64 / samples as f64;
    Ok(ScanReport {
        r,
        samples,
        seed,
        fraction,
        std_error: (fraction * (1.0 - fraction) / samples as f64).sqrt(),
        torus_like,
        chaotic_or_escaping: count(OrbitClass::ChaoticOrEscaping),
        undecided: count(OrbitClass::Undecided),
        options: *opts,
        convention: CONVENTION.to_string(),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendStep {
    pub from_r: f64,
    pub to_r: f64,
    pub delta: f64,
    /// `2√(σ_a² + σ_b²)`.
    pub tolerance: f64,
    pub ok: bool,
}

/// Check that fractions do not drop by more than two combined binomial
/// standard errors as `r` shrinks. Reports are taken in the given order,
/// which should be decreasing `r`.
pub fn fraction_trend(reports: &[ScanReport]) -> Vec<TrendStep> {
    reports
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let tolerance = 2.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            let delta = b.fraction - a.fraction;
            TrendStep { from_r: a.r, to_r: b.r, delta, tolerance, ok: delta >= -tolerance }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Shape;

    fn integrable(trunc: u32) -> Jet<f64> {
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        Jet::from_terms(
            Shape::symplectic(2),
            trunc,
            vec![(vec![2, 0, 0, 0], 1.0), (vec![0, 0, 2, 0], 1.0), (vec![0, 2, 0, 0], phi), (vec![0, 0, 0, 2], phi)],
        )
    }

    #[test]
    fn linear_flow_frequencies() {
        let field = HamiltonianField::new(&integrable(2)).unwrap();
        let opts = TorusOptions { steps: 1 << 13, ..Default::default() };
        let rec = analyze_orbit(&field, &[0.1, 0.05, -0.02, 0.07], 0.2, &opts).unwrap();
        assert_eq!(rec.class, OrbitClass::TorusLike);
        let w = rec.mean_frequencies().unwrap();
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        assert!((w[0] + 2.0).abs() < 1e-6, "{w:?}");
        assert!((w[1] / w[0] - phi).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn classification_rules() {
        let th = Thresholds::default();
        assert_eq!(classify(true, 0.0, Some(0.0), &th), OrbitClass::ChaoticOrEscaping);
        assert_eq!(classify(false, 0.0, None, &th), OrbitClass::Undecided);
        assert_eq!(classify(false, 1e-3, Some(0.0), &th), OrbitClass::Undecided);
        assert_eq!(classify(false, 0.0, Some(1e-2), &th), OrbitClass::ChaoticOrEscaping);
        assert_eq!(classify(false, 1e-9, Some(1e-6), &th), OrbitClass::TorusLike);
    }

    #[test]
    fn scan_preconditions_and_determinism() {
        let h = integrable(2);
        let opts = TorusOptions { steps: 1 << 10, ..Default::default() };
        assert_eq!(torus_scan(&h, 0.1, 0, 1, &opts), Err(TorusError::NoSamples));
        let a = torus_scan(&h, 0.1, 8, 7, &opts).unwrap();
        let b = torus_scan(&h, 0.1, 8, 7, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fraction, 1.0);
    }

    #[test]
    fn hyperbolic_point_escapes() {
        let h = Jet::from_terms(Shape::symplectic(1), 2, vec![(vec![1, 1], 1.0)]);
        let opts = TorusOptions { steps: 1 << 12, ..Default::default() };
        let rep = torus_scan(&h, 0.1, 10, 3, &opts).unwrap();
        assert!(rep.fraction < 1.0);
    }

    #[test]
    fn trend_tolerance() {
        let mk = |r: f64, f: f64| ScanReport {
            r,
            samples: 100,
            seed: 0,
            fraction: f,
            std_error: (f * (1.0 - f) / 100.0f64).sqrt(),
            torus_like: 0,
            chaotic_or_escaping: 0,
            undecided: 0,
            options: TorusOptions::default(),
            convention: CONVENTION.into(),
            records: vec![],
        };
        let t = fraction_trend(&[mk(0.5, 0.8), mk(0.25, 0.78), mk(0.1, 0.5)]);
        assert!(t[0].ok);
        assert!(!t[1].ok);
    }
}
