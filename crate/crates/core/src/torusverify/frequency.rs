use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::TorusError;

/// Result of locating the dominant line of one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Peak {
    /// Angular frequency (radians per unit time) and amplitude.
    Line { omega: f64, amplitude: f64 },
    /// No oscillating component.
    Degenerate,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect()
}

fn dtft_abs(z: &[Complex64], w: &[f64], omega_dt: f64) -> f64 {
    let step = Complex64::from_polar(1.0, -omega_dt);
    let mut ph = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, (zk, wk)) in z.iter().zip(w).enumerate() {
        if k % 256 == 0 {
            ph = Complex64::from_polar(1.0, -omega_dt * k as f64);
        }
        acc += zk * wk * ph;
        ph *= step;
    }
    acc.norm()
}

/// Dominant angular frequency of `z` sampled at spacing `dt`: Hann window,
/// FFT peak, quadratic interpolation on the three bins around it, then a
/// golden-section search on `|DTFT|` within one bin.
pub fn dominant_frequency(z: &[Complex64], dt: f64) -> Peak {
    let n = z.len();
    let mean = z.iter().sum::<Complex64>() / n as f64;
    let scale = z.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let centered: Vec<Complex64> = z.iter().map(|v| v - mean).collect();
    let rms = (centered.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    if !(rms > 1e-12 * scale) || !rms.is_finite() {
        return Peak::Degenerate;
    }
    // the raw signal is transformed: removing the sample mean would add a
    // spurious line at zero whose leakage biases the peak
    let w = hann(n);
    let mut buf: Vec<Complex64> = z.iter().zip(&w).map(|(v, wk)| v * wk).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|v| v.norm()).collect();
    let (kmax, _) = mag
        .iter()
        .enumerate()
        .filter(|(k, _)| *k > 1 && *k < n - 1)
        .fold((0, -1.0), |b, (k, &m)| if m > b.1 { (k, m) } else { b });
    let at = |k: isize| mag[k.rem_euclid(n as isize) as usize];
    let (a, b, c) = (at(kmax as isize - 1), at(kmax as isize), at(kmax as isize + 1));
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { (0.5 * (a - c) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let signed = if kmax > n / 2 { kmax as f64 - n as f64 } else { kmax as f64 };
    let bin = 2.0 * PI / (n as f64 * dt);
    let guess = (signed + shift) * bin;
    // golden-section refinement of the maximum of |DTFT|
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (guess - 0.5 * bin, guess + 0.5 * bin);
    let f = |om: f64| -dtft_abs(z, &w, om * dt);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if (hi - lo) <= 1e-13 * guess.abs().max(bin) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let omega = 0.5 * (lo + hi);
    let wsum: f64 = w.iter().sum();
    Peak::Line { omega, amplitude: -f(omega) / wsum }
}

/// Per-window dominant frequencies of several signals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedFrequencies {
    /// `windows × signals`; `None` for a degenerate signal.
    pub omegas: Vec<Vec<Option<f64>>>,
    pub window_len: usize,
    /// Largest relative spread `max |ν_w − ν_w'| / |ν̄|` over signals;
    /// `None` if any signal is degenerate.
    pub stability: Option<f64>,
}

pub const MIN_WINDOW: usize = 64;

pub fn frequency_analysis(signals: &[Vec<Complex64>], dt: f64, windows: usize) -> Result<WindowedFrequencies, TorusError> {
    if windows < 2 {
        return Err(TorusError::Windows { windows, len: 0 });
    }
    let len = signals.iter().map(|s| s.len()).min().unwrap_or(0) / windows;
    if len < MIN_WINDOW {
        return Err(TorusError::Windows { windows, len });
    }
    let omegas: Vec<Vec<Option<f64>>> = (0..windows)
        .map(|w| {
            signals
                .iter()
                .map(|s| match dominant_frequency(&s[w * len..(w + 1) * len], dt) {
                    Peak::Line { omega, .. } => Some(omega),
                    Peak::Degenerate => None,
                })
                .collect()
        })
        .collect();
    let mut stability = Some(0.0f64);
    for j in 0..signals.len() {
        let col: Option<Vec<f64>> = omegas.iter().map(|row| row[j]).collect();
        match (col, stability) {
            (Some(c), Some(st)) => {
                let mean = c.iter().sum::<f64>() / c.len() as f64;
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let rel = if mean != 0.0 { (hi - lo) / mean.abs() } else { f64::INFINITY };
                stability = Some(st.max(rel));
            }
            _ => stability = None,
        }
    }
    Ok(WindowedFrequencies { omegas, window_len: len, stability })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(omega: f64, amp: f64, n: usize, dt: f64) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(amp, omega * k as f64 * dt + 0.3)).collect()
    }

    #[test]
    fn pure_rotation() {
        for omega in [1.0, -2.0 * 1.618_033_988_749_895, 0.37] {
            match dominant_frequency(&tone(omega, 1.0, 4096, 0.01), 0.01) {
                Peak::Line { omega: w, amplitude } => {
                    assert!((w / omega - 1.0).abs() < 1e-6, "{w} vs {omega}");
                    assert!((amplitude - 1.0).abs() < 1e-3);
                }
                Peak::Degenerate => panic!(),
            }
        }
    }

    #[test]
    fn constant_is_degenerate() {
        let z = vec![Complex64::new(0.5, 0.1); 256];
        assert_eq!(dominant_frequency(&z, 0.1), Peak::Degenerate);
        let wf = frequency_analysis(&[z], 0.1, 4).unwrap();
        assert_eq!(wf.stability, None);
    }

    #[test]
    fn larger_amplitude_wins() {
        let a = tone(1.3, 1.0, 2048, 0.01);
        let b = tone(-4.1, 0.3, 2048, 0.01);
        let z: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        match dominant_frequency(&z, 0.01) {
            Peak::Line { omega, .. } => assert!((omega - 1.3).abs() < 1e-5),
            Peak::Degenerate => panic!(),
        }
    }

    #[test]
    fn window_preconditions() {
        let z = tone(1.0, 1.0, 200, 0.1);
        assert!(frequency_analysis(&[z.clone()], 0.1, 1).is_err());
        assert!(frequency_analysis(&[z.clone()], 0.1, 4).is_err());
        assert_eq!(frequency_analysis(&[z], 0.1, 3).unwrap().window_len, 66);
        let z = tone(1.0, 1.0, 1024, 0.1);
        let wf = frequency_analysis(&[z], 0.1, 4).unwrap();
        assert!(wf.stability.unwrap() < 1e-8);
    }
}
