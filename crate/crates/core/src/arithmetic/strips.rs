use serde::{Deserialize, Serialize};

use super::{exp_index, sigma, visit_half_space, ArithmeticError, DecaySequence, FrequencyVector, SigmaOptions};

/// The strip `M_i = {β : |(β,i)| < ρ_k a_k}`, `k = exp(i)`, around `i^⊥`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub i: Vec<i64>,
    pub k: u32,
    /// Half-width `ρ_k a_k/‖i‖`.
    pub width: f64,
    /// Proof criterion: `(1−ρ_k) a_k / 2^k < r`. When false the strip
    /// provably misses `B(α, r)`.
    pub intersects_ball: bool,
    /// Exact geometry: `(|(α,i)| − ρ_k a_k)/‖i‖ < r`.
    pub exact_intersects: bool,
}

/// Strips `M_i` for every `i` (up to sign) with `exp(i) ≤ k_max`.
pub fn strip_analysis(
    alpha: &FrequencyVector,
    a: &DecaySequence,
    rho: &DecaySequence,
    r: f64,
    k_max: u32,
    opts: SigmaOptions,
) -> Result<Vec<Strip>, ArithmeticError> {
    if !(r > 0.0) {
        return Err(ArithmeticError::InvalidInput("radius must be positive".into()));
    }
    let s = sigma(alpha, k_max, opts)?;
    let km = k_max as usize;
    let mut av = Vec::with_capacity(km + 1);
    let mut rv = Vec::with_capacity(km + 1);
    for k in 0..=km {
        let ak = a.value(k)?;
        if s.values[k] < ak {
            return Err(ArithmeticError::NotInClass { k, sigma: s.values[k], a: ak });
        }
        av.push(ak);
        rv.push(rho.value(k)?);
    }
    let mut out = visit_half_space(
        alpha.dim(),
        1i64 << k_max,
        Vec::new(),
        |mut acc: Vec<Strip>, i| {
            let k = exp_index(i, opts.norm) as usize;
            if k <= km {
                let len = i.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
                let b = rv[k] * av[k];
                let crit = (1.0 - rv[k]) * av[k] / 2f64.powi(k as i32) < r;
                let dist = (alpha.dot(i).abs() - b) / len;
                acc.push(Strip {
                    i: i.to_vec(),
                    k: k as u32,
                    width: b / len,
                    intersects_ball: crit,
                    exact_intersects: dist < r,
                });
            }
            acc
        },
        |mut x, mut y| {
            x.append(&mut y);
            x
        },
    );
    out.sort_by(|x, y| x.k.cmp(&y.k).then_with(|| x.i.cmp(&y.i)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{sample_ball, Descriptor};

    #[test]
    fn small_radius_meets_no_strip() {
        let alpha = FrequencyVector::new(vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]).unwrap();
        let k = 5;
        let a = sigma(&alpha, k, SigmaOptions::default()).unwrap().to_decay().unwrap();
        let rho = DecaySequence::from_descriptor(Descriptor::Geometric { c: 0.5, ratio: 0.5 }, k as usize).unwrap();
        let floor = (0..=k as usize)
            .map(|j| (1.0 - rho.value(j).unwrap()) * a.value(j).unwrap() / 2f64.powi(j as i32))
            .fold(f64::INFINITY, f64::min);
        let strips = strip_analysis(&alpha, &a, &rho, 0.9 * floor, k, SigmaOptions::default()).unwrap();
        assert!(!strips.is_empty());
        assert!(strips.iter().all(|s| !s.intersects_ball && !s.exact_intersects));
    }

    #[test]
    fn exact_flags_agree_with_sampling() {
        let alpha = FrequencyVector::new(vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]).unwrap();
        let k = 4;
        let a = sigma(&alpha, k, SigmaOptions::default()).unwrap().to_decay().unwrap();
        let rho = DecaySequence::from_descriptor(Descriptor::Geometric { c: 0.5, ratio: 0.5 }, k as usize).unwrap();
        let r = 0.05;
        let strips = strip_analysis(&alpha, &a, &rho, r, k, SigmaOptions::default()).unwrap();
        let mut hit = vec![false; strips.len()];
        for s in 0..20_000 {
            let x = sample_ball(alpha.components(), r, 99, s);
            for (h, st) in hit.iter_mut().zip(&strips) {
                let dot: f64 = x.iter().zip(&st.i).map(|(a, &b)| a * b as f64).sum();
                let len = st.i.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                if dot.abs() < st.width * len {
                    *h = true;
                }
            }
        }
        for (h, st) in hit.iter().zip(&strips) {
            // a sampled point inside a strip proves the intersection
            if *h {
                assert!(st.exact_intersects, "{:?}", st.i);
            }
            // the proof criterion is conservative
            if st.exact_intersects {
                assert!(st.intersects_ball, "{:?}", st.i);
            }
        }
        assert!(hit.iter().any(|h| *h));
    }

    #[test]
    fn rejects_alpha_outside_class() {
        let alpha = FrequencyVector::new(vec![1.0, 1.0]).unwrap();
        let a = DecaySequence::new(vec![0.5; 3], true).unwrap();
        assert!(matches!(
            strip_analysis(&alpha, &a, &a, 0.1, 2, SigmaOptions::default()),
            Err(ArithmeticError::NotInClass { k: 1, .. })
        ));
    }
}
