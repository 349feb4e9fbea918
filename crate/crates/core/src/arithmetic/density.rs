use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exp_index, sigma, visit_half_space, ArithmeticError, DecaySequence, FrequencyVector, SigmaOptions};
use crate::jets::{Jet, JetJson, Shape};

/// A smooth map `ℝ^d → ℝⁿ` that can be evaluated at sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    Identity,
    /// `x ↦ Mx + c`, `M` given by rows.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    /// One polynomial jet in `d` free variables per output component.
    Polynomial { components: Vec<JetJson> },
}

impl MapDescriptor {
    /// `f(x)`.
    pub fn image(&self, x: &[f64]) -> Result<Vec<f64>, ArithmeticError> {
        Ok(CompiledMap::new(self, x.len())?.eval(x))
    }
}

enum CompiledMap {
    Identity,
    Affine(Vec<Vec<f64>>, Vec<f64>),
    Polynomial(Vec<Jet<f64>>),
}

impl CompiledMap {
    fn new(desc: &MapDescriptor, d: usize) -> Result<Self, ArithmeticError> {
        let bad = |m: &str| ArithmeticError::InvalidMap(m.to_string());
        match desc {
            MapDescriptor::Identity => Ok(CompiledMap::Identity),
            MapDescriptor::Affine { matrix, offset } => {
                if matrix.is_empty() || matrix.len() != offset.len() || matrix.iter().any(|r| r.len() != d) {
                    return Err(bad("affine map dimensions"));
                }
                Ok(CompiledMap::Affine(matrix.clone(), offset.clone()))
            }
            MapDescriptor::Polynomial { components } => {
                if components.is_empty() {
                    return Err(bad("polynomial map without components"));
                }
                let jets = components
                    .iter()
                    .map(|c| c.to_jet::<f64>().map_err(|e| bad(&e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                if jets.iter().any(|j| j.shape() != Shape::free(d)) {
                    return Err(bad("polynomial components must use exactly d free variables"));
                }
                Ok(CompiledMap::Polynomial(jets))
            }
        }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            CompiledMap::Identity => x.to_vec(),
            CompiledMap::Affine(m, c) => {
                m.iter().zip(c).map(|(row, c)| c + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).collect()
            }
            CompiledMap::Polynomial(js) => js.iter().map(|j| j.eval(x)).collect(),
        }
    }

    /// A certified bound on `‖f(x) − f(x0)‖` over `‖x − x0‖ ≤ r`.
    fn image_radius(&self, x0: &[f64], r: f64) -> f64 {
        match self {
            CompiledMap::Identity => r,
            CompiledMap::Affine(m, _) => {
                let fro: f64 = m.iter().flat_map(|row| row.iter().map(|a| a * a)).sum::<f64>().sqrt();
                fro * r
            }
            CompiledMap::Polynomial(js) => {
                // expanding Π(x0+h)^e gives nonnegative weights in |x0|, |h|
                let sq: f64 = js
                    .iter()
                    .map(|j| {
                        let b: f64 = j
                            .iter()
                            .map(|(k, c)| {
                                let mut far = 1.0;
                                let mut near = 1.0;
                                for (v, &e) in k.exps().iter().enumerate() {
                                    far *= (x0[v].abs() + r).powi(e as i32);
                                    near *= x0[v].abs().powi(e as i32);
                                }
                                c.abs() * (far - near)
                            })
                            .sum();
                        b * b
                    })
                    .sum();
                sq.sqrt() * (1.0 + 1e-12)
            }
        }
    }

    fn out_dim(&self, d: usize) -> usize {
        match self {
            CompiledMap::Identity => d,
            CompiledMap::Affine(m, _) => m.len(),
            CompiledMap::Polynomial(js) => js.len(),
        }
    }
}

/// Sample `idx` of the uniform distribution on the ball `B(center, r)`,
/// drawn from its own counter-addressed stream.
pub fn sample_ball(center: &[f64], r: f64, seed: u64, idx: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx);
    let d = center.len();
    let g: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.gen();
    let rad = r * u.powf(1.0 / d as f64);
    center.iter().zip(&g).map(|(c, x)| c + rad * x / norm).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub map: MapDescriptor,
    pub x0: Vec<f64>,
    pub a: DecaySequence,
    pub rho: DecaySequence,
    pub r: f64,
    pub samples: u64,
    pub k_max: u32,
    pub seed: u64,
    #[serde(default)]
    pub sigma: SigmaOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub radius: f64,
    pub sample_count: u64,
    pub k_max: u32,
    pub fraction_in_class: f64,
    pub rng_seed: u64,
    pub passing: u64,
    /// Index vectors that could exclude some point of the image ball.
    pub candidates: usize,
}

/// Monte-Carlo fraction of `x ∈ B(x0, r)` with `f(x) ∈ D_{ρa}` (decided up
/// to `k_max`).
///
/// For each `i` with `exp(i) ≤ k_max` the class condition reads
/// `|(y,i)| ≥ max_{exp(i) ≤ k ≤ k_max} ρ_k a_k`, and only those `i` whose
/// threshold reaches the image ball need to be tested per sample.
pub fn density_estimate(spec: &DensitySpec) -> Result<DensityReport, ArithmeticError> {
    if spec.samples == 0 {
        return Err(ArithmeticError::ZeroSamples);
    }
    if !(spec.r > 0.0) {
        return Err(ArithmeticError::InvalidInput("radius must be positive".into()));
    }
    let d = spec.x0.len();
    if d == 0 {
        return Err(ArithmeticError::DimensionZero);
    }
    let map = CompiledMap::new(&spec.map, d)?;
    let n = map.out_dim(d);
    let center = map.eval(&spec.x0);
    FrequencyVector::new(center.clone())?;
    let km = spec.k_max as usize;
    let b = spec.rho.product(&spec.a)?;
    if b.len() <= km {
        return Err(ArithmeticError::TooShort { have: b.len(), need: km });
    }
    // suffix maxima of the thresholds
    let mut thr = vec![0.0; km + 1];
    let mut m = 0.0f64;
    for k in (0..=km).rev() {
        m = m.max(b.value(k)?);
        thr[k] = m;
    }
    let radius = map.image_radius(&spec.x0, spec.r);
    let bound = 1i64 << spec.k_max;
    let norm = spec.sigma.norm;
    let mut cands: Vec<(Vec<f64>, f64, f64)> = visit_half_space(
        n,
        bound,
        Vec::new(),
        |mut acc: Vec<(Vec<f64>, f64, f64)>, i| {
            let k = exp_index(i, norm) as usize;
            if k <= km {
                let dot: f64 = center.iter().zip(i).map(|(a, &x)| a * x as f64).sum();
                let len = i.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
                let slack = 1e-12 * (1.0 + dot.abs() + len);
                if dot.abs() - radius * len < thr[k] + slack {
                    acc.push((i.iter().map(|&x| x as f64).collect(), thr[k], dot.abs() - thr[k]));
                }
            }
            acc
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    // most constraining first so that failing samples exit early
    cands.sort_by(|x, y| x.2.partial_cmp(&y.2).unwrap().then_with(|| x.0.partial_cmp(&y.0).unwrap()));
    let passing: u64 = (0..spec.samples)
        .into_par_iter()
        .map(|s| {
            let x = sample_ball(&spec.x0, spec.r, spec.seed, s);
            let y = map.eval(&x);
            let ok = cands.iter().all(|(i, t, _)| {
                let dot: f64 = y.iter().zip(i).map(|(a, b)| a * b).sum();
                dot.abs() >= *t
            });
            ok as u64
        })
        .sum();
    Ok(DensityReport {
        radius: spec.r,
        sample_count: spec.samples,
        k_max: spec.k_max,
        fraction_in_class: passing as f64 / spec.samples as f64,
        rng_seed: spec.seed,
        passing,
        candidates: cands.len(),
    })
}

/// Direct class test of a single point by computing its `σ`.
pub fn in_class_point(y: &[f64], target: &DecaySequence, k_max: u32, opts: SigmaOptions) -> Result<bool, ArithmeticError> {
    let s = sigma(&FrequencyVector::new(y.to_vec())?, k_max, opts)?;
    for (k, v) in s.values.iter().enumerate() {
        if *v < target.value(k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Descriptor;

    fn golden() -> Vec<f64> {
        vec![1.0, (1.0 + 5f64.sqrt()) / 2.0]
    }

    fn sigma_seq(alpha: &[f64], k: u32) -> DecaySequence {
        sigma(&FrequencyVector::new(alpha.to_vec()).unwrap(), k, SigmaOptions::default())
            .unwrap()
            .to_decay()
            .unwrap()
    }

    fn spec(r: f64, samples: u64, rho: DecaySequence, a: DecaySequence, k_max: u32) -> DensitySpec {
        DensitySpec {
            map: MapDescriptor::Identity,
            x0: golden(),
            a,
            rho,
            r,
            samples,
            k_max,
            seed: 7,
            sigma: SigmaOptions::default(),
        }
    }

    #[test]
    fn samples_are_uniform_in_the_ball() {
        let c = [0.5, -1.0];
        let n = 20_000;
        let mut inner = 0;
        for s in 0..n {
            let x = sample_ball(&c, 2.0, 3, s);
            let d = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
            assert!(d <= 2.0);
            if d <= 1.0 {
                inner += 1;
            }
        }
        // area ratio 1/4, three-sigma band
        let f = inner as f64 / n as f64;
        assert!((f - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / n as f64).sqrt());
        assert_eq!(sample_ball(&c, 2.0, 3, 17), sample_ball(&c, 2.0, 3, 17));
    }

    #[test]
    fn center_passes_and_huge_thresholds_fail() {
        let k = 6;
        let a = sigma_seq(&golden(), k);
        let one = DecaySequence::from_descriptor(Descriptor::Constant { c: 1.0 }, k as usize).unwrap();
        assert!(in_class_point(&golden(), &a, k, SigmaOptions::default()).unwrap());
        let r = density_estimate(&spec(0.05, 2000, one.clone(), a, k)).unwrap();
        assert!(r.fraction_in_class <= 1.0);
        let huge = DecaySequence::from_descriptor(Descriptor::Constant { c: 1e9 }, k as usize).unwrap();
        let r = density_estimate(&spec(0.05, 500, one.clone(), huge, k)).unwrap();
        assert_eq!(r.fraction_in_class, 0.0);
        assert!(density_estimate(&spec(0.05, 0, one.clone(), sigma_seq(&golden(), k), k)).is_err());
    }

    #[test]
    fn prefiltered_count_matches_direct_membership() {
        let k = 5;
        let a = sigma_seq(&golden(), k);
        let rho = DecaySequence::from_descriptor(Descriptor::Geometric { c: 0.5, ratio: 0.25 }, k as usize).unwrap();
        let target = rho.product(&a).unwrap();
        let sp = spec(0.02, 400, rho, a, k);
        let rep = density_estimate(&sp).unwrap();
        let direct = (0..sp.samples)
            .filter(|&s| {
                let x = sample_ball(&sp.x0, sp.r, sp.seed, s);
                in_class_point(&x, &target, k, SigmaOptions::default()).unwrap()
            })
            .count() as u64;
        assert_eq!(rep.passing, direct);
    }

    #[test]
    fn affine_and_polynomial_maps() {
        let k = 4;
        let a = sigma_seq(&golden(), k);
        let rho = DecaySequence::from_descriptor(Descriptor::Geometric { c: 0.5, ratio: 0.25 }, k as usize).unwrap();
        let mut sp = spec(0.01, 300, rho, a, k);
        let base = density_estimate(&sp).unwrap();
        sp.map = MapDescriptor::Affine { matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]], offset: vec![0.0, 0.0] };
        assert_eq!(density_estimate(&sp).unwrap().passing, base.passing);
        let sh = Shape::free(2);
        let comps = vec![
            JetJson::from_jet(&Jet::<f64>::var(sh, 1, 0)),
            JetJson::from_jet(&Jet::<f64>::var(sh, 1, 1)),
        ];
        sp.map = MapDescriptor::Polynomial { components: comps };
        assert_eq!(density_estimate(&sp).unwrap().passing, base.passing);
        sp.map = MapDescriptor::Affine { matrix: vec![vec![1.0]], offset: vec![0.0] };
        assert!(matches!(density_estimate(&sp), Err(ArithmeticError::InvalidMap(_))));
    }
}
