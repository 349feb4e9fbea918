use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ArithmeticError, DecaySequence, FrequencyVector};
use crate::scalar::QSqrt5;

/// Norm on integer index vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexNorm {
    #[default]
    Euclidean,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaOptions {
    pub norm: IndexNorm,
    /// Largest number of index vectors the enumeration may visit.
    pub cap: u128,
}

impl Default for SigmaOptions {
    fn default() -> Self {
        Self { norm: IndexNorm::Euclidean, cap: 200_000_000 }
    }
}

/// `σ(α)_k` for `k = 0..=k_max` with a minimizing index vector for each `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSequence<C> {
    pub values: Vec<C>,
    pub witnesses: Vec<Vec<i64>>,
    pub norm: IndexNorm,
}

impl SigmaSequence<f64> {
    /// The sequence as a monotone [`DecaySequence`]; fails on exact resonances.
    pub fn to_decay(&self) -> Result<DecaySequence, ArithmeticError> {
        DecaySequence::new(self.values.clone(), true)
    }
}

/// `exp(i)`: the smallest `k ≥ 0` with `‖i‖ ≤ 2^k`.
pub fn exp_index(i: &[i64], norm: IndexNorm) -> u32 {
    match norm {
        IndexNorm::Euclidean => {
            let r2: u128 = i.iter().map(|&x| (x as i128 * x as i128) as u128).sum();
            let mut k = 0;
            while r2 > 1u128 << (2 * k) {
                k += 1;
            }
            k
        }
        IndexNorm::Sup => {
            let m = i.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0);
            let mut k = 0;
            while m > 1u64 << k {
                k += 1;
            }
            k
        }
    }
}

fn budget(n: usize, k_max: u32, cap: u128) -> Result<i64, ArithmeticError> {
    if k_max > 40 {
        return Err(ArithmeticError::BudgetExceeded { estimate: u128::MAX, cap });
    }
    let b = 1i64 << k_max;
    let side = 2 * b as u128 + 1;
    let mut est: u128 = 1;
    for _ in 0..n {
        est = est.saturating_mul(side);
    }
    let est = est / 2;
    if est > cap {
        return Err(ArithmeticError::BudgetExceeded { estimate: est, cap });
    }
    Ok(b)
}

/// Visit one representative of every `±i` pair in the box `|i_j| ≤ bound`,
/// `i ≠ 0` (first nonzero component positive), in parallel blocks.
///
/// `fold` accumulates into a per-block state, `merge` combines states.
pub fn visit_half_space<S, F, M>(n: usize, bound: i64, init: S, fold: F, merge: M) -> S
where
    S: Clone + Send + Sync,
    F: Fn(S, &[i64]) -> S + Sync,
    M: Fn(S, S) -> S + Sync + Send,
{
    let blocks: Vec<(usize, i64)> = (0..n).flat_map(|p| (1..=bound).map(move |v| (p, v))).collect();
    blocks
        .into_par_iter()
        .map(|(p, v)| {
            let mut i = vec![0i64; n];
            i[p] = v;
            for x in i.iter_mut().skip(p + 1) {
                *x = -bound;
            }
            let mut st = init.clone();
            loop {
                st = fold(st, &i);
                // odometer over the tail coordinates
                let mut j = n;
                loop {
                    if j == p + 1 {
                        return st;
                    }
                    j -= 1;
                    if i[j] < bound {
                        i[j] += 1;
                        break;
                    }
                    i[j] = -bound;
                }
            }
        })
        .reduce(|| init.clone(), &merge)
}

type Best<V> = Vec<Option<(V, Vec<i64>)>>;

fn sigma_core<V, F, L>(
    n: usize,
    k_max: u32,
    opts: SigmaOptions,
    value: F,
    less: L,
) -> Result<Vec<(V, Vec<i64>)>, ArithmeticError>
where
    V: Clone + Send + Sync,
    F: Fn(&[i64]) -> Result<V, ArithmeticError> + Sync,
    L: Fn(&V, &V) -> bool + Sync + Send,
{
    if n == 0 {
        return Err(ArithmeticError::DimensionZero);
    }
    let bound = budget(n, k_max, opts.cap)?;
    let levels = k_max as usize + 1;
    let better = |cand: &(V, Vec<i64>), cur: &Option<(V, Vec<i64>)>| match cur {
        None => true,
        Some(c) => less(&cand.0, &c.0) || (!less(&c.0, &cand.0) && cand.1 < c.1),
    };
    let init: Result<Best<V>, ArithmeticError> = Ok(vec![None; levels]);
    let per_level = visit_half_space(
        n,
        bound,
        init,
        |st, i| {
            let mut st = st?;
            let k = exp_index(i, opts.norm) as usize;
            if k < levels {
                let cand = (value(i)?, i.to_vec());
                if better(&cand, &st[k]) {
                    st[k] = Some(cand);
                }
            }
            Ok(st)
        },
        |a, b| {
            let (mut a, b) = (a?, b?);
            for (x, y) in a.iter_mut().zip(b) {
                if let Some(y) = y {
                    if better(&y, x) {
                        *x = Some(y);
                    }
                }
            }
            Ok(a)
        },
    )?;
    // σ_k is the minimum over all levels ≤ k
    let mut out: Vec<(V, Vec<i64>)> = Vec::with_capacity(levels);
    for lvl in per_level {
        let lvl = lvl.expect("every level holds a unit vector or a shorter one");
        match out.last() {
            Some(prev) if !better(&lvl, &Some(prev.clone())) => out.push(prev.clone()),
            _ => out.push(lvl),
        }
    }
    Ok(out)
}

/// `σ(α)_k = min{|(α,i)| : i ≠ 0, ‖i‖ ≤ 2^k}` in double precision.
pub fn sigma(alpha: &FrequencyVector, k_max: u32, opts: SigmaOptions) -> Result<SigmaSequence<f64>, ArithmeticError> {
    let res = sigma_core(alpha.dim(), k_max, opts, |i| Ok(alpha.dot(i).abs()), |a: &f64, b: &f64| a < b)?;
    let (values, witnesses) = res.into_iter().unzip();
    Ok(SigmaSequence { values, witnesses, norm: opts.norm })
}

/// `α` over a common denominator: `α_j = (a_j + b_j√5)/d`.
struct IntegerAlpha {
    a: Vec<i128>,
    b: Vec<i128>,
    d: BigInt,
}

impl IntegerAlpha {
    fn new(alpha: &[QSqrt5]) -> Result<Self, ArithmeticError> {
        let mut d = BigInt::one();
        for x in alpha {
            d = d.lcm(x.a.denom()).lcm(x.b.denom());
        }
        let conv = |r: &BigRational| -> Result<i128, ArithmeticError> {
            (r.numer() * (&d / r.denom())).to_i128().ok_or(ArithmeticError::Overflow)
        };
        let a = alpha.iter().map(|x| conv(&x.a)).collect::<Result<_, _>>()?;
        let b = alpha.iter().map(|x| conv(&x.b)).collect::<Result<_, _>>()?;
        Ok(Self { a, b, d })
    }

    /// `|(α, i)|·d` as `A + B√5 ≥ 0`.
    fn dot_abs(&self, i: &[i64]) -> Result<(i128, i128), ArithmeticError> {
        let mut s = (0i128, 0i128);
        for ((a, b), &x) in self.a.iter().zip(&self.b).zip(i) {
            let x = x as i128;
            s.0 = a.checked_mul(x).and_then(|v| v.checked_add(s.0)).ok_or(ArithmeticError::Overflow)?;
            s.1 = b.checked_mul(x).and_then(|v| v.checked_add(s.1)).ok_or(ArithmeticError::Overflow)?;
        }
        Ok(if surd_sign(s.0, s.1)? < 0 { (-s.0, -s.1) } else { s })
    }

    fn to_field(&self, v: (i128, i128)) -> QSqrt5 {
        QSqrt5::new(
            BigRational::new(BigInt::from(v.0), self.d.clone()),
            BigRational::new(BigInt::from(v.1), self.d.clone()),
        )
    }
}

/// Sign of `a + b√5`, exact.
fn surd_sign(a: i128, b: i128) -> Result<i32, ArithmeticError> {
    let (sa, sb) = (a.signum() as i32, b.signum() as i32);
    if sb == 0 {
        return Ok(sa);
    }
    if sa == 0 || sa == sb {
        return Ok(sb);
    }
    let a2 = a.checked_mul(a).ok_or(ArithmeticError::Overflow)?;
    let b2 = b.checked_mul(b).and_then(|v| v.checked_mul(5)).ok_or(ArithmeticError::Overflow)?;
    Ok(if a2 > b2 { sa } else if a2 < b2 { sb } else { 0 })
}

/// Exact `σ(α)` for `α` with components in ℚ(√5), using integer arithmetic
/// over a common denominator.
pub fn sigma_exact(alpha: &[QSqrt5], k_max: u32, opts: SigmaOptions) -> Result<SigmaSequence<QSqrt5>, ArithmeticError> {
    let ia = IntegerAlpha::new(alpha)?;
    let less = |x: &(i128, i128), y: &(i128, i128)| {
        // overflow here is impossible once both values were formed
        surd_sign(x.0 - y.0, x.1 - y.1).map(|s| s < 0).unwrap_or(false)
    };
    let res = sigma_core(alpha.len(), k_max, opts, |i| ia.dot_abs(i), less)?;
    let (values, witnesses): (Vec<_>, Vec<_>) = res.into_iter().map(|(v, w)| (ia.to_field(v), w)).unzip();
    Ok(SigmaSequence { values, witnesses, norm: opts.norm })
}

/// `α ∈ D_a` decided up to `k_max`: `σ(α)_k ≥ a_k` for every `k ≤ k_max`.
pub fn in_class(
    alpha: &FrequencyVector,
    a: &DecaySequence,
    k_max: u32,
    opts: SigmaOptions,
) -> Result<bool, ArithmeticError> {
    let s = sigma(alpha, k_max, opts)?;
    for (k, v) in s.values.iter().enumerate() {
        if *v < a.value(k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact class test against an exact lower sequence.
pub fn in_class_exact(alpha: &[QSqrt5], a: &[QSqrt5], opts: SigmaOptions) -> Result<bool, ArithmeticError> {
    if a.is_empty() {
        return Err(ArithmeticError::TooShort { have: 0, need: 0 });
    }
    if let Some(k) = a.iter().position(|x| *x <= QSqrt5::zero()) {
        return Err(ArithmeticError::NonPositive { index: k });
    }
    let s = sigma_exact(alpha, a.len() as u32 - 1, opts)?;
    Ok(s.values.iter().zip(a).all(|(x, y)| x >= y))
}
