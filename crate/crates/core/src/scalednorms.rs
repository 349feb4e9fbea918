//! Grid fits of the constants `N^k_τ(u)` in `|u(x)|_s ≤ C σ^{−k} |x|_{s+σ}`
//! for linear operators on jets, measured with the ℓ¹-majorant norm.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arithmetic::{Descriptor, Verdict};
use crate::jets::{Jet, Shape};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormFitError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("τ must be positive, got {0}")]
    BadTau(f64),
    #[error("no basis monomials of degree ≤ {0}")]
    EmptyBasis(u32),
}

/// Description of the sampling grid, enough to rebuild it exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub tau: f64,
    pub size: usize,
    pub shape: Shape,
    pub trunc: u32,
    pub basis_degree: u32,
}

impl GridSpec {
    /// `s` log-spaced in `τ·[10⁻², 0.95]`, `σ = (τ − s)·q` with `q`
    /// log-spaced in `[10⁻², 1]`, so that `s + σ ≤ τ`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let logspace = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                return vec![b];
            }
            (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
        };
        let mut out = Vec::with_capacity(self.size * self.size);
        for s in logspace(1e-2 * self.tau, 0.95 * self.tau, self.size) {
            for q in logspace(1e-2, 1.0, self.size) {
                out.push((s, (self.tau - s) * q));
            }
        }
        out
    }

    /// Monomials of weighted degree ≤ `basis_degree`.
    pub fn basis(&self) -> Vec<Vec<u8>> {
        let m = self.shape.num_vars();
        let mut out = Vec::new();
        let mut e = vec![0u8; m];
        if m == 0 {
            return vec![vec![]];
        }
        loop {
            if self.shape.weighted_degree(&e) <= self.basis_degree.min(self.trunc) {
                out.push(e.clone());
            }
            let mut i = 0;
            loop {
                if i == m {
                    return out;
                }
                e[i] += 1;
                if e[i] as u32 <= self.basis_degree {
                    break;
                }
                e[i] = 0;
                i += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPoint {
    pub s: f64,
    pub sigma: f64,
    pub monomial: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessFit {
    pub k: u32,
    pub tau: f64,
    pub n_hat: f64,
    pub grid: GridSpec,
    pub max_point: Option<MaxPoint>,
    /// Per grid point, the largest ratio over the basis.
    pub residuals: Vec<f64>,
}

fn ratios<C, F>(op: &F, k: u32, grid: &GridSpec) -> Result<(Vec<f64>, f64, Option<MaxPoint>), NormFitError>
where
    C: Scalar,
    F: Fn(&Jet<C>) -> Jet<C> + Sync,
{
    if grid.size == 0 {
        return Err(NormFitError::EmptyGrid);
    }
    if !(grid.tau > 0.0) {
        return Err(NormFitError::BadTau(grid.tau));
    }
    let basis = grid.basis();
    if basis.is_empty() {
        return Err(NormFitError::EmptyBasis(grid.basis_degree));
    }
    let images: Vec<(Jet<C>, Jet<C>)> = basis
        .par_iter()
        .map(|e| {
            let x = Jet::monomial(grid.shape, grid.trunc, e, C::one());
            let ux = op(&x);
            (x, ux)
        })
        .collect();
    let pts = grid.points();
    let per_point: Vec<(f64, usize)> = pts
        .par_iter()
        .map(|&(s, sg)| {
            let mut best = (0.0f64, 0usize);
            for (j, (x, ux)) in images.iter().enumerate() {
                let r = ux.l1_norm(s) * sg.powi(k as i32) / x.l1_norm(s + sg);
                if r > best.0 {
                    best = (r, j);
                }
            }
            best
        })
        .collect();
    let mut n_hat = 0.0;
    let mut arg = None;
    for (p, &(r, j)) in per_point.iter().enumerate() {
        if r > n_hat {
            n_hat = r;
            arg = Some(MaxPoint { s: pts[p].0, sigma: pts[p].1, monomial: basis[j].clone() });
        }
    }
    Ok((per_point.into_iter().map(|x| x.0).collect(), n_hat, arg))
}

/// Smallest `C` with `|u(x)|_s σ^k ≤ C |x|_{s+σ}` over monomials `x` of
/// degree ≤ `basis_degree` and the `grid_size × grid_size` grid in `(0, τ]`.
///
/// For the weighted ℓ¹ norm the bound extends from monomials to every jet
/// spanned by them, at each grid point.
pub fn fit_bounded_constant<C, F>(
    op: F,
    shape: Shape,
    trunc: u32,
    k: u32,
    tau: f64,
    basis_degree: u32,
    grid_size: usize,
) -> Result<BoundednessFit, NormFitError>
where
    C: Scalar,
    F: Fn(&Jet<C>) -> Jet<C> + Sync,
{
    let grid = GridSpec { tau, size: grid_size, shape, trunc, basis_degree };
    let (residuals, n_hat, max_point) = ratios(&op, k, &grid)?;
    Ok(BoundednessFit { k, tau, n_hat, grid, max_point, residuals })
}

/// Recompute a fit on its recorded grid.
pub fn replay<C, F>(fit: &BoundednessFit, op: F) -> Result<f64, NormFitError>
where
    C: Scalar,
    F: Fn(&Jet<C>) -> Jet<C> + Sync,
{
    ratios(&op, fit.k, &fit.grid).map(|r| r.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    pub factors: Vec<f64>,
    pub k_total: u32,
    pub composed: f64,
    /// `n^k Π N̂_i`.
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Check the product estimate `N^k(u_1⋯u_n) ≤ n^k Π N^{k_i}(u_i)`,
/// `k = Σ k_i`, on a common grid. `ops[0]` is applied last.
pub fn product_norm_check<C>(
    ops: &[(&(dyn Fn(&Jet<C>) -> Jet<C> + Sync), u32)],
    shape: Shape,
    trunc: u32,
    tau: f64,
    basis_degree: u32,
    grid_size: usize,
) -> Result<ProductReport, NormFitError>
where
    C: Scalar,
{
    let mut factors = Vec::with_capacity(ops.len());
    for (op, k) in ops {
        factors.push(fit_bounded_constant(op, shape, trunc, *k, tau, basis_degree, grid_size)?.n_hat);
    }
    let k_total: u32 = ops.iter().map(|o| o.1).sum();
    let composed_op = |x: &Jet<C>| {
        let mut y = x.clone();
        for (op, _) in ops.iter().rev() {
            y = op(&y);
        }
        y
    };
    let composed = fit_bounded_constant(composed_op, shape, trunc, k_total, tau, basis_degree, grid_size)?.n_hat;
    let n = ops.len() as f64;
    let bound = if ops.is_empty() { 1.0 } else { n.powi(k_total as i32) * factors.iter().product::<f64>() };
    Ok(ProductReport {
        factors,
        k_total,
        composed,
        bound,
        margin: bound - composed,
        holds: composed <= bound * (1.0 + 1e-12),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModerateGrowthReport {
    pub values: Vec<f64>,
    /// Partial sums of `Σ log max(1, N_n)/2^n`.
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
}

/// Moderate-growth bookkeeping for a sequence of stage constants. A
/// definite verdict needs a closed form for `1/N_n`.
pub fn moderate_growth(values: &[f64], reciprocal: Option<&Descriptor>) -> ModerateGrowthReport {
    let mut acc = 0.0;
    let partial_sums = values
        .iter()
        .enumerate()
        .map(|(n, v)| {
            acc += v.max(1.0).ln() / 2f64.powi(n as i32);
            acc
        })
        .collect();
    let verdict = match reciprocal {
        Some(d) if d.is_moderate() => Verdict::Moderate,
        Some(_) => Verdict::NotModerate,
        None => Verdict::Inconclusive,
    };
    ModerateGrowthReport { values: values.to_vec(), partial_sums, verdict }
}
