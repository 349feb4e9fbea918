use serde::{Deserialize, Serialize};

use super::{visit_half_space, ArithmeticError, FrequencyVector};

/// Basis `v_j = (e_j, α_j)` of `Γ[α] = {(i, (α,i)) : i ∈ ℤⁿ} ⊂ ℝ^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeBasis {
    pub vectors: Vec<Vec<f64>>,
}

impl LatticeBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `g_t` applied to every basis vector, `g_t = diag(e^{−t},…,e^{−t},e^t)`.
    pub fn flowed(&self, t: f64) -> LatticeBasis {
        let n = self.dim();
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(j, x)| if j == n { x * t.exp() } else { x * (-t).exp() })
                    .collect()
            })
            .collect();
        LatticeBasis { vectors }
    }
}

pub fn lattice_basis(alpha: &FrequencyVector) -> LatticeBasis {
    let n = alpha.dim();
    let vectors = (0..n)
        .map(|j| {
            let mut v = vec![0.0; n + 1];
            v[j] = 1.0;
            v[n] = alpha.components()[j];
            v
        })
        .collect();
    LatticeBasis { vectors }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortestVector {
    pub delta_estimate: f64,
    pub witness: Vec<i64>,
}

/// Shortest nonzero vector of `g_t Γ` among combinations with coefficients
/// in `[−bound, bound]`; an upper bound on `δ(g_t Γ)`.
pub fn flow_and_shortest(basis: &LatticeBasis, t: f64, coeff_bound: i64) -> Result<ShortestVector, ArithmeticError> {
    if coeff_bound < 1 {
        return Err(ArithmeticError::InvalidInput("coefficient bound must be at least 1".into()));
    }
    let n = basis.dim();
    if n == 0 {
        return Err(ArithmeticError::DimensionZero);
    }
    let g = basis.flowed(t);
    let m = n + 1;
    let best = visit_half_space(
        n,
        coeff_bound,
        (f64::INFINITY, Vec::new()),
        |best, c| {
            let mut v = vec![0.0; m];
            for (cj, b) in c.iter().zip(&g.vectors) {
                if *cj != 0 {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x += *cj as f64 * y;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < best.0 || (norm == best.0 && c < best.1.as_slice()) {
                (norm, c.to_vec())
            } else {
                best
            }
        },
        |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
    );
    Ok(ShortestVector { delta_estimate: best.0, witness: best.1 })
}

/// `(ε, t) = (√(2a‖i‖), ½ log(‖i‖/a))`.
pub fn lemma_eps_t(a: f64, i_norm: f64) -> Result<(f64, f64), ArithmeticError> {
    if !(a > 0.0) || !(i_norm > 0.0) {
        return Err(ArithmeticError::InvalidInput("a and ‖i‖ must be positive".into()));
    }
    Ok(((2.0 * a * i_norm).sqrt(), 0.5 * (i_norm / a).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: &[f64]) -> FrequencyVector {
        FrequencyVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bases() {
        assert_eq!(lattice_basis(&fv(&[0.0, 0.0])).vectors, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert_eq!(lattice_basis(&fv(&[1.0])).vectors, vec![vec![1.0, 1.0]]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(lattice_basis(&fv(&[1.0, phi])).vectors, vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, phi]]);
    }

    #[test]
    fn shortest_in_the_integer_lattice() {
        let b = lattice_basis(&fv(&[0.0, 0.0]));
        let s = flow_and_shortest(&b, 0.0, 3).unwrap();
        assert_eq!(s.delta_estimate, 1.0);
        assert_eq!(s.witness.iter().map(|x| x.abs()).sum::<i64>(), 1);
        let s = flow_and_shortest(&b, 1.0, 3).unwrap();
        assert!((s.delta_estimate - (-1f64).exp()).abs() < 1e-15);
        assert!(flow_and_shortest(&b, 0.0, 0).is_err());
    }

    #[test]
    fn lemma_values() {
        let (e, t) = lemma_eps_t(2.0, 2.0).unwrap();
        assert!((e - 8f64.sqrt()).abs() < 1e-15 && t == 0.0);
        let (e, t) = lemma_eps_t(0.5, 2.0).unwrap();
        assert!((e - 2f64.sqrt()).abs() < 1e-15 && (t - 2f64.ln()).abs() < 1e-15);
        assert_eq!(lemma_eps_t(3.0, 3.0).unwrap().1, 0.0);
        assert!(lemma_eps_t(0.0, 1.0).is_err());
    }

    #[test]
    fn lemma_bound_on_golden_lattice() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let alpha = fv(&[1.0, phi]);
        let i = [1i64, -1];
        let a = alpha.dot(&i).abs();
        let norm = 2f64.sqrt();
        let (eps, t) = lemma_eps_t(a, norm).unwrap();
        let s = flow_and_shortest(&lattice_basis(&alpha), t, 4).unwrap();
        assert!(s.delta_estimate <= eps * (1.0 + 1e-12));
    }
}
