use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// Variable blocks of a jet, in storage order `q, p, λ, μ, z`.
///
/// `q`/`p` are the canonical pairs, `λ`/`μ` the bracket-inert parameter
/// blocks of the extended scenario (weight 2 so that `p_i q_i − Σ λ_j e_{ji}`
/// is homogeneous), `z` free variables (weight 1) for jets that carry no
/// symplectic meaning, such as Birkhoff polynomials in the actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub pairs: usize,
    pub lambda: usize,
    pub mu: usize,
    pub free: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Q(usize),
    P(usize),
    Lambda(usize),
    Mu(usize),
    Free(usize),
}

impl Shape {
    pub const fn free(m: usize) -> Self {
        Self { pairs: 0, lambda: 0, mu: 0, free: m }
    }

    pub const fn symplectic(n: usize) -> Self {
        Self { pairs: n, lambda: 0, mu: 0, free: 0 }
    }

    pub const fn extended(n: usize, d: usize) -> Self {
        Self { pairs: n, lambda: d, mu: d, free: 0 }
    }

    pub const fn num_vars(&self) -> usize {
        2 * self.pairs + self.lambda + self.mu + self.free
    }

    pub const fn q(&self, i: usize) -> usize {
        i
    }

    pub const fn p(&self, i: usize) -> usize {
        self.pairs + i
    }

    pub const fn lambda_var(&self, i: usize) -> usize {
        2 * self.pairs + i
    }

    pub const fn mu_var(&self, i: usize) -> usize {
        2 * self.pairs + self.lambda + i
    }

    pub const fn free_var(&self, i: usize) -> usize {
        2 * self.pairs + self.lambda + self.mu + i
    }

    pub fn kind(&self, var: usize) -> VarKind {
        let n = self.pairs;
        if var < n {
            VarKind::Q(var)
        } else if var < 2 * n {
            VarKind::P(var - n)
        } else if var < 2 * n + self.lambda {
            VarKind::Lambda(var - 2 * n)
        } else if var < 2 * n + self.lambda + self.mu {
            VarKind::Mu(var - 2 * n - self.lambda)
        } else {
            VarKind::Free(var - 2 * n - self.lambda - self.mu)
        }
    }

    /// Grading weight of a variable.
    pub fn weight(&self, var: usize) -> u32 {
        match self.kind(var) {
            VarKind::Lambda(_) | VarKind::Mu(_) => 2,
            _ => 1,
        }
    }

    pub fn weighted_degree(&self, exps: &[u8]) -> u32 {
        exps.iter()
            .enumerate()
            .map(|(v, &e)| self.weight(v) * e as u32)
            .sum()
    }

    pub fn var_name(&self, var: usize) -> String {
        match self.kind(var) {
            VarKind::Q(i) => format!("q{}", i + 1),
            VarKind::P(i) => format!("p{}", i + 1),
            VarKind::Lambda(i) => format!("l{}", i + 1),
            VarKind::Mu(i) => format!("m{}", i + 1),
            VarKind::Free(i) => format!("z{}", i + 1),
        }
    }

    /// Build a multi-index for this shape.
    pub fn index(&self, exps: &[u8]) -> MultiIndex {
        assert_eq!(exps.len(), self.num_vars(), "exponent vector length");
        MultiIndex { deg: self.weighted_degree(exps), exps: SmallVec::from_slice(exps) }
    }

    pub fn zero_index(&self) -> MultiIndex {
        MultiIndex { deg: 0, exps: SmallVec::from_elem(0, self.num_vars()) }
    }

    pub fn unit_index(&self, var: usize) -> MultiIndex {
        let mut e: SmallVec<[u8; 8]> = SmallVec::from_elem(0, self.num_vars());
        e[var] = 1;
        MultiIndex { deg: self.weight(var), exps: e }
    }
}

/// Exponent vector of a monomial with its cached weighted degree.
///
/// Ordering is graded: weighted degree first, then lexicographic on the
/// exponents. Iteration over a jet therefore runs degree by degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    deg: u32,
    exps: SmallVec<[u8; 8]>,
}

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.deg
    }

    /// Plain total degree `Σ e_i`, ignoring weights.
    pub fn total_degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }

    pub fn exps(&self) -> &[u8] {
        &self.exps
    }

    pub fn get(&self, var: usize) -> u8 {
        self.exps[var]
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        let exps = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        MultiIndex { deg: self.deg + other.deg, exps }
    }

    /// Divide by `var` once; `None` if the exponent is zero.
    pub fn lower(&self, var: usize, weight: u32) -> Option<MultiIndex> {
        if self.exps[var] == 0 {
            return None;
        }
        let mut exps = self.exps.clone();
        exps[var] -= 1;
        Some(MultiIndex { deg: self.deg - weight, exps })
    }

    pub fn raise(&self, var: usize, weight: u32) -> MultiIndex {
        let mut exps = self.exps.clone();
        exps[var] += 1;
        MultiIndex { deg: self.deg + weight, exps }
    }

    /// q- and p-exponent vectors for the first `pairs` canonical pairs.
    pub fn qp(&self, pairs: usize) -> (&[u8], &[u8]) {
        (&self.exps[..pairs], &self.exps[pairs..2 * pairs])
    }

    /// `Σ_i min(q_i, p_i)`: the largest `k` with this monomial in `⟨p_i q_i⟩^k`.
    pub fn action_power(&self, pairs: usize) -> u32 {
        let (q, p) = self.qp(pairs);
        q.iter().zip(p).map(|(a, b)| (*a).min(*b) as u32).sum()
    }

    /// Equal q and p exponents: a pure product of actions `(pq)^i`.
    pub fn is_resonant(&self, pairs: usize) -> bool {
        let (q, p) = self.qp(pairs);
        q == p
    }
}
