//! Sparse superoperators acting on column-stacked density matrices.
//!
//! Convention: vec(ρ)[n + m·D] = ρ_nm, so AρB ↦ (Bᵀ ⊗ A) vec(ρ) and the
//! sandwich LρL† ↦ (conj(L) ⊗ L).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, OperatorMatrix, TruncatedSpace, C64};

/// Linear map on vectorized operators, stored in compressed sparse rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    space: TruncatedSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

fn is_zero(v: C64) -> bool {
    v.re == 0.0 && v.im == 0.0
}

impl Superoperator {
    pub fn zeros(space: TruncatedSpace) -> Self {
        Self {
            space,
            row_ptr: vec![0; space.super_dim() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Sums duplicate (row, col) entries; exact zeros are dropped.
    pub fn from_triplets(space: TruncatedSpace, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let dim = space.super_dim();
        let mut trip: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &trip {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
        }
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(trip.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trip.len());
        let mut k = 0;
        while k < trip.len() {
            let (r, c, mut v) = trip[k];
            k += 1;
            while k < trip.len() && trip[k].0 == r && trip[k].1 == c {
                v += trip[k].2;
                k += 1;
            }
            if !is_zero(v) {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            space,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Dense matrix conversion; the matrix must match `space.super_dim()`.
    pub fn from_dense(space: TruncatedSpace, m: &DMatrix<C64>) -> Result<Self> {
        let dim = space.super_dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let trip = (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c, m[(r, c)])));
        Ok(Self::from_triplets(space, trip))
    }

    /// ρ ↦ AρB
    pub fn sandwich(a: &OperatorMatrix, b: &OperatorMatrix) -> Self {
        assert_eq!(a.space(), b.space(), "operators live on different spaces");
        let space = a.space();
        let an = a.nonzeros();
        let bn = b.nonzeros();
        let mut trip = Vec::with_capacity(an.len() * bn.len());
        // (AρB)_ij = Σ_kl A_ik ρ_kl B_lj
        for &(i, k, av) in &an {
            for &(l, j, bv) in &bn {
                trip.push((space.vec_index(i, j), space.vec_index(k, l), av * bv));
            }
        }
        Self::from_triplets(space, trip)
    }

    /// ρ ↦ Xρ
    pub fn left(x: &OperatorMatrix) -> Self {
        Self::sandwich(x, &OperatorMatrix::identity(x.space()))
    }

    /// ρ ↦ ρY
    pub fn right(y: &OperatorMatrix) -> Self {
        Self::sandwich(&OperatorMatrix::identity(y.space()), y)
    }

    /// ρ ↦ X ρ + ρ X
    pub fn anticommutator(x: &OperatorMatrix) -> Self {
        Self::left(x).add(&Self::right(x))
    }

    /// D(L)ρ = LρL† − ½{L†L, ρ}
    pub fn dissipator(l: &OperatorMatrix) -> Self {
        let ld = l.adjoint();
        let ldl = &ld * l;
        Self::sandwich(l, &ld).add(&Self::anticommutator(&ldl).scale(-0.5))
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    /// Side length (n_max+1)².
    pub fn dim(&self) -> usize {
        self.space.super_dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of one row as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Element ⟨⟨(n,m)| S |(k,l)⟩⟩ addressed by Fock indices.
    pub fn element(&self, n: usize, m: usize, k: usize, l: usize) -> C64 {
        let s = self.space;
        self.get(s.vec_index(n, m), s.vec_index(k, l))
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            out[(r, c)] = v;
        }
        out
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.space, other.space, "superoperators live on different spaces");
        let trip = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, v * sign)));
        Self::from_triplets(self.space, trip)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim(), "vector length");
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, a)| a * v[c]).sum())
            .collect()
    }

    /// S applied to an operator given as a matrix.
    pub fn apply_matrix(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.space.dim();
        assert_eq!((x.nrows(), x.ncols()), (d, d), "matrix shape");
        let out = self.apply(x.as_slice());
        DMatrix::from_column_slice(d, d, &out)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// max_c |Σ_n S[(n,n), c]|: how far tr(Sρ) is from vanishing.
    pub fn trace_defect(&self) -> f64 {
        let mut acc = vec![C64::new(0.0, 0.0); self.dim()];
        for n in 0..self.space.dim() {
            for (c, v) in self.row(self.space.vec_index(n, n)) {
                acc[c] += v;
            }
        }
        acc.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Like [`max_abs_diff`](Self::max_abs_diff) but only over entries whose
    /// row and column Fock indices are all below `limit`.
    pub fn max_abs_diff_below(&self, other: &Self, limit: usize) -> f64 {
        let s = self.space;
        let inside = |idx: usize| {
            let (n, m) = s.unvec_index(idx);
            n < limit && m < limit
        };
        self.sub(other)
            .triplets()
            .filter(|&(r, c, _)| inside(r) && inside(c))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Connected components of the sparsity graph, each sorted ascending.
    /// S is block diagonal over these index sets.
    pub fn invariant_blocks(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        let mut parent: Vec<usize> = (0..dim).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (r, c, _) in self.triplets() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, c));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..dim {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// Dense restriction of S to an invariant index set.
    pub fn block_matrix(&self, block: &[usize]) -> DMatrix<C64> {
        let pos: BTreeMap<usize, usize> = block.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut out = DMatrix::zeros(block.len(), block.len());
        for (k, &r) in block.iter().enumerate() {
            for (c, v) in self.row(r) {
                if let Some(&j) = pos.get(&c) {
                    out[(k, j)] = v;
                }
            }
        }
        out
    }

    /// ρ(t) = exp(S t) ρ, computed block by block with dense exponentials.
    pub fn evolve(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if rho.space() != self.space {
            let d = self.space.dim();
            return Err(Error::DimensionMismatch {
                expected: d,
                rows: rho.space().dim(),
                cols: rho.space().dim(),
            });
        }
        let v = rho.entries().as_slice();
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for block in self.invariant_blocks() {
            let local = DVector::from_iterator(block.len(), block.iter().map(|&i| v[i]));
            if local.iter().all(|x| is_zero(*x)) {
                continue;
            }
            let e = (self.block_matrix(&block) * C64::new(t, 0.0)).exp();
            let res = e * local;
            for (k, &i) in block.iter().enumerate() {
                out[i] = res[k];
            }
        }
        let d = self.space.dim();
        DensityMatrix::new(self.space, DMatrix::from_column_slice(d, d, &out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, creation, number};

    fn space(n: usize) -> TruncatedSpace {
        TruncatedSpace::new(n).unwrap()
    }

    fn random_matrix(d: usize, seed: u64) -> DMatrix<C64> {
        // small LCG, enough for layout tests
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        DMatrix::from_fn(d, d, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn sandwich_matches_dense_product() {
        let s = space(3);
        let a = OperatorMatrix::new(s, random_matrix(4, 1)).unwrap();
        let b = OperatorMatrix::new(s, random_matrix(4, 2)).unwrap();
        let rho = random_matrix(4, 3);
        let got = Superoperator::sandwich(&a, &b).apply_matrix(&rho);
        let want = a.entries() * &rho * b.entries();
        assert!((got - want).camax() < 1e-14);
    }

    #[test]
    fn kronecker_layout() {
        // AρB ↦ (Bᵀ ⊗ A)
        let s = space(2);
        let a = OperatorMatrix::new(s, random_matrix(3, 4)).unwrap();
        let b = OperatorMatrix::new(s, random_matrix(3, 5)).unwrap();
        let kron = b.entries().transpose().kronecker(a.entries());
        let sup = Superoperator::sandwich(&a, &b).to_dense();
        assert!((kron - sup).camax() < 1e-15);
    }

    #[test]
    fn dissipator_trace_preserving() {
        let s = space(6);
        let l = &annihilation(s) * &number(s);
        let d = Superoperator::dissipator(&l);
        assert!(d.trace_defect() < 1e-12);
        let d = Superoperator::dissipator(&creation(s));
        assert!(d.trace_defect() < 1e-12);
    }

    #[test]
    fn blocks_of_loss() {
        let s = space(3);
        let d = Superoperator::dissipator(&annihilation(s));
        let blocks = d.invariant_blocks();
        // one block per diagonal offset n − m
        assert_eq!(blocks.len(), 2 * 3 + 1);
        for b in &blocks {
            let (n0, m0) = s.unvec_index(b[0]);
            for &i in b {
                let (n, m) = s.unvec_index(i);
                assert_eq!(n as i64 - m as i64, n0 as i64 - m0 as i64);
            }
        }
    }

    #[test]
    fn evolve_decay_of_one_photon() {
        let s = space(2);
        let d = Superoperator::dissipator(&annihilation(s));
        let rho = DensityMatrix::fock(s, 1).unwrap();
        let out = d.evolve(&rho, 0.7).unwrap();
        let p = out.populations();
        assert!((p[1] - (-0.7f64).exp()).abs() < 1e-14);
        assert!((p[0] - (1.0 - (-0.7f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn from_dense_round_trip() {
        let s = space(1);
        let m = random_matrix(4, 9);
        let sup = Superoperator::from_dense(s, &m).unwrap();
        assert_eq!(sup.to_dense(), m);
        assert_eq!(sup.get(2, 3), m[(2, 3)]);
        assert!(Superoperator::from_dense(s, &random_matrix(3, 1)).is_err());
    }
}
