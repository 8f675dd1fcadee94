//! Truncated Fock-space linear algebra.
//!
//! All operators act on the number states |0⟩ … |n_max⟩ and are stored as
//! dense complex matrices. Ladder operators are cut at the boundary: a†|n_max⟩
//! is dropped, so every product of truncated ladder matrices has a zero where
//! the top level would have leaked out. Diagonal functions of φ̂² = aa† built
//! with [`phi_fn`] instead use the exact eigenvalue n+1 on every level,
//! including n_max.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Relative Hermiticity / trace tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue still counted as positive.
pub const POSITIVITY_TOL: f64 = -1e-10;

/// Fock-space cutoff; matrices are (n_max+1)×(n_max+1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruncatedSpace {
    n_max: usize,
}

impl TruncatedSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::SpaceTooSmall(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of retained levels, n_max + 1.
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Dimension of the space of column-stacked density matrices.
    pub fn super_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    /// Column-stacked index of the element ⟨n|ρ|m⟩.
    #[inline]
    pub fn vec_index(&self, n: usize, m: usize) -> usize {
        n + m * self.dim()
    }

    /// Inverse of [`vec_index`](Self::vec_index).
    #[inline]
    pub fn unvec_index(&self, idx: usize) -> (usize, usize) {
        (idx % self.dim(), idx / self.dim())
    }
}

impl fmt::Display for TruncatedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fock space |0>..|{}>", self.n_max)
    }
}

fn check_dims(space: TruncatedSpace, m: &DMatrix<C64>) -> Result<()> {
    if m.nrows() != space.dim() || m.ncols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// An operator on the truncated number-state basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: TruncatedSpace,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(space: TruncatedSpace, entries: DMatrix<C64>) -> Result<Self> {
        check_dims(space, &entries)?;
        Ok(Self { space, entries })
    }

    pub fn zeros(space: TruncatedSpace) -> Self {
        Self {
            space,
            entries: DMatrix::zeros(space.dim(), space.dim()),
        }
    }

    pub fn identity(space: TruncatedSpace) -> Self {
        Self {
            space,
            entries: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// Diagonal operator with real entries `diag[n]` on |n⟩.
    pub fn diagonal(space: TruncatedSpace, diag: impl IntoIterator<Item = f64>) -> Self {
        let mut out = Self::zeros(space);
        for (n, d) in diag.into_iter().take(space.dim()).enumerate() {
            out.entries[(n, n)] = C64::new(d, 0.0);
        }
        out
    }

    pub fn from_fn(space: TruncatedSpace, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            space,
            entries: DMatrix::from_fn(space.dim(), space.dim(), f),
        }
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    /// Matrix element ⟨n|O|m⟩.
    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.entries[(n, m)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            space: self.space,
            entries: self.entries.map(|z| z * s),
        }
    }

    /// Diagonal entries as real numbers (imaginary parts are dropped).
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|n| self.entries[(n, n)].re).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.space.dim();
        (0..d).all(|m| (0..d).all(|n| n == m || self.entries[(n, m)] == C64::new(0.0, 0.0)))
    }

    /// Nonzero entries as (row, column, value), in column-major order.
    pub fn nonzeros(&self) -> Vec<(usize, usize, C64)> {
        let d = self.space.dim();
        let mut out = Vec::new();
        for m in 0..d {
            for n in 0..d {
                let v = self.entries[(n, m)];
                if v.re != 0.0 || v.im != 0.0 {
                    out.push((n, m, v));
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Trace of `self · other` without forming the product.
    pub fn trace_product(&self, other: &DMatrix<C64>) -> C64 {
        let d = self.space.dim();
        let mut acc = C64::new(0.0, 0.0);
        for (i, j, v) in self.nonzeros() {
            if j < d {
                acc += v * other[(j, i)];
            }
        }
        acc
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;

    // Skips zeros of the left factor; the ladder-type operators used here
    // have O(n) nonzeros.
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        let d = self.space.dim();
        let mut out = DMatrix::<C64>::zeros(d, d);
        let nz = self.nonzeros();
        for j in 0..d {
            for &(i, k, v) in &nz {
                let b = rhs.entries[(k, j)];
                if b.re != 0.0 || b.im != 0.0 {
                    out[(i, j)] += v * b;
                }
            }
        }
        OperatorMatrix {
            space: self.space,
            entries: out,
        }
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        OperatorMatrix {
            space: self.space,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// Annihilation operator: ⟨n−1|a|n⟩ = √n.
pub fn annihilation(space: TruncatedSpace) -> OperatorMatrix {
    let mut a = OperatorMatrix::zeros(space);
    for n in 1..space.dim() {
        a.entries[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Creation operator, the adjoint of [`annihilation`].
pub fn creation(space: TruncatedSpace) -> OperatorMatrix {
    annihilation(space).adjoint()
}

/// Number operator a†a = diag(0, 1, …, n_max).
pub fn number(space: TruncatedSpace) -> OperatorMatrix {
    OperatorMatrix::diagonal(space, (0..space.dim()).map(|n| n as f64))
}

/// The product a·a† of the truncated ladder matrices: diag(1, …, n_max, 0).
///
/// Polynomial operator models are written in terms of this product so that
/// their sandwich and anticommutator terms balance exactly at n_max.
pub fn ladder_product(space: TruncatedSpace) -> OperatorMatrix {
    let n_max = space.n_max();
    OperatorMatrix::diagonal(
        space,
        (0..space.dim()).map(|n| if n < n_max { (n + 1) as f64 } else { 0.0 }),
    )
}

/// Diagonal operator f(φ̂) with φ̂² = aa†: entry (n, n) is f(√(n+1)).
///
/// The boundary level uses the exact eigenvalue n_max + 1.
pub fn phi_fn(space: TruncatedSpace, f: impl Fn(f64) -> f64) -> OperatorMatrix {
    OperatorMatrix::diagonal(space, (0..space.dim()).map(|n| f(((n + 1) as f64).sqrt())))
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Diagnostics for a candidate density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityReport {
    /// |tr ρ − 1|
    pub trace_defect: f64,
    /// max |ρ − ρ†| entry
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl DensityReport {
    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect <= HERMITICITY_TOL * (1.0 + self.trace_defect)
    }

    pub fn is_normalized(&self) -> bool {
        self.trace_defect <= TRACE_TOL
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= POSITIVITY_TOL
    }

    pub fn is_valid(&self) -> bool {
        self.is_hermitian() && self.is_normalized() && self.is_positive()
    }
}

/// A field density matrix on the truncated space.
///
/// Construction only checks dimensions: non-positive matrices are
/// representable so that violations can be reported by [`validate_density`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: TruncatedSpace,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(space: TruncatedSpace, entries: DMatrix<C64>) -> Result<Self> {
        check_dims(space, &entries)?;
        Ok(Self { space, entries })
    }

    /// Number state |n⟩⟨n|.
    pub fn fock(space: TruncatedSpace, n: usize) -> Result<Self> {
        if n > space.n_max() {
            return Err(invalid("n", format!("{n} exceeds n_max {}", space.n_max())));
        }
        let mut entries = DMatrix::zeros(space.dim(), space.dim());
        entries[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self { space, entries })
    }

    /// Diagonal state with the given populations (padded with zeros).
    pub fn from_populations(space: TruncatedSpace, p: &[f64]) -> Result<Self> {
        if p.len() > space.dim() {
            return Err(invalid(
                "populations",
                format!("{} entries for {} levels", p.len(), space.dim()),
            ));
        }
        let mut entries = DMatrix::zeros(space.dim(), space.dim());
        for (n, &pn) in p.iter().enumerate() {
            entries[(n, n)] = C64::new(pn, 0.0);
        }
        Ok(Self { space, entries })
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Diagonal elements p_n = ⟨n|ρ|n⟩.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|n| self.entries[(n, n)].re).collect()
    }

    pub fn hermitized(&self) -> Self {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        Self {
            space: self.space,
            entries: h,
        }
    }

    /// Rescaled to unit trace (real part of the trace).
    pub fn normalized(&self) -> Self {
        let t = self.trace().re;
        Self {
            space: self.space,
            entries: self.entries.map(|z| z / t),
        }
    }

    /// Expectation value tr(O ρ).
    pub fn expect(&self, op: &OperatorMatrix) -> C64 {
        op.trace_product(&self.entries)
    }

    pub fn validate(&self) -> DensityReport {
        validate_density(self)
    }
}

/// Trace, Hermiticity and positivity diagnostics; never modifies ρ.
pub fn validate_density(rho: &DensityMatrix) -> DensityReport {
    let m = &rho.entries;
    let trace = m.trace();
    let trace_defect = (trace - C64::new(1.0, 0.0)).norm();
    let hermiticity_defect = m
        .iter()
        .zip(m.adjoint().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = herm
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    DensityReport {
        trace_defect,
        hermiticity_defect,
        min_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> TruncatedSpace {
        TruncatedSpace::new(n).unwrap()
    }

    #[test]
    fn rejects_empty_space() {
        assert_eq!(TruncatedSpace::new(0), Err(Error::SpaceTooSmall(0)));
    }

    #[test]
    fn annihilation_elements() {
        let a = annihilation(space(1));
        assert_eq!(a.get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(a.nonzeros().len(), 1);

        let a = annihilation(space(2));
        assert!((a.get(1, 2).re - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn number_operator_from_ladder() {
        let s = space(6);
        let n = &creation(s) * &annihilation(s);
        for k in 0..s.dim() {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
        assert!(n.max_abs_diff(&number(s)) < 1e-14);
    }

    #[test]
    fn ladder_product_interior_and_boundary() {
        let s = space(5);
        let p = &annihilation(s) * &creation(s);
        assert!(p.max_abs_diff(&ladder_product(s)) < 1e-14);
        assert_eq!(p.get(5, 5), C64::new(0.0, 0.0));
        assert!((p.get(4, 4).re - 5.0).abs() < 1e-14);
    }

    #[test]
    fn phi_fn_examples() {
        let s = space(4);
        let id = phi_fn(s, |x| (0.0 * x).cos());
        assert!(id.max_abs_diff(&OperatorMatrix::identity(s)) < 1e-15);

        let c = phi_fn(s, |x| (std::f64::consts::FRAC_PI_2 * x).cos());
        assert!(c.get(0, 0).re.abs() < 1e-15);

        let sc = phi_fn(s, |x| sinc(std::f64::consts::FRAC_PI_2 * x));
        assert!((sc.get(0, 0).re - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        // boundary uses n_max + 1
        let sq = phi_fn(s, |x| x * x);
        assert!((sq.get(4, 4).re - 5.0).abs() < 1e-12);
        assert!(sq.is_diagonal());
    }

    #[test]
    fn sinc_small_argument() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
    }

    #[test]
    fn validate_vacuum_and_mixture() {
        let s = space(1);
        let r = DensityMatrix::fock(s, 0).unwrap().validate();
        assert_eq!(r.trace_defect, 0.0);
        assert!(r.min_eigenvalue.abs() < 1e-15);
        assert!(r.is_valid());

        let r = DensityMatrix::from_populations(s, &[0.5, 0.5])
            .unwrap()
            .validate();
        assert_eq!(r.trace_defect, 0.0);
        assert!((r.min_eigenvalue - 0.5).abs() < 1e-15);

        let s2 = space(2);
        let r = DensityMatrix::from_populations(s2, &[0.5, 0.5]).unwrap().validate();
        assert!(r.min_eigenvalue.abs() < 1e-15);
    }

    #[test]
    fn validate_flags_negative_population() {
        let s = space(1);
        let rho = DensityMatrix::from_populations(s, &[1.25, -0.25]).unwrap();
        let r = validate_density(&rho);
        assert!((r.min_eigenvalue + 0.25).abs() < 1e-14);
        assert!(!r.is_positive());
        // untouched
        assert_eq!(rho.populations(), vec![1.25, -0.25]);
    }

    #[test]
    fn validate_flags_non_hermitian() {
        let s = space(1);
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.0);
        let r = DensityMatrix::new(s, m).unwrap().validate();
        assert!((r.hermiticity_defect - 0.1).abs() < 1e-15);
        assert!(!r.is_hermitian());
    }

    #[test]
    fn dimension_mismatch() {
        let s = space(2);
        assert!(matches!(
            OperatorMatrix::new(s, DMatrix::zeros(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
