//! Interaction-time measures dp(τ) and the polynomials orthonormal under them.
//!
//! Polynomials are kept as coefficient vectors in the dimensionless variable
//! x = τ/τ̄. Gram-Schmidt runs in exact rational arithmetic on the measure's
//! moments; only the finished coefficients are rounded to `f64`.

use gauss_quad::{GaussLaguerre, GaussLegendre};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::fock::C64;

/// Relative tolerance on the normalization of discrete weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    /// dp = (dτ/τ̄) e^{−τ/τ̄}
    Exponential,
    /// Point masses at τ_j with weights w_j.
    Discrete,
    /// Nodes and weights approximating a continuous density.
    Quadrature,
}

/// Probability measure of the atom–field interaction time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeMeasure {
    kind: MeasureKind,
    mean: f64,
    // scaled support x_j = τ_j / τ̄ (empty for the exponential)
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeMeasure {
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(invalid("mean", format!("must be positive, got {mean}")));
        }
        Ok(Self {
            kind: MeasureKind::Exponential,
            mean,
            points: Vec::new(),
            weights: Vec::new(),
        })
    }

    /// Point masses at interaction times `times` (time units).
    pub fn discrete(times: &[f64], weights: &[f64]) -> Result<Self> {
        Self::from_support(MeasureKind::Discrete, times, weights)
    }

    pub fn point_mass(tau: f64) -> Result<Self> {
        Self::discrete(&[tau], &[1.0])
    }

    /// Quadrature nodes/weights standing in for a density.
    pub fn quadrature(nodes: &[f64], weights: &[f64]) -> Result<Self> {
        Self::from_support(MeasureKind::Quadrature, nodes, weights)
    }

    /// Gauss-Laguerre rule for the exponential measure with the given mean.
    pub fn gauss_laguerre(mean: f64, nodes: usize) -> Result<Self> {
        if !(mean.is_finite() && mean > 0.0) {
            return Err(invalid("mean", format!("must be positive, got {mean}")));
        }
        let rule = GaussLaguerre::new(nodes, 0.0)
            .map_err(|e| invalid("nodes", e.to_string()))?;
        let (x, w): (Vec<f64>, Vec<f64>) = rule.into_node_weight_pairs().into_iter().unzip();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / total).collect();
        let times: Vec<f64> = x.iter().map(|v| v * mean).collect();
        Self::from_support(MeasureKind::Quadrature, &times, &w)
    }

    /// Discretizes an (unnormalized) density on [lo, hi] by Gauss-Legendre
    /// quadrature, doubling the node count until the moments up to degree 16
    /// change by less than 1e-11 (relative).
    pub fn from_density(density: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(invalid("interval", format!("[{lo}, {hi}]")));
        }
        let build = |n: usize| -> Result<Self> {
            let rule = GaussLegendre::new(n).map_err(|e| invalid("nodes", e.to_string()))?;
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut times = Vec::with_capacity(n);
            let mut weights = Vec::with_capacity(n);
            for (x, w) in rule.into_node_weight_pairs() {
                let t = mid + half * x;
                let d = density(t);
                if !(d.is_finite() && d >= 0.0) {
                    return Err(Error::InvalidMeasure(format!("density {d} at τ = {t}")));
                }
                if d > 0.0 {
                    times.push(t);
                    weights.push(w * half * d);
                }
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::InvalidMeasure("density integrates to zero".into()));
            }
            weights.iter_mut().for_each(|w| *w /= total);
            Self::from_support(MeasureKind::Quadrature, &times, &weights)
        };
        let moments = |m: &Self| -> Vec<f64> { (0..=16).map(|k| m.moment(k).unwrap_or(f64::NAN)).collect() };

        let mut n = 16;
        let mut current = build(n)?;
        while n < 4096 {
            let next = build(2 * n)?;
            let converged = moments(&current)
                .iter()
                .zip(moments(&next))
                .all(|(a, b)| (a - b).abs() <= 1e-11 * b.abs().max(1.0));
            let mean_ok = ((current.mean - next.mean) / next.mean).abs() <= 1e-11;
            current = next;
            n *= 2;
            if converged && mean_ok {
                return Ok(current);
            }
        }
        Err(Error::InvalidMeasure(format!(
            "quadrature of the density did not converge with {n} nodes"
        )))
    }

    fn from_support(kind: MeasureKind, times: &[f64], weights: &[f64]) -> Result<Self> {
        if times.is_empty() || times.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points with {} weights",
                times.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} is not positive")));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("interaction time {t} is negative")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let mean: f64 = times.iter().zip(weights).map(|(t, w)| t * w).sum();
        if mean <= 0.0 {
            return Err(Error::InvalidMeasure("mean interaction time is zero".into()));
        }
        Ok(Self {
            kind,
            mean,
            points: times.iter().map(|t| t / mean).collect(),
            weights: weights.to_vec(),
        })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// Mean interaction time τ̄.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Scaled support points x_j = τ_j/τ̄ and weights; `None` for the
    /// exponential measure.
    pub fn support(&self) -> Option<(&[f64], &[f64])> {
        match self.kind {
            MeasureKind::Exponential => None,
            _ => Some((&self.points, &self.weights)),
        }
    }

    /// Number of distinct support points (`None` if continuous).
    pub fn support_size(&self) -> Option<usize> {
        self.support().map(|(x, _)| {
            let mut xs = x.to_vec();
            xs.sort_by(|a, b| a.total_cmp(b));
            xs.dedup();
            xs.len()
        })
    }

    /// ∫ dp(τ) (τ/τ̄)ⁿ
    pub fn moment(&self, n: usize) -> Result<f64> {
        let value = match self.kind {
            MeasureKind::Exponential => (1..=n).fold(1.0f64, |acc, k| acc * k as f64),
            _ => self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| w * x.powi(n as i32))
                .sum(),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::MomentOverflow { order: n })
        }
    }

    /// Exact moments 0..=max_order of the measure as rationals.
    fn exact_moments(&self, max_order: usize) -> Vec<BigRational> {
        match self.kind {
            MeasureKind::Exponential => {
                let mut out = Vec::with_capacity(max_order + 1);
                let mut f = BigInt::one();
                for k in 0..=max_order {
                    if k > 0 {
                        f *= BigInt::from(k);
                    }
                    out.push(BigRational::from_integer(f.clone()));
                }
                out
            }
            _ => {
                let mut out = vec![BigRational::zero(); max_order + 1];
                for (x, w) in self.points.iter().zip(&self.weights) {
                    let x = rational(*x);
                    let mut term = rational(*w);
                    for slot in out.iter_mut() {
                        *slot += &term;
                        term *= &x;
                    }
                }
                out
            }
        }
    }

    /// ⟨e^{iωx}⟩ over the measure, x = τ/τ̄.
    pub fn phase_average(&self, omega: f64) -> C64 {
        match self.kind {
            MeasureKind::Exponential => C64::new(1.0, 0.0) / C64::new(1.0, -omega),
            _ => self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| C64::from_polar(*w, omega * x))
                .sum(),
        }
    }

    /// ⟨p(x) e^{iωx}⟩ for a polynomial with coefficients `poly` (ascending).
    ///
    /// Exponential measure: Σ_j c_j j!/(1−iω)^{j+1}.
    pub fn poly_phase_average(&self, poly: &[f64], omega: f64) -> C64 {
        match self.kind {
            MeasureKind::Exponential => {
                let z = C64::new(1.0, 0.0) / C64::new(1.0, -omega);
                let mut power = z;
                let mut fact = 1.0;
                let mut acc = C64::new(0.0, 0.0);
                for (j, c) in poly.iter().enumerate() {
                    if j > 0 {
                        fact *= j as f64;
                        power *= z;
                    }
                    acc += power * (c * fact);
                }
                acc
            }
            _ => self
                .points
                .iter()
                .zip(&self.weights)
                .map(|(x, w)| C64::from_polar(w * horner(poly, *x), omega * x))
                .sum(),
        }
    }

    /// ⟨cos(αx) cos(βx)⟩
    pub fn cos_cos(&self, alpha: f64, beta: f64) -> f64 {
        0.5 * (self.phase_average(alpha - beta) + self.phase_average(alpha + beta)).re
    }

    /// ⟨sin(αx) sin(βx)⟩
    pub fn sin_sin(&self, alpha: f64, beta: f64) -> f64 {
        0.5 * (self.phase_average(alpha - beta) - self.phase_average(alpha + beta)).re
    }
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub(crate) fn horner(poly: &[f64], x: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Polynomials f_0 … f_K orthonormal under a [`TimeMeasure`], with the
/// monomial expansion table xⁿ = Σ_k a_nk f_k(x).
///
/// Sign convention: the leading coefficient of f_k has sign (−1)^k, which
/// reproduces the Laguerre polynomials for the exponential measure.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoBasis {
    measure: TimeMeasure,
    coeffs: Vec<Vec<f64>>,
    expansion: Vec<Vec<f64>>,
    gram: Vec<Vec<f64>>,
}

/// Gram-Schmidt on the monomials 1, x, …, x^K.
pub fn build_basis(measure: &TimeMeasure, max_degree: usize) -> Result<OrthoBasis> {
    let mu = measure.exact_moments(2 * max_degree);
    let inner_monomial = |k: usize, p: &[BigRational]| -> BigRational {
        p.iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (i, c)| acc + c * &mu[k + i])
    };

    let mut monic: Vec<Vec<BigRational>> = Vec::with_capacity(max_degree + 1);
    let mut norms: Vec<BigRational> = Vec::with_capacity(max_degree + 1);
    for k in 0..=max_degree {
        let mut p = vec![BigRational::zero(); k + 1];
        p[k] = BigRational::one();
        for j in 0..k {
            let proj = inner_monomial(k, &monic[j]) / &norms[j];
            for (i, c) in monic[j].iter().enumerate() {
                p[i] -= &proj * c;
            }
        }
        let norm = inner_monomial(k, &p);
        if !norm.is_positive() {
            return Err(Error::DegenerateBasis {
                degree: k,
                support: measure.support_size().unwrap_or(usize::MAX),
            });
        }
        monic.push(p);
        norms.push(norm);
    }

    let sqrt_norms: Vec<f64> = norms
        .iter()
        .map(|n| n.to_f64().unwrap_or(f64::INFINITY).sqrt())
        .collect();
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };

    let coeffs: Vec<Vec<f64>> = monic
        .iter()
        .enumerate()
        .map(|(k, p)| {
            p.iter()
                .map(|c| sign(k) * c.to_f64().unwrap_or(f64::NAN) / sqrt_norms[k])
                .collect()
        })
        .collect();

    // xⁿ = Σ_k b_nk p_k with b_nk = ⟨xⁿ, p_k⟩ / ⟨p_k, p_k⟩; a_nk = b_nk (−1)^k √N_k
    let expansion: Vec<Vec<f64>> = (0..=max_degree)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    let b = inner_monomial(n, &monic[k]) / &norms[k];
                    sign(k) * b.to_f64().unwrap_or(f64::NAN) * sqrt_norms[k]
                })
                .collect()
        })
        .collect();

    // Gram matrix of the rounded coefficients, evaluated exactly.
    let rounded: Vec<Vec<BigRational>> = coeffs
        .iter()
        .map(|c| c.iter().map(|v| rational(*v)).collect())
        .collect();
    let gram = (0..=max_degree)
        .map(|k| {
            (0..=max_degree)
                .map(|l| {
                    let mut acc = BigRational::zero();
                    for (i, ci) in rounded[k].iter().enumerate() {
                        for (j, cj) in rounded[l].iter().enumerate() {
                            acc += ci * cj * &mu[i + j];
                        }
                    }
                    acc.to_f64().unwrap_or(f64::NAN)
                })
                .collect()
        })
        .collect();

    Ok(OrthoBasis {
        measure: measure.clone(),
        coeffs,
        expansion,
        gram,
    })
}

impl OrthoBasis {
    pub fn measure(&self) -> &TimeMeasure {
        &self.measure
    }

    /// Highest degree K.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients of f_k in powers of x (ascending).
    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k]
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        horner(&self.coeffs[k], x)
    }

    /// ∫dp f_k f_l for the stored (rounded) coefficients.
    pub fn gram(&self, k: usize, l: usize) -> f64 {
        self.gram[k][l]
    }

    /// max |∫dp f_k f_l − δ_kl|
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, row) in self.gram.iter().enumerate() {
            for (l, g) in row.iter().enumerate() {
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    /// a_nk for k = 0..=n, so that xⁿ = Σ_k a_nk f_k(x).
    pub fn expansion_coeffs(&self, n: usize) -> Result<&[f64]> {
        self.expansion
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::OrderTooHigh {
                requested: n,
                available: self.degree(),
            })
    }

    /// a_nk, zero for k > n.
    pub fn a(&self, n: usize, k: usize) -> f64 {
        self.expansion
            .get(n)
            .and_then(|row| row.get(k))
            .copied()
            .unwrap_or(0.0)
    }

    /// Σ_{k ≤ min(n,m)} a_nk a_mk, which equals ∫dp x^{n+m}.
    pub fn cross_moment_identity(&self, n: usize, m: usize) -> Result<f64> {
        let an = self.expansion_coeffs(n)?;
        let am = self.expansion_coeffs(m)?;
        Ok(an.iter().zip(am).map(|(x, y)| x * y).sum())
    }
}

/// ∫dp(τ) (τ/τ̄)ⁿ
pub fn moment(measure: &TimeMeasure, n: usize) -> Result<f64> {
    measure.moment(n)
}

/// xⁿ = Σ_k a_nk f_k(x)
pub fn expansion_coeffs(basis: &OrthoBasis, n: usize) -> Result<Vec<f64>> {
    basis.expansion_coeffs(n).map(<[f64]>::to_vec)
}

pub fn cross_moment_identity(basis: &OrthoBasis, n: usize, m: usize) -> Result<f64> {
    basis.cross_moment_identity(n, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn exponential_moments() {
        let m = TimeMeasure::exponential(2.5).unwrap();
        assert_eq!(m.moment(0).unwrap(), 1.0);
        assert_eq!(m.moment(4).unwrap(), 24.0);
        assert!(matches!(m.moment(171), Err(Error::MomentOverflow { order: 171 })));
    }

    #[test]
    fn point_mass_moments() {
        let m = TimeMeasure::point_mass(0.7).unwrap();
        assert_eq!(m.moment(3).unwrap(), 1.0);
        assert_eq!(m.mean(), 0.7);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(TimeMeasure::discrete(&[1.0, 2.0], &[0.5, 0.4]).is_err());
        assert!(TimeMeasure::discrete(&[1.0, 2.0], &[1.5, -0.5]).is_err());
        assert!(TimeMeasure::discrete(&[1.0], &[0.5, 0.5]).is_err());
        assert!(TimeMeasure::exponential(0.0).is_err());
    }

    #[test]
    fn laguerre_basis_exponential() {
        let m = TimeMeasure::exponential(1.0).unwrap();
        let b = build_basis(&m, 3).unwrap();
        let expect = [
            vec![1.0],
            vec![1.0, -1.0],
            vec![1.0, -2.0, 0.5],
            vec![1.0, -3.0, 1.5, -1.0 / 6.0],
        ];
        for (k, e) in expect.iter().enumerate() {
            for (c, x) in b.coeffs(k).iter().zip(e) {
                assert!((c - x).abs() < 1e-14, "f_{k}: {c} vs {x}");
            }
        }
        assert!(b.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn expansion_table_exponential() {
        let m = TimeMeasure::exponential(1.0).unwrap();
        let b = build_basis(&m, 3).unwrap();
        assert_eq!(b.expansion_coeffs(0).unwrap(), &[1.0]);
        assert_eq!(b.expansion_coeffs(1).unwrap(), &[1.0, -1.0]);
        assert_eq!(b.expansion_coeffs(2).unwrap(), &[2.0, -4.0, 2.0]);
        assert!(matches!(
            b.expansion_coeffs(4),
            Err(Error::OrderTooHigh { requested: 4, available: 3 })
        ));
        assert!(close(b.cross_moment_identity(2, 2).unwrap(), 24.0, 1e-14));
        assert!(close(b.cross_moment_identity(1, 1).unwrap(), 2.0, 1e-14));
        assert_eq!(b.cross_moment_identity(0, 0).unwrap(), 1.0);
    }

    #[test]
    fn point_mass_basis() {
        let m = TimeMeasure::point_mass(1.3).unwrap();
        let b = build_basis(&m, 0).unwrap();
        assert_eq!(b.coeffs(0), &[1.0]);
        assert!(matches!(
            build_basis(&m, 1),
            Err(Error::DegenerateBasis { degree: 1, support: 1 })
        ));
    }

    #[test]
    fn degenerate_three_point_measure() {
        let m = TimeMeasure::discrete(&[0.5, 1.0, 2.0], &[0.25, 0.5, 0.25]).unwrap();
        assert!(build_basis(&m, 2).is_ok());
        assert!(matches!(
            build_basis(&m, 3),
            Err(Error::DegenerateBasis { degree: 3, support: 3 })
        ));
    }

    #[test]
    fn exponential_phase_average_closed_form() {
        let m = TimeMeasure::exponential(1.0).unwrap();
        let (a, b) = (0.3, 0.7);
        let expect = 0.5 * (1.0 / (1.0 + (a - b) * (a - b)) + 1.0 / (1.0 + (a + b) * (a + b)));
        assert!((m.cos_cos(a, b) - expect).abs() < 1e-15);
        let s2 = m.sin_sin(a, a);
        assert!((s2 - 2.0 * a * a / (1.0 + 4.0 * a * a)).abs() < 1e-15);
        assert_eq!(m.cos_cos(0.0, 0.0), 1.0);
    }

    #[test]
    fn gauss_laguerre_matches_exponential_moments() {
        let q = TimeMeasure::gauss_laguerre(2.0, 12).unwrap();
        assert!((q.mean() - 2.0).abs() < 1e-12);
        for n in 0..10 {
            let e = TimeMeasure::exponential(1.0).unwrap().moment(n).unwrap();
            assert!(close(q.moment(n).unwrap(), e, 1e-11), "n={n}");
        }
    }

    #[test]
    fn density_uniform_window() {
        let m = TimeMeasure::from_density(|_| 1.0, 0.0, 2.0).unwrap();
        assert!((m.mean() - 1.0).abs() < 1e-13);
        // uniform on [0, 2] in units of the mean: E[x^2] = 4/3
        assert!((m.moment(2).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let b = build_basis(&m, 4).unwrap();
        assert!(b.orthonormality_defect() < 1e-10);
    }
}
