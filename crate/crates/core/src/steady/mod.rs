//! Stationary photon statistics: detailed-balance recurrence for the
//! phase-insensitive models and the Liouvillian null space for any
//! generator; truncation and cutoff management.

mod banded;

pub use banded::{BandLu, BandMatrix};

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::fock::{DensityMatrix, TruncatedSpace, C64, POSITIVITY_TOL};
use crate::generators::{ModelKind, ModelSpec};
use crate::superop::Superoperator;

/// |λ₀| must lie below this times ‖S‖∞ for a null vector.
pub const NULL_TOL: f64 = 1e-10;
/// The next eigenvalue must lie above this times ‖S‖∞.
pub const GAP_TOL: f64 = 1e-8;
/// Hard cap for automatic truncation.
pub const DEFAULT_TRUNCATION_CAP: usize = 4096;

/// Photon-number distribution p_n on levels 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonStatistics {
    pub p: Vec<f64>,
    /// Highest populated level when a cutoff was applied.
    pub n_cut: Option<usize>,
    /// Levels with p_n < 0, in increasing n.
    pub negativity_report: Vec<(usize, f64)>,
    /// Last ratio p_{n+1}/p_n used when it indicates growth (|ratio| ≥ 1)
    /// at the truncation boundary.
    pub boundary_growth: Option<f64>,
}

impl PhotonStatistics {
    /// Normalizes `p` to |Σp| = 1 with its first nonzero entry positive and
    /// fills in the negativity report. For non-physical inputs whose sum is
    /// negative this keeps the signs anchored at the lowest level.
    pub fn from_distribution(mut p: Vec<f64>) -> Result<Self> {
        let anchor = p.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0).signum();
        let total: f64 = p.iter().sum::<f64>().abs() * anchor;
        if !(total.is_finite() && total != 0.0) {
            return Err(invalid("p", format!("cannot normalize, sum = {total}")));
        }
        p.iter_mut().for_each(|v| *v /= total);
        let negativity_report = p
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < 0.0)
            .map(|(n, v)| (n, *v))
            .collect();
        Ok(Self {
            p,
            n_cut: None,
            negativity_report,
            boundary_growth: None,
        })
    }

    pub fn n_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn converged(&self) -> bool {
        self.boundary_growth.is_none()
    }

    /// Fails with [`Error::NonConvergent`] if the distribution grows at the
    /// truncation boundary.
    pub fn require_converged(&self) -> Result<&Self> {
        match self.boundary_growth {
            Some(ratio) => Err(Error::NonConvergent { ratio }),
            None => Ok(self),
        }
    }

    /// Entries below the positivity tolerance.
    pub fn significant_negatives(&self) -> impl Iterator<Item = &(usize, f64)> {
        self.negativity_report.iter().filter(|(_, v)| *v < POSITIVITY_TOL)
    }
}

/// p_{n+1} = ratio(n)·p_n from p₀ = 1, truncated at min(cutoff, n_max) and
/// normalized. Works in log-magnitude form so that long growing runs do not
/// overflow.
pub fn recurrence_steady(
    ratio: impl Fn(usize) -> f64,
    space: TruncatedSpace,
    cutoff: Option<usize>,
) -> Result<PhotonStatistics> {
    let n_max = space.n_max();
    let last = cutoff.map_or(n_max, |c| c.min(n_max));
    let mut log_abs = vec![f64::NEG_INFINITY; n_max + 1];
    let mut sign = vec![1.0f64; n_max + 1];
    log_abs[0] = 0.0;
    let mut last_ratio = 0.0;
    for n in 0..last {
        let q = ratio(n);
        if !q.is_finite() {
            return Err(invalid("gain_ratio", format!("non-finite value {q} at n = {n}")));
        }
        last_ratio = q;
        log_abs[n + 1] = log_abs[n] + q.abs().ln();
        sign[n + 1] = sign[n] * if q < 0.0 { -1.0 } else { 1.0 };
    }
    let peak = log_abs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p: Vec<f64> = log_abs
        .iter()
        .zip(&sign)
        .map(|(l, s)| if l.is_finite() { s * (l - peak).exp() } else { 0.0 })
        .collect();
    let mut stats = PhotonStatistics::from_distribution(p)?;
    stats.n_cut = cutoff.map(|c| c.min(n_max));
    if last > 0 && last_ratio.abs() >= 1.0 && stats.p[last] != 0.0 {
        stats.boundary_growth = Some(last_ratio);
    }
    Ok(stats)
}

/// Detailed balance with gain rates G_n (n → n+1) against loss κ(n+1).
pub fn recurrence_from_rates(
    gain: &[f64],
    kappa: f64,
    space: TruncatedSpace,
    cutoff: Option<usize>,
) -> Result<PhotonStatistics> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if gain.len() < space.n_max() {
        return Err(invalid(
            "gain",
            format!("{} rates for n_max = {}", gain.len(), space.n_max()),
        ));
    }
    recurrence_steady(|n| gain[n] / (kappa * (n + 1) as f64), space, cutoff)
}

/// Steady statistics of a model by detailed balance.
pub fn model_recurrence(
    spec: &ModelSpec,
    kappa: f64,
    space: TruncatedSpace,
    cutoff: Option<usize>,
) -> Result<PhotonStatistics> {
    let gain = spec.gain_rates(space.n_max())?;
    recurrence_from_rates(&gain, kappa, space, cutoff)
}

fn guarded_floor(x: f64) -> usize {
    (x * (1.0 + 1e-9)).floor() as usize
}

/// n_cut = ⌊(1/5)(gτ̄)⁻²⌋
pub fn default_cutoff(gtau_bar: f64) -> Result<usize> {
    if !(gtau_bar.is_finite() && gtau_bar > 0.0) {
        return Err(invalid("g_tau_bar", format!("must be positive, got {gtau_bar}")));
    }
    let n_cut = guarded_floor(0.2 / (gtau_bar * gtau_bar));
    if n_cut == 0 {
        return Err(Error::UnusableCutoff { n_cut });
    }
    Ok(n_cut)
}

/// ⌊(2/5)(gτ̄)⁻²⌋, where the weak-coupling bracket 1 − 4u + 10u² starts
/// to grow.
pub fn growth_threshold_cutoff(gtau_bar: f64) -> Result<usize> {
    if !(gtau_bar.is_finite() && gtau_bar > 0.0) {
        return Err(invalid("g_tau_bar", format!("must be positive, got {gtau_bar}")));
    }
    let n_cut = guarded_floor(0.4 / (gtau_bar * gtau_bar));
    if n_cut == 0 {
        return Err(Error::UnusableCutoff { n_cut });
    }
    Ok(n_cut)
}

/// Smallest n_max whose steady tail p_{n_max} (normalized over 0..=n_max)
/// is below `tail_tol`, searching up to `cap`. The weak and post4 models
/// are tied to [`default_cutoff`] instead.
pub fn choose_truncation(spec: &ModelSpec, kappa: f64, tail_tol: f64, cap: usize) -> Result<TruncatedSpace> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if !(tail_tol > 0.0) {
        return Err(invalid("tail_tol", format!("must be positive, got {tail_tol}")));
    }
    if matches!(spec.kind, ModelKind::WeakLindblad | ModelKind::Post4) {
        return TruncatedSpace::new(default_cutoff(spec.params.gtau_bar())?.max(1));
    }
    let gain = spec.gain_rates(cap)?;
    let mut p = 1.0f64;
    let mut total = 1.0f64;
    for n in 0..cap {
        let ratio = gain[n] / (kappa * (n + 1) as f64);
        p *= ratio;
        total += p;
        if total > 1e250 {
            p /= total;
            total = 1.0;
        }
        // Below threshold the tail keeps shrinking only once ratios drop under 1;
        // a tolerance ≥ 1 is satisfied by any truncation.
        if p / total < tail_tol && (ratio < 1.0 || tail_tol >= 1.0) {
            return TruncatedSpace::new(n + 1);
        }
    }
    Err(Error::TruncationCapReached { cap, tail: p / total })
}

/// Null-space solution together with the eigenvalue diagnostics.
#[derive(Clone, Debug)]
pub struct NullSpaceReport {
    pub rho: DensityMatrix,
    /// Eigenvalue estimate of the null vector.
    pub lambda0: C64,
    /// Smallest eigenvalue magnitude among the remaining eigenvalues.
    pub second: f64,
    pub norm: f64,
}

/// Right null vector of S reshaped into a density matrix.
pub fn nullspace_steady(s: &Superoperator) -> Result<DensityMatrix> {
    nullspace_analysis(s).map(|r| r.rho)
}

struct BlockSolver {
    rows: Vec<Vec<(usize, C64)>>,
    lu: BandLu,
    sigma: f64,
}

impl BlockSolver {
    fn new(s: &Superoperator, block: &[usize], sigma: f64, tiny: f64) -> Self {
        let pos: HashMap<usize, usize> = block.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let rows: Vec<Vec<(usize, C64)>> = block
            .iter()
            .map(|&r| s.row(r).filter_map(|(c, v)| pos.get(&c).map(|&j| (j, v))).collect())
            .collect();
        let (mut kl, mut ku) = (0usize, 0usize);
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                kl = kl.max(i.saturating_sub(j));
                ku = ku.max(j.saturating_sub(i));
            }
        }
        let mut band = BandMatrix::zeros(block.len(), kl, ku);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                band.add(i, j, v);
            }
            band.add(i, i, C64::new(-sigma, 0.0));
        }
        Self {
            rows,
            lu: band.factor(tiny),
            sigma,
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|row| row.iter().map(|(j, a)| a * v[*j]).sum()).collect()
    }

    /// Rayleigh quotient vᴴBv / vᴴv.
    fn rayleigh(&self, v: &[C64]) -> C64 {
        let bv = self.apply(v);
        let num: C64 = v.iter().zip(&bv).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        num / den
    }

    /// Inverse iteration; `project` is applied after every solve.
    fn inverse_iteration(&self, mut v: Vec<C64>, project: impl Fn(&mut [C64])) -> (Vec<C64>, C64) {
        project(&mut v);
        normalize(&mut v);
        let mut lambda = self.rayleigh(&v);
        for _ in 0..300 {
            self.lu.solve(&mut v);
            project(&mut v);
            if !normalize(&mut v) {
                break;
            }
            let next = self.rayleigh(&v);
            let done = (next - lambda).norm() <= 1e-13 * next.norm().max(self.sigma);
            lambda = next;
            if done {
                break;
            }
        }
        (v, lambda)
    }
}

fn normalize(v: &mut [C64]) -> bool {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|a| *a /= n);
    true
}

fn start_vector(n: usize, salt: u64) -> Vec<C64> {
    // deterministic, non-degenerate start
    (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_894_9 + salt as f64 * 0.414_213_562_373_095;
            C64::new(1.0 + 0.5 * (t * 7.0).sin(), 0.25 * (t * 3.0).cos())
        })
        .collect()
}

/// Null vector, its eigenvalue and the spectral gap of S.
pub fn nullspace_analysis(s: &Superoperator) -> Result<NullSpaceReport> {
    let norm = s.norm_inf();
    let space = s.space();
    let defect = s.trace_defect();
    if defect > 1e-12 * norm.max(1.0) {
        return Err(Error::NotTracePreserving { defect });
    }
    if norm == 0.0 {
        return Err(Error::DegenerateNullSpace {
            second: 0.0,
            tolerance: 0.0,
        });
    }
    let null_tol = NULL_TOL * norm;
    let gap_tol = GAP_TOL * norm;
    let sigma = 1e-7 * norm;
    let tiny = 1e-300_f64.max(f64::EPSILON * norm * 1e-8);

    let blocks = s.invariant_blocks();
    let mut null: Option<(usize, Vec<C64>, C64)> = None;
    let mut smallest_other = f64::INFINITY;
    let mut smallest_overall = f64::INFINITY;
    for (b, block) in blocks.iter().enumerate() {
        let solver = BlockSolver::new(s, block, sigma, tiny);
        let (v, lambda) = solver.inverse_iteration(start_vector(block.len(), b as u64), |_| {});
        let mag = lambda.norm();
        smallest_overall = smallest_overall.min(mag);
        if mag < null_tol {
            if null.is_some() {
                return Err(Error::DegenerateNullSpace {
                    second: mag,
                    tolerance: gap_tol,
                });
            }
            null = Some((b, v, lambda));
        } else {
            smallest_other = smallest_other.min(mag);
        }
    }
    let (b, v0, lambda0) = null.ok_or(Error::NoNullVector {
        smallest: smallest_overall,
        tolerance: null_tol,
    })?;

    // Second eigenvalue inside the null block: S leaves the trace-free
    // subspace invariant because tr(S·) = 0.
    let block = &blocks[b];
    let trace_mask: Vec<bool> = block
        .iter()
        .map(|&i| {
            let (n, m) = space.unvec_index(i);
            n == m
        })
        .collect();
    let tr = |x: &[C64]| -> C64 {
        x.iter()
            .zip(&trace_mask)
            .filter(|(_, on)| **on)
            .map(|(a, _)| *a)
            .sum()
    };
    let tr0 = tr(&v0);
    if tr0.norm() == 0.0 {
        return Err(Error::NoNullVector {
            smallest: lambda0.norm(),
            tolerance: null_tol,
        });
    }
    if block.len() > 1 {
        let solver = BlockSolver::new(s, block, sigma, tiny);
        let project = |x: &mut [C64]| {
            let c = tr(x) / tr0;
            for (xi, vi) in x.iter_mut().zip(&v0) {
                *xi -= c * vi;
            }
        };
        let (_, lambda1) = solver.inverse_iteration(start_vector(block.len(), 7919), project);
        smallest_other = smallest_other.min(lambda1.norm());
    }
    if smallest_other < gap_tol {
        return Err(Error::DegenerateNullSpace {
            second: smallest_other,
            tolerance: gap_tol,
        });
    }

    let d = space.dim();
    let mut full = vec![C64::new(0.0, 0.0); space.super_dim()];
    for (k, &i) in block.iter().enumerate() {
        full[i] = v0[k] / tr0;
    }
    let rho = DensityMatrix::new(space, DMatrix::from_column_slice(d, d, &full))?
        .hermitized()
        .normalized();
    Ok(NullSpaceReport {
        rho,
        lambda0,
        second: smallest_other,
        norm,
    })
}
