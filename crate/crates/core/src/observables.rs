//! Moments of the photon distribution, the zero-delay linewidth estimate
//! and the semiclassical intensity.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{annihilation, creation, DensityMatrix};
use crate::superop::Superoperator;

/// ⟨n⟩ below which Q and D are reported as undefined.
pub const MEAN_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// (Δn)²/⟨n⟩, `None` when ⟨n⟩ = 0.
    pub mandel_q: Option<f64>,
}

impl Moments {
    pub fn q(&self) -> Result<f64> {
        self.mandel_q.ok_or(Error::Undefined {
            quantity: "mandel_Q",
            mean: self.mean,
        })
    }
}

/// ⟨n⟩, (Δn)² and Q of a normalized distribution.
pub fn moments(p: &[f64]) -> Moments {
    let mean: f64 = p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
    // centered sum avoids cancellation in Σn²p − ⟨n⟩²
    let variance: f64 = p
        .iter()
        .enumerate()
        .map(|(n, v)| (n as f64 - mean).powi(2) * v)
        .sum();
    Moments {
        mean,
        variance,
        mandel_q: (mean > 0.0).then(|| variance / mean),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linewidth {
    /// D = −(2/⟨n⟩) Re tr[a† S(aρ)]
    pub d: f64,
    /// D⟨n⟩/κ
    pub normalized_d: f64,
    /// (1/⟨n⟩) Im tr[a† S(aρ)], the frequency pull of the line.
    pub frequency_shift: f64,
    pub mean_n: f64,
}

/// First-order quantum-regression estimate of the linewidth.
pub fn linewidth(s: &Superoperator, rho: &DensityMatrix, kappa: f64) -> Result<Linewidth> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    if rho.space() != s.space() {
        return Err(invalid("rho", "lives on a different space than the generator"));
    }
    let space = s.space();
    let mean_n: f64 = rho.populations().iter().enumerate().map(|(n, v)| n as f64 * v).sum();
    if !(mean_n >= MEAN_FLOOR) {
        return Err(Error::Undefined {
            quantity: "linewidth_D",
            mean: mean_n,
        });
    }
    let a_rho = annihilation(space).entries() * rho.entries();
    let evolved = s.apply_matrix(&a_rho);
    let corr = creation(space).trace_product(&evolved);
    let d = -2.0 * corr.re / mean_n;
    Ok(Linewidth {
        d,
        normalized_d: d * mean_n / kappa,
        frequency_shift: corr.im / mean_n,
        mean_n,
    })
}

/// Stationary intensity of dI/dt = −κI + AI/(1+βI) (the stable root).
pub fn semiclassical_intensity(a: f64, kappa: f64, beta: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    Ok(if a > kappa { (a / kappa - 1.0) / beta } else { 0.0 })
}

/// ½Σ|p_n − p'_n|, the shorter input padded with zeros.
pub fn distribution_distance(p: &[f64], q: &[f64]) -> f64 {
    let len = p.len().max(q.len());
    let at = |v: &[f64], n: usize| v.get(n).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|n| (at(p, n) - at(q, n)).abs()).sum::<f64>()
}

/// One (model, pump) point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub model: String,
    pub g_tau_bar: f64,
    pub pump: f64,
    pub mean_n: f64,
    pub variance: f64,
    pub mandel_q: Option<f64>,
    pub linewidth_d: Option<f64>,
    pub normalized_d: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{TruncatedSpace, C64};
    use crate::generators::loss_dissipator;
    use nalgebra::DMatrix;

    #[test]
    fn poisson_q_is_one() {
        let mean: f64 = 7.3;
        let mut p = vec![(-mean).exp()];
        for n in 1..120 {
            let prev = p[n - 1];
            p.push(prev * mean / n as f64);
        }
        let m = moments(&p);
        assert!((m.mandel_q.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fock_and_geometric_moments() {
        let mut p = vec![0.0; 8];
        p[5] = 1.0;
        let m = moments(&p);
        assert_eq!((m.mean, m.variance, m.mandel_q), (5.0, 0.0, Some(0.0)));

        let p: Vec<f64> = (0..200).map(|n| 0.5f64.powi(n + 1)).collect();
        let m = moments(&p);
        assert!((m.mean - 1.0).abs() < 1e-12);
        assert!((m.variance - 2.0).abs() < 1e-12);
        assert!((m.q().unwrap() - 2.0).abs() < 1e-12);

        let vac = moments(&[1.0, 0.0]);
        assert!(matches!(vac.q(), Err(Error::Undefined { .. })));
    }

    #[test]
    fn loss_linewidth_is_kappa() {
        let s = TruncatedSpace::new(30).unwrap();
        let kappa = 1.7;
        let loss = loss_dissipator(kappa, s).unwrap();
        // coherent-like test matrix with small amplitude
        let alpha: f64 = 0.8;
        let mut psi = vec![(-alpha * alpha / 2.0).exp()];
        for n in 1..=30 {
            let prev = psi[n - 1];
            psi.push(prev * alpha / (n as f64).sqrt());
        }
        let rho = DensityMatrix::new(s, DMatrix::from_fn(31, 31, |i, j| C64::new(psi[i] * psi[j], 0.0))).unwrap();
        let lw = linewidth(&loss, &rho, kappa).unwrap();
        assert!((lw.d - kappa).abs() < 1e-12);
        assert!(lw.frequency_shift.abs() < 1e-15);
        assert!((lw.normalized_d - lw.mean_n).abs() < 1e-12);
    }

    #[test]
    fn linewidth_undefined_in_vacuum() {
        let s = TruncatedSpace::new(3).unwrap();
        let rho = DensityMatrix::fock(s, 0).unwrap();
        let loss = loss_dissipator(1.0, s).unwrap();
        assert!(matches!(linewidth(&loss, &rho, 1.0), Err(Error::Undefined { .. })));
    }

    #[test]
    fn semiclassical_examples() {
        assert_eq!(semiclassical_intensity(1.0, 1.0, 0.1).unwrap(), 0.0);
        assert!((semiclassical_intensity(2.0, 1.0, 0.01).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(semiclassical_intensity(0.5, 1.0, 0.1).unwrap(), 0.0);
        assert!(semiclassical_intensity(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(distribution_distance(&[0.2, 0.8], &[0.2, 0.8]), 0.0);
        assert_eq!(distribution_distance(&[1.0], &[0.0, 1.0]), 1.0);
    }
}
