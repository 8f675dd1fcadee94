//! The single-atom Jaynes-Cummings pump map, its Kraus decomposition and
//! the τ-averaged pump generator r∫dp(τ)(𝕄_τ − 1).

use crate::error::{invalid, Error, Result};
use crate::fock::{creation, phi_fn, sinc, DensityMatrix, OperatorMatrix, TruncatedSpace, C64};
use crate::measure::{MeasureKind, TimeMeasure};
use crate::superop::Superoperator;

/// Coupling strength below which gτ̄ counts as weak.
pub const WEAK_COUPLING_LIMIT: f64 = 0.2;

/// Partial sums of the regularized trace stop once terms drop below this.
pub const REGULARIZED_TRACE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpParameters {
    /// Coupling rate g.
    pub g: f64,
    /// Mean interaction time τ̄.
    pub tau_bar: f64,
    /// Atom injection rate r. Zero is allowed and describes an unpumped cavity.
    pub r: f64,
    /// Regularization parameter of the trace, 0 < q < 1.
    pub q: f64,
}

impl PumpParameters {
    pub fn new(g: f64, tau_bar: f64, r: f64) -> Result<Self> {
        Self::with_q(g, tau_bar, r, 0.5)
    }

    pub fn with_q(g: f64, tau_bar: f64, r: f64, q: f64) -> Result<Self> {
        if !(g.is_finite() && g > 0.0) {
            return Err(invalid("g", format!("must be positive, got {g}")));
        }
        if !(tau_bar.is_finite() && tau_bar > 0.0) {
            return Err(invalid("tau_bar", format!("must be positive, got {tau_bar}")));
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid("r", format!("must be non-negative, got {r}")));
        }
        check_q(q)?;
        Ok(Self { g, tau_bar, r, q })
    }

    /// Parameters in units g = 1 for a given pump A/κ = 2r(gτ̄)²/κ.
    pub fn from_pump(pump: f64, kappa: f64, gtau_bar: f64) -> Result<Self> {
        if !(pump.is_finite() && pump >= 0.0) {
            return Err(invalid("pump", format!("A/κ must be non-negative, got {pump}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(invalid("kappa", format!("must be positive, got {kappa}")));
        }
        if !(gtau_bar.is_finite() && gtau_bar > 0.0) {
            return Err(invalid("g_tau_bar", format!("must be positive, got {gtau_bar}")));
        }
        Self::new(1.0, gtau_bar, pump * kappa / (2.0 * gtau_bar * gtau_bar))
    }

    /// Dimensionless coupling gτ̄.
    pub fn gtau_bar(&self) -> f64 {
        self.g * self.tau_bar
    }

    /// Linear gain A = 2r(gτ̄)².
    pub fn linear_gain(&self) -> f64 {
        2.0 * self.r * self.gtau_bar().powi(2)
    }

    /// Advisory flag: gτ̄ below [`WEAK_COUPLING_LIMIT`].
    pub fn is_weak_coupling(&self) -> bool {
        self.gtau_bar() < WEAK_COUPLING_LIMIT
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(invalid("q", format!("must lie in (0, 1), got {q}")))
    }
}

/// cos(gτφ̂)
pub fn cos_phi(space: TruncatedSpace, gtau: f64) -> OperatorMatrix {
    phi_fn(space, |p| (gtau * p).cos())
}

/// gτ a† sinc(gτφ̂), the one-quantum-up part of the map.
pub fn emission_operator(space: TruncatedSpace, gtau: f64) -> OperatorMatrix {
    let sinc_phi = phi_fn(space, |p| gtau * sinc(gtau * p));
    &creation(space) * &sinc_phi
}

/// Result of one atom passing the cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct JcpOutcome {
    pub state: DensityMatrix,
    /// Probability moved above n_max and lost to the truncation.
    pub leaked: f64,
}

impl JcpOutcome {
    pub fn leak_exceeds(&self, tol: f64) -> bool {
        self.leaked > tol
    }
}

/// ρ ↦ cos(gτφ̂)ρcos(gτφ̂) + (gτ)² a† sinc(gτφ̂) ρ sinc(gτφ̂) a
pub fn jcp_map(rho: &DensityMatrix, gtau: f64) -> Result<JcpOutcome> {
    if !gtau.is_finite() {
        return Err(invalid("g_tau", "must be finite"));
    }
    let report = rho.validate();
    if !report.is_valid() {
        return Err(invalid("rho", format!("not a density matrix: {report:?}")));
    }
    let space = rho.space();
    let c = cos_phi(space, gtau);
    let s = emission_operator(space, gtau);
    let r = rho.entries();
    let out = c.entries() * r * c.entries() + s.entries() * r * s.entries().adjoint();
    let n_max = space.n_max();
    let leaked = r[(n_max, n_max)].re * (gtau * ((n_max + 1) as f64).sqrt()).sin().powi(2);
    Ok(JcpOutcome {
        state: DensityMatrix::new(space, out)?,
        leaked,
    })
}

/// Kraus operators of the coarse-grained map over a step Δt.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<OperatorMatrix>,
    pub dt: f64,
}

impl KrausSet {
    fn completeness_residual(&self) -> OperatorMatrix {
        let space = self.operators[0].space();
        let sum = self
            .operators
            .iter()
            .fold(OperatorMatrix::zeros(space), |acc, o| &acc + &(&o.adjoint() * o));
        &sum - &OperatorMatrix::identity(space)
    }

    /// max |(ΣΩ†Ω − 1)_nm| over n, m < n_max.
    pub fn completeness_defect(&self) -> f64 {
        let res = self.completeness_residual();
        let n_max = res.space().n_max();
        let mut worst = 0.0f64;
        for m in 0..n_max {
            for n in 0..n_max {
                worst = worst.max(res.get(n, m).norm());
            }
        }
        worst
    }

    /// Largest residual in the row or column n = n_max, where the truncated
    /// a† cannot complete the relation.
    pub fn boundary_defect(&self) -> f64 {
        let res = self.completeness_residual();
        let n_max = res.space().n_max();
        (0..=n_max)
            .map(|k| res.get(n_max, k).norm().max(res.get(k, n_max).norm()))
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let r = rho.entries();
        let out = self
            .operators
            .iter()
            .map(|o| o.entries() * r * o.entries().adjoint())
            .fold(r * C64::new(0.0, 0.0), |acc, x| acc + x);
        DensityMatrix::new(rho.space(), out)
    }

    /// (ΣΩρΩ† − ρ)/Δt as a superoperator.
    pub fn generator(&self) -> Superoperator {
        let space = self.operators[0].space();
        let map = self.operators.iter().fold(Superoperator::zeros(space), |acc, o| {
            acc.add(&Superoperator::sandwich(o, &o.adjoint()))
        });
        let identity = Superoperator::left(&OperatorMatrix::identity(space));
        map.sub(&identity).scale(1.0 / self.dt)
    }
}

fn check_rdt(p: &PumpParameters, dt: f64) -> Result<f64> {
    let rdt = p.r * dt;
    if rdt > 0.0 && rdt < 1.0 {
        Ok(rdt)
    } else {
        Err(invalid("dt", format!("need 0 < rΔt < 1, got {rdt}")))
    }
}

/// Ω₀ = √(1−rΔt)·1, Ω₁ = √(rΔt) cos(gτφ̂), Ω₂ = √(rΔt) gτ a† sinc(gτφ̂)
pub fn kraus_operators(space: TruncatedSpace, p: &PumpParameters, gtau: f64, dt: f64) -> Result<KrausSet> {
    let rdt = check_rdt(p, dt)?;
    Ok(KrausSet {
        operators: vec![
            OperatorMatrix::identity(space).scale((1.0 - rdt).sqrt()),
            cos_phi(space, gtau).scale(rdt.sqrt()),
            emission_operator(space, gtau).scale(rdt.sqrt()),
        ],
        dt,
    })
}

/// Kraus set of the τ-averaged step for a measure with finite support:
/// Ω_{λj} = Ω_λ(τ_j)√w_j.
pub fn averaged_kraus_set(space: TruncatedSpace, p: &PumpParameters, m: &TimeMeasure, dt: f64) -> Result<KrausSet> {
    let rdt = check_rdt(p, dt)?;
    let (xs, ws) = m
        .support()
        .ok_or_else(|| invalid("measure", "a Kraus sum needs a measure with finite support"))?;
    let x_bar = p.g * m.mean();
    let mut operators = vec![OperatorMatrix::identity(space).scale((1.0 - rdt).sqrt())];
    for (x, w) in xs.iter().zip(ws) {
        let gtau = x_bar * x;
        let amp = (rdt * w).sqrt();
        operators.push(cos_phi(space, gtau).scale(amp));
        operators.push(emission_operator(space, gtau).scale(amp));
    }
    Ok(KrausSet { operators, dt })
}

/// ϖ(gτ) = Σₙ (1−q) qⁿ cos(gτ√(n+1))
pub fn regularized_trace(gtau: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    let mut acc = 0.0;
    let mut weight = 1.0 - q;
    let mut n = 0usize;
    while weight >= REGULARIZED_TRACE_TOL {
        acc += weight * (gtau * ((n + 1) as f64).sqrt()).cos();
        weight *= q;
        n += 1;
    }
    Ok(acc)
}

/// Splits V = V' + c·1 with c the qⁿ-weighted trace over the truncated
/// diagonal, normalized so that c(1) = 1.
pub fn traceless_split(v: &OperatorMatrix, q: f64) -> Result<(OperatorMatrix, C64)> {
    check_q(q)?;
    let space = v.space();
    let mut norm = 0.0;
    let mut c = C64::new(0.0, 0.0);
    let mut weight = 1.0 - q;
    for n in 0..space.dim() {
        c += v.get(n, n) * weight;
        norm += weight;
        weight *= q;
    }
    let c = c / norm;
    let shift = OperatorMatrix::from_fn(space, |i, j| if i == j { c } else { C64::new(0.0, 0.0) });
    Ok((v - &shift, c))
}

/// C = √r[cos(gτφ̂) − ϖ(gτ)] and S = √r gτ a† sinc(gτφ̂).
pub fn lindblad_c_s(space: TruncatedSpace, p: &PumpParameters, gtau: f64) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let varpi = regularized_trace(gtau, p.q)?;
    let sr = p.r.sqrt();
    let c = phi_fn(space, |x| sr * ((gtau * x).cos() - varpi));
    let s = emission_operator(space, gtau).scale(sr);
    Ok((c, s))
}

/// The τ-averaged pump generator split into its dephasing (C) and gain (S)
/// contributions; `total()` is r∫dp(𝕄_τ − 1).
#[derive(Clone, Debug, PartialEq)]
pub struct PumpGenerator {
    pub dephasing: Superoperator,
    pub gain: Superoperator,
}

impl PumpGenerator {
    pub fn total(&self) -> Superoperator {
        self.dephasing.add(&self.gain)
    }
}

fn check_measure_mean(p: &PumpParameters, m: &TimeMeasure) -> Result<()> {
    if ((m.mean() - p.tau_bar) / p.tau_bar).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!(
            "measure mean {} differs from τ̄ = {}",
            m.mean(),
            p.tau_bar
        )));
    }
    Ok(())
}

/// r∫dp(τ)(𝕄_τ − 1) from exact averages over the measure.
///
/// With α_n = gτ̄√(n+1):
/// dephasing (n,m)←(n,m): r(⟨cos α_n x cos α_m x⟩ − ½⟨cos² α_n x⟩ − ½⟨cos² α_m x⟩);
/// gain (n,m)←(n−1,m−1): r⟨sin α_{n−1}x sin α_{m−1}x⟩, with the matching
/// loss −½r(⟨sin² α_n x⟩ + ⟨sin² α_m x⟩) on levels below n_max.
pub fn averaged_pump_generator(space: TruncatedSpace, p: &PumpParameters, m: &TimeMeasure) -> Result<PumpGenerator> {
    check_measure_mean(p, m)?;
    let d = space.dim();
    let n_max = space.n_max();
    let x_bar = p.gtau_bar();
    let alpha: Vec<f64> = (0..d).map(|n| x_bar * ((n + 1) as f64).sqrt()).collect();
    let cos2: Vec<f64> = alpha.iter().map(|&a| m.cos_cos(a, a)).collect();
    let sin2: Vec<f64> = alpha
        .iter()
        .enumerate()
        .map(|(n, &a)| if n < n_max { m.sin_sin(a, a) } else { 0.0 })
        .collect();
    let r = p.r;
    let z = |v: f64| C64::new(v, 0.0);

    let mut deph = Vec::with_capacity(d * d);
    let mut gain = Vec::with_capacity(2 * d * d);
    for col in 0..d {
        for row in 0..d {
            let idx = space.vec_index(row, col);
            let cc = if row == col { cos2[row] } else { m.cos_cos(alpha[row], alpha[col]) };
            deph.push((idx, idx, z(r * (cc - 0.5 * cos2[row] - 0.5 * cos2[col]))));
            gain.push((idx, idx, z(-0.5 * r * (sin2[row] + sin2[col]))));
            if row > 0 && col > 0 {
                let ss = if row == col { sin2[row - 1] } else { m.sin_sin(alpha[row - 1], alpha[col - 1]) };
                gain.push((idx, space.vec_index(row - 1, col - 1), z(r * ss)));
            }
        }
    }
    Ok(PumpGenerator {
        dephasing: Superoperator::from_triplets(space, deph),
        gain: Superoperator::from_triplets(space, gain),
    })
}

/// r∫dp(τ)(𝕄_τ − 1) as a single superoperator.
pub fn averaged_pump_superoperator(space: TruncatedSpace, p: &PumpParameters, m: &TimeMeasure) -> Result<Superoperator> {
    Ok(averaged_pump_generator(space, p, m)?.total())
}

/// The same generator assembled as Σ_j w_j [D(C(τ_j)) + D(S(τ_j))] for a
/// measure with finite support.
pub fn riemann_pump_superoperator(space: TruncatedSpace, p: &PumpParameters, m: &TimeMeasure) -> Result<Superoperator> {
    check_measure_mean(p, m)?;
    if m.kind() == MeasureKind::Exponential {
        return Err(invalid("measure", "a Riemann sum needs a measure with finite support"));
    }
    let (xs, ws) = m.support().expect("finite support");
    let x_bar = p.gtau_bar();
    let mut acc = Superoperator::zeros(space);
    for (x, w) in xs.iter().zip(ws) {
        let (c, s) = lindblad_c_s(space, p, x_bar * x)?;
        let term = Superoperator::dissipator(&c).add(&Superoperator::dissipator(&s));
        acc = acc.add(&term.scale(*w));
    }
    Ok(acc)
}
