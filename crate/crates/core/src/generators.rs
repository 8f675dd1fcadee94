//! The five pump models as superoperators on the truncated space, plus
//! cavity loss.
//!
//! Lindblad-form models are described by operators of the shape
//! a†^s·diag(e) (s = 0 or 1) through [`LadderOp`], which keeps their
//! one-step gain available without building dense matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{annihilation, creation, ladder_product, OperatorMatrix, TruncatedSpace, C64};
use crate::kraus::{averaged_pump_generator, PumpParameters};
use crate::measure::{build_basis, OrthoBasis, TimeMeasure};
use crate::superop::Superoperator;

/// Relative tolerance used to detect proportional Lindblad operators.
pub const PROPORTIONALITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Exact,
    Post4,
    WeakLindblad,
    UniformLindblad,
    Heuristic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Exact,
        ModelKind::Post4,
        ModelKind::WeakLindblad,
        ModelKind::UniformLindblad,
        ModelKind::Heuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Exact => "exact",
            ModelKind::Post4 => "post4",
            ModelKind::WeakLindblad => "weak_lindblad",
            ModelKind::UniformLindblad => "uniform_lindblad",
            ModelKind::Heuristic => "heuristic",
        }
    }

    /// Models whose generator is a sum of Lindblad dissipators.
    pub fn is_manifest_lindblad(self) -> bool {
        !matches!(self, ModelKind::Post4)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

/// Operator ordering inside the heuristic saturation factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering {
    /// (1 + β aa†)^{-1/2}
    #[default]
    #[serde(rename = "aa_dag", alias = "aa†")]
    AaDag,
    /// (1 + β a†a)^{-1/2}
    #[serde(rename = "a_dag_a", alias = "a†a")]
    ADagA,
}

/// Whether a term acts diagonally (C-type, dephasing only) or raises the
/// photon number (S-type, gain).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpRole {
    Diagonal,
    Gain,
    /// Raw terms mixing both (post4).
    Mixed,
}

/// L = (a†)^shift · diag(d) stored through its nonzero band:
/// `elems[n] = ⟨n+shift|L|n⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderOp {
    pub label: String,
    pub role: OpRole,
    pub shift: usize,
    pub elems: Vec<f64>,
}

impl LadderOp {
    fn diagonal(label: impl Into<String>, elems: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            role: OpRole::Diagonal,
            shift: 0,
            elems,
        }
    }

    fn raising(label: impl Into<String>, elems: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            role: OpRole::Gain,
            shift: 1,
            elems,
        }
    }

    pub fn to_operator(&self, space: TruncatedSpace) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(space).into_entries();
        for (n, &e) in self.elems.iter().enumerate() {
            if n + self.shift < space.dim() {
                out[(n + self.shift, n)] = C64::new(e, 0.0);
            }
        }
        OperatorMatrix::new(space, out).expect("shape matches space")
    }

    fn is_zero(&self) -> bool {
        self.elems.iter().all(|e| *e == 0.0)
    }

    /// c with self = c·other, if the two are proportional.
    fn ratio_to(&self, other: &Self) -> Option<f64> {
        if self.shift != other.shift || self.elems.len() != other.elems.len() {
            return None;
        }
        let (pivot, &base) = other
            .elems
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
        if base == 0.0 {
            return None;
        }
        let c = self.elems[pivot] / base;
        let scale = self.elems.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let ok = self
            .elems
            .iter()
            .zip(&other.elems)
            .all(|(a, b)| (a - c * b).abs() <= PROPORTIONALITY_TOL * scale);
        ok.then_some(c)
    }
}

/// Drops vanishing operators and merges proportional ones: L_i = c_i L
/// contribute Σ|c_i|² D(L), i.e. one operator √(Σc_i²)·L.
pub fn merge_proportional(ops: Vec<LadderOp>, notes: &mut Vec<String>) -> Vec<LadderOp> {
    let mut groups: Vec<(LadderOp, f64, Vec<String>)> = Vec::new();
    for op in ops {
        if op.is_zero() {
            notes.push(format!("{} vanishes and was dropped", op.label));
            continue;
        }
        match groups.iter_mut().find_map(|g| op.ratio_to(&g.0).map(|c| (g, c))) {
            Some((g, c)) => {
                g.1 += c * c;
                g.2.push(op.label);
            }
            None => {
                let label = op.label.clone();
                groups.push((op, 1.0, vec![label]));
            }
        }
    }
    groups
        .into_iter()
        .map(|(mut op, weight, labels)| {
            if labels.len() > 1 {
                notes.push(format!("merged proportional operators {}", labels.join(", ")));
                let s = weight.sqrt();
                op.elems.iter_mut().for_each(|e| *e *= s);
                op.label = labels.join("+");
            }
            op
        })
        .collect()
}

/// A Lindblad operator of an assembled model.
#[derive(Clone, Debug, PartialEq)]
pub struct LindbladOp {
    pub label: String,
    pub role: OpRole,
    pub op: OperatorMatrix,
}

/// A generator contribution that is not written as a Lindblad dissipator.
#[derive(Clone, Debug, PartialEq)]
pub struct RawTerm {
    pub label: String,
    pub role: OpRole,
    pub superop: Superoperator,
}

/// A pump model on a fixed truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel {
    pub kind: ModelKind,
    pub params: PumpParameters,
    pub space: TruncatedSpace,
    pub lindblad_ops: Vec<LindbladOp>,
    pub extra: Vec<RawTerm>,
    /// Construction notes (dropped identity parts, merged operators, …).
    pub notes: Vec<String>,
}

impl GeneratorModel {
    fn from_ladder(
        kind: ModelKind,
        params: PumpParameters,
        space: TruncatedSpace,
        ops: &[LadderOp],
        notes: Vec<String>,
    ) -> Self {
        Self {
            kind,
            params,
            space,
            lindblad_ops: ops
                .iter()
                .map(|o| LindbladOp {
                    label: o.label.clone(),
                    role: o.role,
                    op: o.to_operator(space),
                })
                .collect(),
            extra: Vec::new(),
            notes,
        }
    }

    /// The pump part: Σ D(L) plus raw terms, without cavity loss.
    pub fn pump_superoperator(&self) -> Superoperator {
        let mut acc = Superoperator::zeros(self.space);
        for l in &self.lindblad_ops {
            acc = acc.add(&Superoperator::dissipator(&l.op));
        }
        for t in &self.extra {
            acc = acc.add(&t.superop);
        }
        acc
    }

    /// Pump part plus loss_dissipator(κ).
    pub fn assemble(&self, kappa: f64) -> Result<Superoperator> {
        Ok(self.pump_superoperator().add(&loss_dissipator(kappa, self.space)?))
    }

    /// Same model with every diagonal (C-type) contribution removed.
    pub fn without_diagonal_ops(&self) -> Self {
        let mut out = self.clone();
        out.lindblad_ops.retain(|l| l.role != OpRole::Diagonal);
        out.extra.retain(|t| t.role != OpRole::Diagonal);
        out.notes.push("diagonal operators removed".into());
        out
    }

    /// Rate of n → n+1 transitions, n = 0..n_max−1, read off the generator.
    pub fn gain_rates(&self) -> Vec<f64> {
        let pump = self.pump_superoperator();
        (0..self.space.n_max())
            .map(|n| pump.element(n + 1, n + 1, n, n).re)
            .collect()
    }
}

/// Standalone model description, independent of the truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: PumpParameters,
    /// Interaction-time measure; its mean must equal `params.tau_bar`.
    pub measure: TimeMeasure,
    /// Expansion order N for the weak-coupling model (3 gives the printed set).
    pub weak_order: usize,
    /// Projection order K for the uniform model.
    pub uniform_order: usize,
    pub ordering: Ordering,
    /// Saturation parameter of the heuristic model; `None` means 4(gτ̄)².
    pub beta: Option<f64>,
}

impl ModelSpec {
    /// Defaults: exponential measure, N = 3, K = 1, ordering aa†, β = 4(gτ̄)².
    pub fn new(kind: ModelKind, params: PumpParameters) -> Self {
        Self {
            kind,
            params,
            measure: TimeMeasure::exponential(params.tau_bar).expect("τ̄ validated by PumpParameters"),
            weak_order: 3,
            uniform_order: 1,
            ordering: Ordering::AaDag,
            beta: None,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(4.0 * self.params.gtau_bar().powi(2))
    }

    fn basis(&self, degree: usize) -> Result<OrthoBasis> {
        build_basis(&self.measure, degree)
    }

    fn uses_printed_weak_set(&self) -> bool {
        self.weak_order == 3 && self.measure.kind() == crate::measure::MeasureKind::Exponential
    }

    /// Lindblad operators on a space with the given n_max (empty for the
    /// exact and post4 models).
    pub fn ladder_ops(&self, n_max: usize, notes: &mut Vec<String>) -> Result<Vec<LadderOp>> {
        let p = &self.params;
        match self.kind {
            ModelKind::Exact | ModelKind::Post4 => Ok(Vec::new()),
            ModelKind::WeakLindblad if self.uses_printed_weak_set() => Ok(weak_ops(p, n_max, notes)),
            ModelKind::WeakLindblad => {
                let basis = self.basis(self.weak_order)?;
                general_weak_ops(p, &basis, self.weak_order, n_max, notes)
            }
            ModelKind::UniformLindblad => {
                let basis = self.basis(self.uniform_order)?;
                uniform_ops(p, &basis, self.uniform_order, n_max, notes)
            }
            ModelKind::Heuristic => Ok(heuristic_ops(
                p.linear_gain(),
                self.beta(),
                self.ordering,
                n_max,
            )),
        }
    }

    /// Rate of n → n+1 transitions for n = 0..n_max−1, without assembling
    /// any matrix.
    pub fn gain_rates(&self, n_max: usize) -> Result<Vec<f64>> {
        let p = &self.params;
        let x = p.gtau_bar();
        match self.kind {
            ModelKind::Exact => {
                check_mean(p, &self.measure)?;
                Ok((0..n_max)
                    .map(|n| {
                        let a = x * ((n + 1) as f64).sqrt();
                        p.r * self.measure.sin_sin(a, a)
                    })
                    .collect())
            }
            ModelKind::Post4 => {
                let a = p.linear_gain();
                Ok((0..n_max)
                    .map(|n| {
                        let m = (n + 1) as f64;
                        a * m * (1.0 - 4.0 * x * x * m)
                    })
                    .collect())
            }
            _ => {
                let ops = self.ladder_ops(n_max, &mut Vec::new())?;
                let mut gain = vec![0.0; n_max];
                for op in ops.iter().filter(|o| o.shift == 1) {
                    for (g, e) in gain.iter_mut().zip(&op.elems) {
                        *g += e * e;
                    }
                }
                Ok(gain)
            }
        }
    }

    pub fn build(&self, space: TruncatedSpace) -> Result<GeneratorModel> {
        let p = self.params;
        match self.kind {
            ModelKind::Exact => exact_model(&p, space, &self.measure),
            ModelKind::Post4 => Ok(post4_model(&p, space)),
            _ => {
                let mut notes = Vec::new();
                let ops = self.ladder_ops(space.n_max(), &mut notes)?;
                Ok(GeneratorModel::from_ladder(self.kind, p, space, &ops, notes))
            }
        }
    }
}

fn check_mean(p: &PumpParameters, m: &TimeMeasure) -> Result<()> {
    if ((m.mean() - p.tau_bar) / p.tau_bar).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!(
            "measure mean {} differs from τ̄ = {}",
            m.mean(),
            p.tau_bar
        )));
    }
    Ok(())
}

/// (aa†)_nn of the truncated ladder product: n+1 below n_max, 0 at n_max.
fn truncated_aad(n: usize, n_max: usize) -> f64 {
    if n < n_max {
        (n + 1) as f64
    } else {
        0.0
    }
}

/// ⟨n+1|a†|n⟩ on the truncated space.
fn raise(n: usize, n_max: usize) -> f64 {
    if n < n_max {
        ((n + 1) as f64).sqrt()
    } else {
        0.0
    }
}

/// Dissipator of L = √κ a.
pub fn loss_dissipator(kappa: f64, space: TruncatedSpace) -> Result<Superoperator> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(invalid("kappa", format!("must be non-negative, got {kappa}")));
    }
    Ok(Superoperator::dissipator(&annihilation(space).scale(kappa.sqrt())))
}

/// A(a†ρa − ½{aa†,ρ}) + B(3aa†ρaa† + ½{(aa†)²,ρ} − 2a†{aa†,ρ}a) with
/// A = 2r(gτ̄)², B = (gτ̄)²A.
pub fn post_lindblad_4th(p: &PumpParameters, space: TruncatedSpace) -> Superoperator {
    let a = p.linear_gain();
    let b = p.gtau_bar().powi(2) * a;
    let ad = creation(space);
    let an = annihilation(space);
    let aad = ladder_product(space);
    let aad2 = &aad * &aad;

    let linear = Superoperator::sandwich(&ad, &an).add(&Superoperator::anticommutator(&aad).scale(-0.5));
    let anti_in_sandwich = Superoperator::sandwich(&(&ad * &aad), &an).add(&Superoperator::sandwich(&ad, &(&aad * &an)));
    let quartic = Superoperator::sandwich(&aad, &aad)
        .scale(3.0)
        .add(&Superoperator::anticommutator(&aad2).scale(0.5))
        .add(&anti_in_sandwich.scale(-2.0));
    linear.scale(a).add(&quartic.scale(b))
}

pub fn post4_model(p: &PumpParameters, space: TruncatedSpace) -> GeneratorModel {
    GeneratorModel {
        kind: ModelKind::Post4,
        params: *p,
        space,
        lindblad_ops: Vec::new(),
        extra: vec![RawTerm {
            label: "post4".into(),
            role: OpRole::Mixed,
            superop: post_lindblad_4th(p, space),
        }],
        notes: vec!["fourth-order generator, not of Lindblad form".into()],
    }
}

/// 20r(gτ̄)⁶ (a†aa† ρ aa†a − ½{(aa†)³, ρ})
pub fn sixth_order_terms(p: &PumpParameters, space: TruncatedSpace) -> Superoperator {
    let l = (&creation(space) * &ladder_product(space)).scale((20.0 * p.r).sqrt() * p.gtau_bar().powi(3));
    Superoperator::dissipator(&l)
}

fn weak_ops(p: &PumpParameters, n_max: usize, notes: &mut Vec<String>) -> Vec<LadderOp> {
    let x = p.gtau_bar();
    let x2 = x * x;
    let sr = p.r.sqrt();
    let levels = 0..=n_max;
    notes.push("identity part of C~0 dropped".into());
    notes.push("C~0, C~1, C~2 merged into one operator with √(6r)".into());
    vec![
        LadderOp::diagonal(
            "C~",
            levels.clone().map(|n| -(6.0 * p.r).sqrt() * x2 * truncated_aad(n, n_max)).collect(),
        ),
        LadderOp::raising(
            "S~0",
            levels
                .clone()
                .map(|n| sr * x * raise(n, n_max) * (1.0 - x2 * truncated_aad(n, n_max)))
                .collect(),
        ),
        LadderOp::raising(
            "S~1",
            levels
                .clone()
                .map(|n| -sr * x * raise(n, n_max) * (1.0 - 3.0 * x2 * truncated_aad(n, n_max)))
                .collect(),
        ),
        LadderOp::raising(
            "S~2",
            levels
                .map(|n| (10.0 * p.r).sqrt() * x * x2 * raise(n, n_max) * truncated_aad(n, n_max))
                .collect(),
        ),
    ]
}

/// The weak-coupling model with the Laguerre coefficients written out:
/// C̃ = −√(6r)(gτ̄)² aa†, S̃₀ = √r gτ̄ a†(1 − (gτ̄)²aa†),
/// S̃₁ = −√r gτ̄ a†(1 − 3(gτ̄)²aa†), S̃₂ = √(10r)(gτ̄)³ a†aa†.
pub fn weak_coupling_model(p: &PumpParameters, space: TruncatedSpace) -> GeneratorModel {
    let mut notes = Vec::new();
    let ops = weak_ops(p, space.n_max(), &mut notes);
    GeneratorModel::from_ladder(ModelKind::WeakLindblad, *p, space, &ops, notes)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn general_weak_ops(
    p: &PumpParameters,
    basis: &OrthoBasis,
    order: usize,
    n_max: usize,
    notes: &mut Vec<String>,
) -> Result<Vec<LadderOp>> {
    if order > basis.degree() {
        return Err(Error::OrderTooHigh {
            requested: order,
            available: basis.degree(),
        });
    }
    check_mean(p, basis.measure())?;
    let x = p.gtau_bar();
    let sr = p.r.sqrt();
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    // Series of cos(gτφ̂) and gτ sinc(gτφ̂) in powers of τ/τ̄ at level n:
    // C_{2j} = (−1)^j (aa†)^j/(2j)!, S_{2j+1} = (−1)^j (aa†)^j/(2j+1)!.
    // C_0 together with the identity parts of the higher C_{2j} only shifts
    // C̃ by a multiple of 1 and is dropped.
    let c_series = |k: usize, n: usize| -> f64 {
        let u = truncated_aad(n, n_max);
        (2..=order)
            .step_by(2)
            .filter(|&m| m >= k)
            .map(|m| {
                let j = m / 2;
                basis.a(m, k) * x.powi(m as i32) * sign(j) * u.powi(j as i32) / factorial(m)
            })
            .sum()
    };
    let s_series = |k: usize, n: usize| -> f64 {
        let u = truncated_aad(n, n_max);
        (1..=order)
            .step_by(2)
            .filter(|&m| m >= k)
            .map(|m| {
                let j = (m - 1) / 2;
                basis.a(m, k) * x.powi(m as i32) * sign(j) * u.powi(j as i32) / factorial(m)
            })
            .sum()
    };
    notes.push("identity parts of the C~k dropped".into());
    let mut ops = Vec::new();
    for k in 0..=order {
        ops.push(LadderOp::diagonal(
            format!("C~{k}"),
            (0..=n_max).map(|n| sr * c_series(k, n)).collect(),
        ));
    }
    for k in 0..=order {
        ops.push(LadderOp::raising(
            format!("S~{k}"),
            (0..=n_max).map(|n| sr * raise(n, n_max) * s_series(k, n)).collect(),
        ));
    }
    Ok(merge_proportional(ops, notes))
}

/// Weak-coupling model to order N in gτ̄ for the measure of `basis`:
/// C̃_k = √r Σ_n a_nk (gτ̄)ⁿ C_n, S̃_k = √r Σ_n a_nk (gτ̄)ⁿ S_n.
pub fn general_weak_model(
    p: &PumpParameters,
    space: TruncatedSpace,
    basis: &OrthoBasis,
    order: usize,
) -> Result<GeneratorModel> {
    let mut notes = Vec::new();
    let ops = general_weak_ops(p, basis, order, space.n_max(), &mut notes)?;
    Ok(GeneratorModel::from_ladder(ModelKind::WeakLindblad, *p, space, &ops, notes))
}

/// Highest uniform projection order.
pub const MAX_UNIFORM_ORDER: usize = 2;

fn uniform_ops(
    p: &PumpParameters,
    basis: &OrthoBasis,
    order: usize,
    n_max: usize,
    notes: &mut Vec<String>,
) -> Result<Vec<LadderOp>> {
    if order > MAX_UNIFORM_ORDER {
        return Err(Error::OrderTooHigh {
            requested: order,
            available: MAX_UNIFORM_ORDER,
        });
    }
    if order > basis.degree() {
        return Err(Error::OrderTooHigh {
            requested: order,
            available: basis.degree(),
        });
    }
    check_mean(p, basis.measure())?;
    let m = basis.measure();
    let x = p.gtau_bar();
    let sr = p.r.sqrt();
    // ⟨f_k(x) e^{iα_n x}⟩: imaginary part gives S̃_k, real part C̃_k.
    let proj = |k: usize, n: usize| m.poly_phase_average(basis.coeffs(k), x * ((n + 1) as f64).sqrt());

    let s_orders: Vec<usize> = (0..=order).collect();
    let c_orders: Vec<usize> = if order < 2 { vec![0] } else { (0..=order).collect() };
    notes.push("identity part of the C~k,uniform dropped".into());

    let mut ops = Vec::new();
    for &k in &s_orders {
        ops.push(LadderOp::raising(
            format!("S~{k},uniform"),
            (0..=n_max)
                .map(|n| if n < n_max { sr * proj(k, n).im } else { 0.0 })
                .collect(),
        ));
    }
    for &k in &c_orders {
        ops.push(LadderOp::diagonal(
            format!("C~{k},uniform"),
            (0..=n_max).map(|n| sr * proj(k, n).re).collect(),
        ));
    }
    Ok(ops)
}

/// Projections S̃_k = √r∫dp S(gτφ̂) f_k(τ/τ̄) (and the C analogues) onto the
/// orthonormal polynomials of the exponential measure.
pub fn uniform_model(p: &PumpParameters, space: TruncatedSpace, order: usize) -> Result<GeneratorModel> {
    let basis = build_basis(&TimeMeasure::exponential(p.tau_bar)?, order.min(MAX_UNIFORM_ORDER))?;
    uniform_model_with_basis(p, space, &basis, order)
}

pub fn uniform_model_with_basis(
    p: &PumpParameters,
    space: TruncatedSpace,
    basis: &OrthoBasis,
    order: usize,
) -> Result<GeneratorModel> {
    let mut notes = Vec::new();
    let ops = uniform_ops(p, basis, order, space.n_max(), &mut notes)?;
    Ok(GeneratorModel::from_ladder(ModelKind::UniformLindblad, *p, space, &ops, notes))
}

fn heuristic_ops(a: f64, beta: f64, ordering: Ordering, n_max: usize) -> Vec<LadderOp> {
    let sa = a.sqrt();
    let elems = (0..=n_max)
        .map(|n| {
            let occ = match ordering {
                Ordering::AaDag => (n + 1) as f64,
                Ordering::ADagA => n as f64,
            };
            sa * raise(n, n_max) / (1.0 + beta * occ).sqrt()
        })
        .collect();
    vec![LadderOp::raising("L", elems)]
}

/// L = √A a†(1 + β·N)^{-1/2} with N = aa† or a†a.
pub fn heuristic_model(a: f64, beta: f64, ordering: Ordering, space: TruncatedSpace) -> Result<GeneratorModel> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(invalid("A", format!("must be non-negative, got {a}")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid("beta", format!("must be non-negative, got {beta}")));
    }
    // Pump parameters are only carried along: g = 1, τ̄ = √(β/4), r = A/(2τ̄²).
    let tau = if beta > 0.0 { (beta / 4.0).sqrt() } else { 1.0 };
    let params = PumpParameters::new(1.0, tau, a / (2.0 * tau * tau))?;
    let ops = heuristic_ops(a, beta, ordering, space.n_max());
    Ok(GeneratorModel::from_ladder(ModelKind::Heuristic, params, space, &ops, Vec::new()))
}

/// r∫dp(τ)(𝕄_τ − 1) with averages taken exactly over the measure.
pub fn exact_model(p: &PumpParameters, space: TruncatedSpace, measure: &TimeMeasure) -> Result<GeneratorModel> {
    let parts = averaged_pump_generator(space, p, measure)?;
    Ok(GeneratorModel {
        kind: ModelKind::Exact,
        params: *p,
        space,
        lindblad_ops: Vec::new(),
        extra: vec![
            RawTerm {
                label: "C".into(),
                role: OpRole::Diagonal,
                superop: parts.dephasing,
            },
            RawTerm {
                label: "S".into(),
                role: OpRole::Gain,
                superop: parts.gain,
            },
        ],
        notes: vec!["reflecting boundary: no gain out of n_max".into()],
    })
}

/// Superoperator of a model plus loss.
pub fn assemble(model: &GeneratorModel, kappa: f64) -> Result<Superoperator> {
    model.assemble(kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DensityMatrix;

    fn space(n: usize) -> TruncatedSpace {
        TruncatedSpace::new(n).unwrap()
    }

    #[test]
    fn model_names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!("laser".parse::<ModelKind>().is_err());
    }

    #[test]
    fn loss_examples() {
        let s = space(3);
        let l = loss_dissipator(2.0, s).unwrap();
        let one = DensityMatrix::fock(s, 1).unwrap();
        let d = l.apply_matrix(one.entries());
        assert!((d[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((d[(1, 1)].re + 2.0).abs() < 1e-15);
        let vac = DensityMatrix::fock(s, 0).unwrap();
        assert!(l.apply_matrix(vac.entries()).iter().all(|v| v.norm() == 0.0));
        // ⟨0|ρ|1⟩ decays at κ/2
        assert!((l.element(0, 1, 0, 1).re + 1.0).abs() < 1e-15);
        assert!(loss_dissipator(-1.0, s).is_err());
    }

    #[test]
    fn single_loss_operator_matches_loss() {
        let s = space(4);
        let p = PumpParameters::new(1.0, 0.1, 0.0).unwrap();
        let model = GeneratorModel {
            kind: ModelKind::Heuristic,
            params: p,
            space: s,
            lindblad_ops: vec![LindbladOp {
                label: "loss".into(),
                role: OpRole::Gain,
                op: annihilation(s).scale(3f64.sqrt()),
            }],
            extra: Vec::new(),
            notes: Vec::new(),
        };
        let a = model.assemble(0.0).unwrap();
        assert!(a.max_abs_diff(&loss_dissipator(3.0, s).unwrap()) < 1e-15);
        let empty = GeneratorModel {
            lindblad_ops: Vec::new(),
            ..model
        };
        assert_eq!(empty.assemble(0.0).unwrap().nnz(), 0);
    }

    #[test]
    fn post4_gain_and_trace() {
        let s = space(20);
        let p = PumpParameters::new(1.0, 0.1, 1.0).unwrap();
        let sup = post_lindblad_4th(&p, s);
        assert!(sup.trace_defect() < 1e-15);
        for n in 0..20 {
            let m = (n + 1) as f64;
            let want = 0.02 * m * (1.0 - 0.04 * m);
            assert!((sup.element(n + 1, n + 1, n, n).re - want).abs() < 1e-15);
        }
        let spec = ModelSpec::new(ModelKind::Post4, p);
        let rates = spec.gain_rates(20).unwrap();
        let built = spec.build(s).unwrap().gain_rates();
        for (a, b) in rates.iter().zip(&built) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn weak_minus_sixth_is_post4() {
        let s = space(25);
        let p = PumpParameters::new(1.0, 0.15, 2.0).unwrap();
        let weak = weak_coupling_model(&p, s).pump_superoperator();
        let diff = weak.sub(&sixth_order_terms(&p, s));
        assert!(diff.max_abs_diff(&post_lindblad_4th(&p, s)) < 1e-14);
    }

    #[test]
    fn general_n1_is_linear_gain() {
        let s = space(10);
        let p = PumpParameters::new(1.0, 0.05, 3.0).unwrap();
        let basis = build_basis(&TimeMeasure::exponential(0.05).unwrap(), 1).unwrap();
        let m = general_weak_model(&p, s, &basis, 1).unwrap();
        assert_eq!(m.lindblad_ops.len(), 1);
        let lin = creation(s).scale((2.0 * p.r).sqrt() * 0.05);
        assert!(m.lindblad_ops[0].op.max_abs_diff(&lin) < 1e-15);
    }

    #[test]
    fn point_mass_general_model_truncates_c_and_s() {
        let s = space(8);
        let p = PumpParameters::new(1.0, 0.2, 1.0).unwrap();
        let basis = build_basis(&TimeMeasure::point_mass(0.2).unwrap(), 0).unwrap();
        let m = general_weak_model(&p, s, &basis, 0);
        assert!(m.is_ok());
        // N beyond the single-point basis degree is rejected
        assert!(general_weak_model(&p, s, &basis, 3).is_err());
    }

    #[test]
    fn heuristic_gain() {
        let s = space(12);
        let m = heuristic_model(2.0, 0.1, Ordering::AaDag, s).unwrap();
        let g = m.gain_rates();
        for (n, gn) in g.iter().enumerate() {
            let want = 2.0 * (n + 1) as f64 / (1.0 + 0.1 * (n + 1) as f64);
            assert!((gn - want).abs() < 1e-14);
        }
        let m = heuristic_model(2.0, 0.1, Ordering::ADagA, s).unwrap();
        let g = m.gain_rates();
        assert!((g[3] - 2.0 * 4.0 / 1.3).abs() < 1e-14);
    }

    #[test]
    fn uniform_order_limits() {
        let s = space(5);
        let p = PumpParameters::new(1.0, 0.1, 1.0).unwrap();
        assert_eq!(uniform_model(&p, s, 0).unwrap().lindblad_ops.len(), 2);
        assert_eq!(uniform_model(&p, s, 1).unwrap().lindblad_ops.len(), 3);
        assert_eq!(uniform_model(&p, s, 2).unwrap().lindblad_ops.len(), 6);
        assert!(matches!(uniform_model(&p, s, 3), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn every_model_trace_preserving() {
        let s = space(30);
        let p = PumpParameters::from_pump(1.5, 1.0, 0.15).unwrap();
        for k in ModelKind::ALL {
            let m = ModelSpec::new(k, p).build(s).unwrap();
            let sup = m.assemble(1.0).unwrap();
            assert!(sup.trace_defect() < 1e-12, "{k}: {}", sup.trace_defect());
        }
    }

    #[test]
    fn spec_gain_matches_built_model() {
        let s = space(30);
        let p = PumpParameters::from_pump(2.0, 1.0, 0.15).unwrap();
        for k in ModelKind::ALL {
            let spec = ModelSpec::new(k, p);
            let a = spec.gain_rates(30).unwrap();
            let b = spec.build(s).unwrap().gain_rates();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0), "{k}");
            }
        }
    }
}
