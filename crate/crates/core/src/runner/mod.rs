//! Parameter sweeps over models and pump strengths with CSV/JSON output.

mod config;
mod table;

pub use config::{Command, Cutoff, ModelConfig, OutputKind, PumpSpec, RunConfig, Solver, Truncation};
pub use table::{Cell, Table};

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, TruncatedSpace};
use crate::generators::{ModelKind, ModelSpec};
use crate::observables::{distribution_distance, linewidth, moments, Linewidth, Moments};
use crate::steady::{choose_truncation, default_cutoff, model_recurrence, nullspace_analysis, PhotonStatistics};

/// Steady state of one (model, pump) point.
#[derive(Clone, Debug)]
pub struct PointSolution {
    pub spec: ModelSpec,
    pub space: TruncatedSpace,
    pub stats: PhotonStatistics,
    /// Full density matrix when the null-space solver was used.
    pub rho: Option<DensityMatrix>,
}

impl PointSolution {
    pub fn moments(&self) -> Moments {
        moments(&self.stats.p)
    }

    fn density(&self) -> Result<DensityMatrix> {
        match &self.rho {
            Some(r) => Ok(r.clone()),
            None => DensityMatrix::from_populations(self.space, &self.stats.p),
        }
    }

    /// Linewidth of the full model, or with its diagonal operators removed.
    pub fn linewidth(&self, kappa: f64, without_diagonal: bool) -> Result<Linewidth> {
        let mut model = self.spec.build(self.space)?;
        if without_diagonal {
            model = model.without_diagonal_ops();
        }
        linewidth(&model.assemble(kappa)?, &self.density()?, kappa)
    }
}

fn resolve_space(cfg: &RunConfig, spec: &ModelSpec) -> Result<TruncatedSpace> {
    match cfg.truncation {
        Truncation::Explicit { n_max } => TruncatedSpace::new(n_max),
        Truncation::Auto => choose_truncation(spec, cfg.kappa, cfg.tail_tol, cfg.truncation_cap),
    }
}

fn resolve_cutoff(cfg: &RunConfig, kind: ModelKind) -> Result<Option<usize>> {
    match cfg.cutoff {
        Cutoff::Off => Ok(None),
        Cutoff::Explicit { n_cut } => Ok(Some(n_cut)),
        Cutoff::Auto if kind == ModelKind::WeakLindblad => default_cutoff(cfg.g_tau_bar).map(Some),
        Cutoff::Auto => Ok(None),
    }
}

/// Solves one point; `space` overrides the configured truncation.
pub fn solve_point(
    cfg: &RunConfig,
    model: &ModelConfig,
    pump: f64,
    space: Option<TruncatedSpace>,
) -> Result<PointSolution> {
    let spec = model.spec(cfg.params(pump)?)?;
    let space = match space {
        Some(s) => s,
        None => resolve_space(cfg, &spec)?,
    };
    match cfg.solver {
        Solver::Recurrence => {
            let cutoff = resolve_cutoff(cfg, spec.kind)?;
            let stats = model_recurrence(&spec, cfg.kappa, space, cutoff)?;
            Ok(PointSolution {
                spec,
                space,
                stats,
                rho: None,
            })
        }
        Solver::Nullspace => {
            let sup = spec.build(space)?.assemble(cfg.kappa)?;
            let report = nullspace_analysis(&sup)?;
            let stats = PhotonStatistics::from_distribution(report.rho.populations())?;
            Ok(PointSolution {
                spec,
                space,
                stats,
                rho: Some(report.rho),
            })
        }
    }
}

/// Rows plus per-point diagnostics of a run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub command: Command,
    pub config_echo: RunConfig,
    pub table: Table,
    /// Human-readable per-point failures; non-empty means partial success.
    pub failures: Vec<String>,
    /// Advisory messages (negative probabilities, dropped operators, …).
    pub warnings: Vec<String>,
}

impl RunOutput {
    pub fn to_csv(&self) -> Result<String> {
        self.table.to_csv()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = json!({
            "config_echo": self.config_echo,
            "rows": self.table.to_json_rows(),
        });
        serde_json::to_string_pretty(&doc)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// 0 on full success, 2 when some points failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

fn point_grid(cfg: &RunConfig) -> Result<Vec<(usize, f64)>> {
    let pumps = cfg.pump.values()?;
    Ok((0..cfg.models.len())
        .flat_map(|m| pumps.iter().map(move |&p| (m, p)))
        .collect())
}

fn parallel<T: Send>(cfg: &RunConfig, jobs: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| (0..jobs).into_par_iter().map(f).collect()))
}

fn point_label(model: &ModelConfig, pump: f64) -> String {
    format!("{} at A/κ = {pump}", model.label())
}

/// One row per Fock level per (model, pump) point.
pub fn run_steady(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = point_grid(cfg)?;
    let results = parallel(cfg, grid.len(), |i| {
        let (m, pump) = grid[i];
        solve_point(cfg, &cfg.models[m], pump, None)
    })?;

    let mut table = Table::new(&["model", "g_tau_bar", "pump_A_over_kappa", "n", "p_n", "negative_flag"]);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for ((m, pump), res) in grid.iter().zip(results) {
        let model = &cfg.models[*m];
        let label = point_label(model, *pump);
        match res {
            Ok(sol) => {
                if let Some(ratio) = sol.stats.boundary_growth {
                    failures.push(format!("{label}: {}", Error::NonConvergent { ratio }));
                }
                if !sol.stats.negativity_report.is_empty() {
                    warnings.push(format!(
                        "{label}: {} negative probabilities, first at n = {}",
                        sol.stats.negativity_report.len(),
                        sol.stats.negativity_report[0].0
                    ));
                }
                for (n, p) in sol.stats.p.iter().enumerate() {
                    table.push(vec![
                        Cell::Text(model.label()),
                        Cell::Num(cfg.g_tau_bar),
                        Cell::Num(*pump),
                        Cell::Int(n as i64),
                        Cell::Num(*p),
                        Cell::Bool(*p < 0.0),
                    ]);
                }
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    Ok(RunOutput {
        command: Command::Steady,
        config_echo: cfg.resolved()?,
        table,
        failures,
        warnings,
    })
}

fn opt(v: Option<f64>) -> Cell {
    v.map_or(Cell::Missing, Cell::Num)
}

/// Moments and linewidth per (model, pump) point.
pub fn run_sweep(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = point_grid(cfg)?;
    let results = parallel(cfg, grid.len(), |i| {
        let (m, pump) = grid[i];
        let sol = solve_point(cfg, &cfg.models[m], pump, None)?;
        let lw = sol.linewidth(cfg.kappa, false);
        Ok::<_, Error>((sol, lw))
    })?;

    let mut table = Table::new(&[
        "model",
        "g_tau_bar",
        "pump_A_over_kappa",
        "mean_n",
        "variance",
        "mandel_Q",
        "linewidth_D",
        "normalized_D",
        "status",
    ]);
    let mut failures = Vec::new();
    for ((m, pump), res) in grid.iter().zip(results) {
        let model = &cfg.models[*m];
        let label = point_label(model, *pump);
        let mut row = vec![Cell::Text(model.label()), Cell::Num(cfg.g_tau_bar), Cell::Num(*pump)];
        match res {
            Ok((sol, lw)) => {
                let mo = sol.moments();
                let mut status = Vec::new();
                if let Some(ratio) = sol.stats.boundary_growth {
                    failures.push(format!("{label}: {}", Error::NonConvergent { ratio }));
                    status.push("non_convergent".to_string());
                }
                if !sol.stats.negativity_report.is_empty() {
                    status.push("negative_p".into());
                }
                let (d, nd) = match lw {
                    Ok(l) => (Some(l.d), Some(l.normalized_d)),
                    Err(Error::Undefined { .. }) => {
                        status.push("linewidth_undefined".into());
                        (None, None)
                    }
                    Err(e) => {
                        failures.push(format!("{label}: linewidth: {e}"));
                        status.push("linewidth_error".into());
                        (None, None)
                    }
                };
                if mo.mandel_q.is_none() {
                    status.push("q_undefined".into());
                }
                row.extend([
                    Cell::Num(mo.mean),
                    Cell::Num(mo.variance),
                    opt(mo.mandel_q),
                    opt(d),
                    opt(nd),
                    Cell::Text(if status.is_empty() { "ok".into() } else { status.join(";") }),
                ]);
            }
            Err(e) => {
                failures.push(format!("{label}: {e}"));
                row.extend([
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Text(format!("error: {e}")),
                ]);
            }
        }
        table.push(row);
    }
    Ok(RunOutput {
        command: Command::Sweep,
        config_echo: cfg.resolved()?,
        table,
        failures,
        warnings: Vec::new(),
    })
}

/// Pairwise distances between all configured models on a shared truncation.
pub fn run_compare(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.models.len() < 2 {
        return Err(Error::Config("compare needs at least two models".into()));
    }
    let pumps = cfg.pump.values()?;
    let pairs: Vec<(usize, usize)> = (0..cfg.models.len())
        .flat_map(|a| (a + 1..cfg.models.len()).map(move |b| (a, b)))
        .collect();
    let jobs: Vec<(f64, usize, usize)> = pumps
        .iter()
        .flat_map(|&p| pairs.iter().map(move |&(a, b)| (p, a, b)))
        .collect();
    let results = parallel(cfg, jobs.len(), |i| {
        let (pump, a, b) = jobs[i];
        let (ma, mb) = (&cfg.models[a], &cfg.models[b]);
        let sa = resolve_space(cfg, &ma.spec(cfg.params(pump)?)?)?;
        let sb = resolve_space(cfg, &mb.spec(cfg.params(pump)?)?)?;
        let shared = TruncatedSpace::new(sa.n_max().max(sb.n_max()))?;
        let pa = solve_point(cfg, ma, pump, Some(shared))?;
        let pb = solve_point(cfg, mb, pump, Some(shared))?;
        Ok::<_, Error>((pa, pb))
    })?;

    let mut table = Table::new(&[
        "pump_A_over_kappa",
        "model_a",
        "model_b",
        "total_variation",
        "delta_mean",
        "delta_q",
        "status",
    ]);
    let mut failures = Vec::new();
    for ((pump, a, b), res) in jobs.iter().zip(results) {
        let (ma, mb) = (&cfg.models[*a], &cfg.models[*b]);
        let mut row = vec![Cell::Num(*pump), Cell::Text(ma.label()), Cell::Text(mb.label())];
        match res {
            Ok((pa, pb)) => {
                let (mo_a, mo_b) = (pa.moments(), pb.moments());
                let mut status = Vec::new();
                for (sol, m) in [(&pa, ma), (&pb, mb)] {
                    if let Some(ratio) = sol.stats.boundary_growth {
                        failures.push(format!("{}: {}", point_label(m, *pump), Error::NonConvergent { ratio }));
                        status.push(format!("{}_non_convergent", m.label()));
                    }
                }
                let dq = match (mo_a.mandel_q, mo_b.mandel_q) {
                    (Some(x), Some(y)) => Some(x - y),
                    _ => {
                        status.push("q_undefined".into());
                        None
                    }
                };
                row.extend([
                    Cell::Num(distribution_distance(&pa.stats.p, &pb.stats.p)),
                    Cell::Num(mo_a.mean - mo_b.mean),
                    opt(dq),
                    Cell::Text(if status.is_empty() { "ok".into() } else { status.join(";") }),
                ]);
            }
            Err(e) => {
                failures.push(format!("{} vs {} at A/κ = {pump}: {e}", ma.label(), mb.label()));
                row.extend([Cell::Missing, Cell::Missing, Cell::Missing, Cell::Text(format!("error: {e}"))]);
            }
        }
        table.push(row);
    }
    Ok(RunOutput {
        command: Command::Compare,
        config_echo: cfg.resolved()?,
        table,
        failures,
        warnings: Vec::new(),
    })
}

/// Linewidth with and without the diagonal (C-type) operators.
pub fn run_linewidth(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let grid = point_grid(cfg)?;
    let results = parallel(cfg, grid.len(), |i| {
        let (m, pump) = grid[i];
        let sol = solve_point(cfg, &cfg.models[m], pump, None)?;
        let full = sol.linewidth(cfg.kappa, false)?;
        let bare = sol.linewidth(cfg.kappa, true)?;
        Ok::<_, Error>((sol, full, bare))
    })?;
    let mut table = Table::new(&[
        "model",
        "g_tau_bar",
        "pump_A_over_kappa",
        "mean_n",
        "linewidth_D",
        "normalized_D",
        "linewidth_D_without_C",
        "frequency_shift",
        "status",
    ]);
    let mut failures = Vec::new();
    for ((m, pump), res) in grid.iter().zip(results) {
        let model = &cfg.models[*m];
        let label = point_label(model, *pump);
        let mut row = vec![Cell::Text(model.label()), Cell::Num(cfg.g_tau_bar), Cell::Num(*pump)];
        match res {
            Ok((sol, full, bare)) => {
                let mut status = "ok".to_string();
                if let Some(ratio) = sol.stats.boundary_growth {
                    failures.push(format!("{label}: {}", Error::NonConvergent { ratio }));
                    status = "non_convergent".into();
                }
                row.extend([
                    Cell::Num(full.mean_n),
                    Cell::Num(full.d),
                    Cell::Num(full.normalized_d),
                    Cell::Num(bare.d),
                    Cell::Num(full.frequency_shift),
                    Cell::Text(status),
                ]);
            }
            Err(e) => {
                // below the mean-photon floor the linewidth is undefined, not failed
                if !matches!(e, Error::Undefined { .. }) {
                    failures.push(format!("{label}: {e}"));
                }
                row.extend([
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Missing,
                    Cell::Text(match e {
                        Error::Undefined { .. } => "linewidth_undefined".into(),
                        e => format!("error: {e}"),
                    }),
                ]);
            }
        }
        table.push(row);
    }
    Ok(RunOutput {
        command: Command::Linewidth,
        config_echo: cfg.resolved()?,
        table,
        failures,
        warnings: Vec::new(),
    })
}

/// Dispatches a subcommand.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunOutput> {
    match command {
        Command::Steady => run_steady(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Compare => run_compare(cfg),
        Command::Linewidth => run_linewidth(cfg),
    }
}
