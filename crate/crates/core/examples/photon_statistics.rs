//! Steady-state photon statistics of the exact, weak-coupling and uniform
//! models side by side, at weak and at stronger coupling.

use micromaser::generators::{ModelKind, ModelSpec};
use micromaser::kraus::PumpParameters;
use micromaser::observables::{distribution_distance, moments};
use micromaser::steady::{choose_truncation, default_cutoff, model_recurrence, DEFAULT_TRUNCATION_CAP};

fn main() -> micromaser::Result<()> {
    let kappa = 1.0;
    let pump = 2.0;
    for gtau in [0.03, 0.15] {
        let params = PumpParameters::from_pump(pump, kappa, gtau)?;
        let exact = ModelSpec::new(ModelKind::Exact, params);
        let space = choose_truncation(&exact, kappa, 1e-12, DEFAULT_TRUNCATION_CAP)?;
        let reference = model_recurrence(&exact, kappa, space, None)?;
        println!("gτ̄ = {gtau}, A/κ = {pump}, n_max = {}", space.n_max());

        for kind in [ModelKind::Exact, ModelKind::WeakLindblad, ModelKind::UniformLindblad] {
            let spec = ModelSpec::new(kind, params);
            // the weak-coupling distribution is cut off where its gain bracket turns up
            let cutoff = (kind == ModelKind::WeakLindblad).then(|| default_cutoff(gtau)).transpose()?;
            let stats = model_recurrence(&spec, kappa, space, cutoff)?;
            let m = moments(&stats.p);
            println!(
                "  {:<17} ⟨n⟩ = {:>9.3}  Q = {:>6.3}  distance to exact = {:.2e}{}",
                kind.name(),
                m.mean,
                m.mandel_q.unwrap_or(f64::NAN),
                distribution_distance(&stats.p, &reference.p),
                if stats.converged() { "" } else { "  (grows at the cutoff)" }
            );
        }
    }
    Ok(())
}
