//! The fourth-order master equation is not of Lindblad form: its photon
//! distribution turns negative beyond n = ¼(gτ̄)⁻². The Lindblad
//! weak-coupling model at the same parameters stays non-negative.

use micromaser::fock::TruncatedSpace;
use micromaser::generators::{ModelKind, ModelSpec};
use micromaser::kraus::PumpParameters;
use micromaser::steady::model_recurrence;

fn main() -> micromaser::Result<()> {
    let gtau: f64 = 0.15;
    let params = PumpParameters::from_pump(2.0, 1.0, gtau)?;
    let space = TruncatedSpace::new(44)?;
    let post4 = model_recurrence(&ModelSpec::new(ModelKind::Post4, params), 1.0, space, None)?;
    let weak = model_recurrence(&ModelSpec::new(ModelKind::WeakLindblad, params), 1.0, space, None)?;

    println!("sign change expected beyond n = {:.2}", 0.25 / (gtau * gtau));
    println!("{:>3} {:>14} {:>14}", "n", "post4", "weak_lindblad");
    for n in (0..=space.n_max()).step_by(4).chain([11, 12, 13]) {
        println!("{n:>3} {:>14.6e} {:>14.6e}", post4.p[n], weak.p[n]);
    }
    println!("post4 negative entries: {}", post4.negativity_report.len());
    println!("weak_lindblad negative entries: {}", weak.negativity_report.len());
    Ok(())
}
