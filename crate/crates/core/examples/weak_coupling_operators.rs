//! The weak-coupling Lindblad operators built from the orthogonal
//! expansion, their relation to the fourth-order generator, and the
//! corresponding gain bracket.

use micromaser::fock::TruncatedSpace;
use micromaser::generators::{general_weak_model, post_lindblad_4th, sixth_order_terms, weak_coupling_model};
use micromaser::kraus::PumpParameters;
use micromaser::measure::{build_basis, TimeMeasure};

fn main() -> micromaser::Result<()> {
    let gtau: f64 = 0.1;
    let params = PumpParameters::from_pump(1.5, 1.0, gtau)?;
    let space = TruncatedSpace::new(20)?;
    let basis = build_basis(&TimeMeasure::exponential(params.tau_bar)?, 3)?;

    let general = general_weak_model(&params, space, &basis, 3)?;
    for op in &general.lindblad_ops {
        println!("{:<4} ⟨1|L|0⟩ = {:+.6e}  ⟨0|L|0⟩ = {:+.6e}", op.label, op.op.get(1, 0).re, op.op.get(0, 0).re);
    }
    for note in &general.notes {
        println!("note: {note}");
    }

    let printed = weak_coupling_model(&params, space);
    let gap = general.pump_superoperator().max_abs_diff(&printed.pump_superoperator());
    println!("general expansion vs written-out operators: {gap:.1e}");

    let fourth = printed.pump_superoperator().sub(&sixth_order_terms(&params, space));
    println!("minus sixth order vs fourth-order generator: {:.1e}", fourth.max_abs_diff(&post_lindblad_4th(&params, space)));

    let a = params.linear_gain();
    for (n, g) in printed.gain_rates().iter().enumerate().step_by(5) {
        let u = (n + 1) as f64;
        println!("n = {n:>2}: gain/(n+1) = {:.6}, bracket·A = {:.6}", g / u, a * (1.0 - 4.0 * gtau * gtau * u + 10.0 * gtau.powi(4) * u * u));
    }
    Ok(())
}
