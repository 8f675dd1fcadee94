//! Kraus operators of the coarse-grained pump map over a step Δt, their
//! completeness relation, and the generator they converge to as Δt → 0.

use micromaser::fock::TruncatedSpace;
use micromaser::kraus::{averaged_pump_superoperator, kraus_operators, PumpParameters};
use micromaser::measure::TimeMeasure;

fn main() -> micromaser::Result<()> {
    let space = TruncatedSpace::new(30)?;
    let gtau = 0.8;
    let params = PumpParameters::new(1.0, gtau, 5.0)?;
    for dt in [0.1, 0.01, 0.001] {
        let set = kraus_operators(space, &params, gtau, dt)?;
        println!(
            "Δt = {dt:<6} {} operators, interior defect {:.1e}, boundary defect {:.1e}",
            set.operators.len(),
            set.completeness_defect(),
            set.boundary_defect()
        );
    }

    // with a point-mass transit time the Kraus generator is exact for every Δt
    let measure = TimeMeasure::point_mass(gtau)?;
    let exact = averaged_pump_superoperator(space, &params, &measure)?;
    let from_kraus = kraus_operators(space, &params, gtau, 0.01)?.generator();
    println!(
        "max |S_kraus − S| below the boundary: {:.1e}",
        from_kraus.max_abs_diff_below(&exact, space.n_max())
    );
    Ok(())
}
