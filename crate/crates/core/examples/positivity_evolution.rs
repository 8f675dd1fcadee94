//! Evolves a coherent superposition under each model and tracks the lowest
//! eigenvalue of ρ(t). Lindblad generators keep it non-negative; the
//! fourth-order generator need not.

use nalgebra::DMatrix;

use micromaser::fock::{DensityMatrix, TruncatedSpace, C64};
use micromaser::generators::{ModelKind, ModelSpec};
use micromaser::kraus::PumpParameters;

fn main() -> micromaser::Result<()> {
    let space = TruncatedSpace::new(30)?;
    let params = PumpParameters::from_pump(3.0, 1.0, 0.15)?;
    // (|0⟩ + |12⟩)/√2
    let mut psi = vec![0.0; space.dim()];
    psi[0] = std::f64::consts::FRAC_1_SQRT_2;
    psi[12] = std::f64::consts::FRAC_1_SQRT_2;
    let rho0 = DensityMatrix::new(space, DMatrix::from_fn(space.dim(), space.dim(), |i, j| C64::new(psi[i] * psi[j], 0.0)))?;

    for kind in ModelKind::ALL {
        let sup = ModelSpec::new(kind, params).build(space)?.assemble(1.0)?;
        print!("{:<17}", kind.name());
        for t in [0.1, 1.0, 10.0] {
            let rho = sup.evolve(&rho0, t)?;
            print!("  t = {t:<4} min eig {:+.2e}", rho.validate().min_eigenvalue);
        }
        println!();
    }
    Ok(())
}
