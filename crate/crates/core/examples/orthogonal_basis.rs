//! Orthonormal polynomials for interaction-time distributions. For the
//! exponential distribution they are the Laguerre polynomials; the
//! expansion coefficients of xⁿ reproduce the moments n!.

use micromaser::measure::{build_basis, TimeMeasure};

fn main() -> micromaser::Result<()> {
    let exponential = build_basis(&TimeMeasure::exponential(1.0)?, 4)?;
    for k in 0..=4 {
        println!("f_{k} coefficients: {:?}", exponential.coeffs(k));
    }
    println!("orthonormality defect: {:.1e}", exponential.orthonormality_defect());
    for (n, m) in [(1, 1), (2, 3), (4, 4)] {
        println!("Σ_k a_{n}k a_{m}k = {} ", exponential.cross_moment_identity(n, m)?);
    }

    // a uniform distribution of transit times on [0, 2τ̄]
    let uniform = TimeMeasure::from_density(|_| 0.5, 0.0, 2.0)?;
    let basis = build_basis(&uniform, 2)?;
    println!("uniform on [0, 2]: mean {:.6}", uniform.mean());
    for k in 0..=2 {
        println!("  f_{k} coefficients: {:?}", basis.coeffs(k));
    }
    Ok(())
}
