//! Mean photon number, Mandel Q and the normalized linewidth D⟨n⟩/κ versus
//! pump for all models, written as CSV through the sweep runner.

use micromaser::generators::ModelKind;
use micromaser::runner::{run, Command, PumpSpec, RunConfig};

fn main() -> micromaser::Result<()> {
    let cfg = RunConfig::new(
        ModelKind::ALL.to_vec(),
        0.1,
        PumpSpec::Range {
            start: 0.5,
            stop: 3.0,
            steps: 6,
        },
    );
    let out = run(Command::Sweep, &cfg)?;
    print!("{}", out.to_csv()?);
    for f in &out.failures {
        eprintln!("failed: {f}");
    }

    // how much of the linewidth comes from the diagonal operators
    let cfg = RunConfig::new(vec![ModelKind::Exact, ModelKind::Heuristic], 0.1, PumpSpec::List(vec![2.0]));
    print!("{}", run(Command::Linewidth, &cfg)?.to_csv()?);
    Ok(())
}
