//! One projected evolution of the 4-qubit transverse-field Ising chain.

use pvqd::engine::{ising_observables, run_evolution, EvolutionConfig};
use pvqd::pauli::build_tfim;

fn main() -> pvqd::Result<()> {
    let mut cfg = EvolutionConfig::new(build_tfim(4, -0.25, -1.0, false)?, 2, 0.05, 40);
    cfg.observables = ising_observables(4)?;
    let run = run_evolution(&cfg)?;
    println!("{:>5} {:>6} {:>10} {:>10} {:>11}", "step", "t", "E_sim", "E_exact", "infidelity");
    for r in run.records.iter().step_by(5) {
        println!("{:>5} {:>6.2} {:>10.5} {:>10.5} {:>11.3e}", r.step, r.time, r.simulated[0], r.exact[0], r.infidelity);
    }
    for o in &run.summary.observables {
        println!("{}: mean |error| {:.5}", o.name, o.mean_abs_error);
    }
    Ok(())
}
