//! The four block-selection policies on the same 6-qubit problem.

use pvqd::engine::{ising_observables, run_evolution, EvolutionConfig};
use pvqd::pauli::build_tfim;
use pvqd::sweep::{SweepKind, SweepPolicy};

fn main() -> pvqd::Result<()> {
    let h = build_tfim(6, -0.25, -1.0, false)?;
    for (blocks, kind) in [
        (1, SweepKind::Full),
        (2, SweepKind::Full),
        (2, SweepKind::Sequential),
        (2, SweepKind::Random),
        (2, SweepKind::Fidelity),
    ] {
        let mut cfg = EvolutionConfig::new(h.clone(), blocks, 0.02, 50);
        cfg.observables = ising_observables(6)?;
        cfg.policy = SweepPolicy::of_kind(kind);
        cfg.run_seed = 3;
        let run = run_evolution(&cfg)?;
        let s = &run.summary;
        println!(
            "{kind:?}({blocks}): infidelity {:.3e}, energy error {:.5}, params/step {}, iterations {}",
            s.mean_infidelity, s.observables[0].mean_abs_error, s.mean_optimized_parameters, s.total_iterations
        );
        let visits: String = run.records.iter().map(|r| if r.active_blocks.len() == blocks { '*' } else { char::from(b'0' + r.active_blocks[0] as u8) }).collect();
        println!("  blocks: {visits}");
    }
    Ok(())
}
