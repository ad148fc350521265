//! Widening the fidelity sweep after repeated above-threshold steps.

use pvqd::engine::{run_evolution, EvolutionConfig};
use pvqd::pauli::build_xyz;
use pvqd::sweep::{Escalation, SweepKind, SweepPolicy};

fn main() -> pvqd::Result<()> {
    let mut cfg = EvolutionConfig::new(build_xyz(6, 1.0, 0.8, 0.6, false)?, 3, 0.05, 30);
    cfg.policy = SweepPolicy {
        escalation: Some(Escalation { stagnation_window: 5, max_simultaneous_blocks: 3 }),
        ..SweepPolicy::of_kind(SweepKind::Fidelity)
    };
    let threshold = cfg.policy.loss_threshold;
    let run = run_evolution(&cfg)?;
    for r in &run.records {
        let mark = if r.loss > threshold { "above" } else { "below" };
        println!("step {:>3}  blocks {:?}  loss {:.3e} ({mark})", r.step, r.active_blocks, r.loss);
    }
    Ok(())
}
