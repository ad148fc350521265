//! Warm starting newly selected blocks from the previously optimized one.

use pvqd::engine::{run_evolution, EvolutionConfig};
use pvqd::pauli::build_tfim;
use pvqd::sweep::{SweepKind, SweepPolicy};

fn main() -> pvqd::Result<()> {
    let h = build_tfim(4, -0.25, -1.0, false)?;
    for (zeta, increment) in [(0.0, false), (-0.05, false), (-0.1, false), (-0.05, true)] {
        let mut cfg = EvolutionConfig::new(h.clone(), 2, 0.05, 100);
        cfg.policy = SweepPolicy {
            warm_start_zeta: zeta,
            warm_start_use_increment: increment,
            ..SweepPolicy::of_kind(SweepKind::Fidelity)
        };
        let s = run_evolution(&cfg)?.summary;
        let source = if increment { "update" } else { "parameters" };
        println!("zeta {zeta:>5} from {source:<10}: mean iterations {:.3}, infidelity {:.3e}", s.mean_iterations, s.mean_infidelity);
    }
    Ok(())
}
