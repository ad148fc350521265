//! First-order Trotter circuits against the exact propagator.

use pvqd::circuits::trotter_step_circuit;
use pvqd::pauli::{build_tfim, exact_evolve, infidelity};
use pvqd::statevec::StateVector;

fn main() -> pvqd::Result<()> {
    let h = build_tfim(6, -0.25, -1.0, false)?;
    let s0 = StateVector::zero(6)?;
    let t = 0.5;
    let exact = exact_evolve(&h, &s0, t)?;
    println!("{:>6} {:>14}", "p", "infidelity");
    for p in [1, 2, 4, 8, 16, 32] {
        let mut s = s0.clone();
        trotter_step_circuit(&h, t, p)?.apply(&mut s, &[])?;
        println!("{p:>6} {:>14.3e}", infidelity(&exact, &s)?);
    }
    Ok(())
}
