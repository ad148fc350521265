//! Shot-sampled observables with depolarizing and readout noise.

use pvqd::engine::{measure_observable_shots, NoiseSpec, StatePreparation};
use pvqd::circuits::{build_blocked_ansatz, ParamVector};
use pvqd::pauli::{build_tfim, magnetization, Pauli};
use pvqd::statevec::StateVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> pvqd::Result<()> {
    let h = build_tfim(4, -0.25, -1.0, false)?;
    let ansatz = build_blocked_ansatz(&h, 2)?;
    let theta = ParamVector::from_values((0..ansatz.num_parameters()).map(|k| 0.1 * (k as f64).sin()).collect(), h.len())?;
    let s0 = StateVector::zero(4)?;
    let prep = StatePreparation { circuit: ansatz.circuit(), params: theta.as_slice(), initial: &s0 };
    let obs = magnetization(4, Pauli::Z)?;
    println!("exact <Z>: {:.5}", prep.ideal_state()?.expectation(&obs)?);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let noises = [
        ("ideal", NoiseSpec::default()),
        ("gates", NoiseSpec { depolarizing_1q: 1e-3, depolarizing_2q: 1e-2, readout_flip: 0.0 }),
        ("gates+readout", NoiseSpec { depolarizing_1q: 1e-3, depolarizing_2q: 1e-2, readout_flip: 0.02 }),
    ];
    for (label, noise) in noises {
        for shots in [1024, 4096, 16384] {
            let est = measure_observable_shots(&prep, &obs, shots, &noise, 16, &mut rng)?;
            println!("{label:<14} {shots:>6} shots: {:.5} +- {:.5}", est.estimate, est.std_error);
        }
    }
    Ok(())
}
