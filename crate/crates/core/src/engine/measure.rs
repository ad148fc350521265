//! Shot-sampled observable estimation with a stochastic Pauli noise model.

use std::f64::consts::FRAC_PI_2;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::pauli::{bits, Pauli, PauliSum, PauliWord};
use crate::statevec::StateVector;

/// Depolarizing error rates per gate and a symmetric readout flip rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub depolarizing_1q: f64,
    /// Applied after gates whose support has two or more qubits.
    pub depolarizing_2q: f64,
    pub readout_flip: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("depolarizing_1q", self.depolarizing_1q),
            ("depolarizing_2q", self.depolarizing_2q),
            ("readout_flip", self.readout_flip),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} is outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn gate_noise_free(&self) -> bool {
        self.depolarizing_1q == 0.0 && self.depolarizing_2q == 0.0
    }
}

/// A circuit with bound parameters acting on a fixed input state.
#[derive(Debug, Clone, Copy)]
pub struct StatePreparation<'a> {
    pub circuit: &'a Circuit,
    pub params: &'a [f64],
    pub initial: &'a StateVector,
}

impl StatePreparation<'_> {
    pub fn ideal_state(&self) -> Result<StateVector> {
        let mut s = self.initial.clone();
        self.circuit.apply(&mut s, self.params)?;
        Ok(s)
    }

    /// One noisy trajectory: after every gate, with the configured
    /// probability, a uniformly random non-identity Pauli on the gate's
    /// support is inserted.
    pub fn sample_trajectory(&self, noise: &NoiseSpec, rng: &mut impl Rng) -> Result<StateVector> {
        if self.params.len() != self.circuit.num_parameters()
            || self.initial.num_qubits() != self.circuit.num_qubits()
        {
            return Err(Error::Shape("preparation does not match its circuit".into()));
        }
        let mut s = self.initial.clone();
        for g in self.circuit.gates() {
            s.rotate_unchecked(&g.word, g.resolve(self.params));
            let support = g.word.support();
            let p = if support.len() == 1 { noise.depolarizing_1q } else { noise.depolarizing_2q };
            if p > 0.0 && rng.random::<f64>() < p {
                s.apply_word_unchecked(&random_pauli(&support, rng));
            }
        }
        Ok(s)
    }
}

fn random_pauli(support: &[usize], rng: &mut impl Rng) -> PauliWord {
    let choices = 4usize.pow(support.len() as u32) - 1;
    let mut code = rng.random_range(1..=choices);
    let mut letters = Vec::with_capacity(support.len());
    for &q in support {
        match code % 4 {
            1 => letters.push((q, Pauli::X)),
            2 => letters.push((q, Pauli::Y)),
            3 => letters.push((q, Pauli::Z)),
            _ => {}
        }
        code /= 4;
    }
    PauliWord::new(&letters).expect("distinct support qubits")
}

/// Rotates `state` so that measuring `word` becomes a Z-basis parity readout.
fn rotate_to_z_basis(state: &mut StateVector, word: &PauliWord) {
    for (q, letter) in word.letters() {
        match letter {
            Pauli::X => state.rotate_unchecked(&PauliWord::single(q, Pauli::Y).expect("q < 64"), -FRAC_PI_2),
            Pauli::Y => state.rotate_unchecked(&PauliWord::single(q, Pauli::X).expect("q < 64"), FRAC_PI_2),
            Pauli::Z => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEstimate {
    pub estimate: f64,
    /// Combined standard error, `sqrt(Σ c_k^2 s_k^2 / N_s)`.
    pub std_error: f64,
}

/// Estimates `<O>` from `shots` samples per Pauli term.
///
/// Shots are drawn in batches of `batch_size`; each batch uses a fresh noisy
/// trajectory of the preparation circuit, and each sampled bit on the term's
/// support is flipped with the readout error probability.
pub fn measure_observable_shots(
    prep: &StatePreparation<'_>,
    obs: &PauliSum,
    shots: usize,
    noise: &NoiseSpec,
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<ShotEstimate> {
    if shots < 1 {
        return Err(Error::InvalidConfig("shot count must be >= 1".into()));
    }
    if batch_size < 1 {
        return Err(Error::InvalidConfig("shot batch size must be >= 1".into()));
    }
    noise.validate()?;
    if obs.num_qubits() > prep.initial.num_qubits() {
        return Err(Error::Shape("observable larger than the register".into()));
    }
    let ideal = if noise.gate_noise_free() { Some(prep.ideal_state()?) } else { None };

    let mut estimate = 0.0;
    let mut variance = 0.0;
    for term in obs.terms() {
        let support = term.word.support_mask() as usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut remaining = shots;
        while remaining > 0 {
            let batch = remaining.min(batch_size);
            remaining -= batch;
            let mut state = match &ideal {
                Some(s) => s.clone(),
                None => prep.sample_trajectory(noise, rng)?,
            };
            rotate_to_z_basis(&mut state, &term.word);
            let dist = WeightedIndex::new(state.probabilities())
                .map_err(|e| Error::NumericFailure(format!("sampling distribution: {e}")))?;
            for _ in 0..batch {
                let mut outcome = dist.sample(rng);
                if noise.readout_flip > 0.0 {
                    for q in bits(support as u64) {
                        if rng.random::<f64>() < noise.readout_flip {
                            outcome ^= 1 << q;
                        }
                    }
                }
                let value = if (outcome & support).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += value;
                sum_sq += value * value;
            }
        }
        let n = shots as f64;
        let mean = sum / n;
        let sample_var = if shots > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        estimate += term.coeff * mean;
        variance += term.coeff * term.coeff * sample_var / n;
    }
    Ok(ShotEstimate { estimate, std_error: variance.sqrt() })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::circuits::build_blocked_ansatz;
    use crate::pauli::{build_tfim, magnetization, word_observable};

    fn prepared(n: usize) -> (Circuit, Vec<f64>, StateVector) {
        let h = build_tfim(n, -0.25, -1.0, false).unwrap();
        let a = build_blocked_ansatz(&h, 2).unwrap();
        let params: Vec<f64> = (0..a.num_parameters()).map(|k| 0.3 + 0.1 * k as f64).collect();
        (a.circuit().clone(), params, StateVector::zero(n).unwrap())
    }

    #[test]
    fn noise_validation() {
        let bad = NoiseSpec { readout_flip: 1.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidNoise(_))));
        let bad = NoiseSpec { depolarizing_1q: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(NoiseSpec::default().validate().is_ok());
    }

    #[test]
    fn basis_rotation_preserves_expectations() {
        let s = StateVector::random(3, 4);
        for word in ["X0", "Y1", "X0*Y2", "Z1*X2", "Y0*Y1*Y2"] {
            let w: PauliWord = word.parse().unwrap();
            let exact = s.matrix_element(&w, &s).unwrap().re;
            let mut r = s.clone();
            rotate_to_z_basis(&mut r, &w);
            let zs = PauliWord::from_masks(0, w.support_mask());
            let rotated = r.matrix_element(&zs, &r).unwrap().re;
            assert!((exact - rotated).abs() < 1e-12, "{word}: {exact} vs {rotated}");
        }
    }

    #[test]
    fn full_readout_randomization_kills_z() {
        let (c, p, s0) = prepared(2);
        let prep = StatePreparation { circuit: &c, params: &p, initial: &s0 };
        let noise = NoiseSpec { readout_flip: 0.5 - 1e-12, ..Default::default() };
        let z0 = word_observable(2, &[(0, Pauli::Z)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let est = measure_observable_shots(&prep, &z0, 20_000, &noise, 1000, &mut rng).unwrap();
        assert!(est.estimate.abs() < 4.0 * est.std_error.max(1.0 / 20_000f64.sqrt()), "{est:?}");
    }

    #[test]
    fn noiseless_estimates_match_within_four_sigma() {
        let (c, p, s0) = prepared(3);
        let prep = StatePreparation { circuit: &c, params: &p, initial: &s0 };
        let obs = magnetization(3, Pauli::X).unwrap();
        let exact = prep.ideal_state().unwrap().expectation(&obs).unwrap();
        let trials = 100;
        let inside = (0..trials)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let e = measure_observable_shots(&prep, &obs, 100_000, &NoiseSpec::default(), 4096, &mut rng).unwrap();
                (e.estimate - exact).abs() <= 4.0 * e.std_error
            })
            .count();
        assert!(inside >= 99, "{inside}/{trials} trials within 4 sigma");
    }

    #[test]
    fn std_error_halves_with_four_times_the_shots() {
        let (c, p, s0) = prepared(2);
        let prep = StatePreparation { circuit: &c, params: &p, initial: &s0 };
        let obs = build_tfim(2, -0.25, -1.0, false).unwrap();
        let noise = NoiseSpec { depolarizing_1q: 1e-3, depolarizing_2q: 1e-2, readout_flip: 0.0 };
        let mean_err = |shots: usize| {
            (0..50)
                .map(|seed| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    measure_observable_shots(&prep, &obs, shots, &noise, 256, &mut rng).unwrap().std_error
                })
                .sum::<f64>()
                / 50.0
        };
        let ratio = mean_err(1024) / mean_err(4096);
        assert!((ratio - 2.0).abs() <= 0.4, "ratio {ratio}");
    }

    #[test]
    fn zero_shots_rejected() {
        let (c, p, s0) = prepared(2);
        let prep = StatePreparation { circuit: &c, params: &p, initial: &s0 };
        let obs = magnetization(2, Pauli::Z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(measure_observable_shots(&prep, &obs, 0, &NoiseSpec::default(), 10, &mut rng).is_err());
    }

    #[test]
    fn random_pauli_is_never_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let w = random_pauli(&[2, 5], &mut rng);
            assert!(!w.is_identity());
            assert_eq!(w.support_mask() & !0b100100, 0);
        }
    }
}
