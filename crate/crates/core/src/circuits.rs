//! Fixed Trotter-step circuits and the blocked parameterized ansatz.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::statevec::{GateAngle, PauliRotationGate, StateVector};

/// An ordered list of Pauli rotations on `num_qubits` qubits.
///
/// Parameter slots, when present, cover `0..num_parameters` contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<PauliRotationGate>,
    num_parameters: usize,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<PauliRotationGate>) -> Result<Self> {
        let mut seen = Vec::new();
        for (k, g) in gates.iter().enumerate() {
            if g.word.is_identity() {
                return Err(Error::InvalidGate(format!("gate {k} has empty support")));
            }
            if g.word.min_qubits() > num_qubits {
                return Err(Error::InvalidGate(format!(
                    "gate {k} ({}) outside a {num_qubits}-qubit register",
                    g.word
                )));
            }
            match g.angle {
                GateAngle::Fixed(a) if !a.is_finite() => {
                    return Err(Error::NumericInput(format!("gate {k} angle {a}")));
                }
                GateAngle::Fixed(_) => {}
                GateAngle::Slot(s) => {
                    if s >= seen.len() {
                        seen.resize(s + 1, false);
                    }
                    seen[s] = true;
                }
            }
        }
        if let Some(gap) = seen.iter().position(|used| !used) {
            return Err(Error::InvalidConfig(format!(
                "parameter slots are not contiguous: slot {gap} unused"
            )));
        }
        Ok(Circuit { num_qubits, gates, num_parameters: seen.len() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[PauliRotationGate] {
        &self.gates
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn is_fixed(&self) -> bool {
        self.num_parameters == 0
    }

    /// Applies every gate in order.
    pub fn apply(&self, state: &mut StateVector, params: &[f64]) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit circuit on a {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        if params.len() != self.num_parameters {
            return Err(Error::Shape(format!(
                "{} parameters for a circuit with {} slots",
                params.len(),
                self.num_parameters
            )));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::NumericInput(format!("parameter {bad}")));
        }
        self.apply_unchecked(state, params);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, state: &mut StateVector, params: &[f64]) {
        for g in &self.gates {
            state.rotate_unchecked(&g.word, g.resolve(params));
        }
    }
}

/// `(Π_k exp(-i c_k dt/p P_k))^p` with term order taken from `ps`.
///
/// Each factor is a rotation by `2 c_k dt / p`.
pub fn trotter_step_circuit(ps: &PauliSum, dt: f64, p: usize) -> Result<Circuit> {
    if p < 1 {
        return Err(Error::InvalidConfig("Trotter step count p must be >= 1".into()));
    }
    if !dt.is_finite() {
        return Err(Error::NumericInput(format!("time step {dt}")));
    }
    let mut gates = Vec::with_capacity(p * ps.len());
    for _ in 0..p {
        for t in ps.terms() {
            gates.push(PauliRotationGate::fixed(t.word, 2.0 * t.coeff * dt / p as f64));
        }
    }
    Circuit::new(ps.num_qubits(), gates)
}

/// Rotation angles that make one ansatz block equal to a single first-order
/// Trotter sub-step of length `dt`.
pub fn trotter_angles(ps: &PauliSum, dt: f64) -> Vec<f64> {
    ps.terms().iter().map(|t| 2.0 * t.coeff * dt).collect()
}

/// Real parameters partitioned into equal-size blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    block_size: usize,
}

impl ParamVector {
    pub fn zeros(num_blocks: usize, block_size: usize) -> Self {
        ParamVector { values: vec![0.0; num_blocks * block_size], block_size }
    }

    pub fn from_values(values: Vec<f64>, block_size: usize) -> Result<Self> {
        if block_size == 0 || values.len() % block_size != 0 {
            return Err(Error::Shape(format!(
                "{} values do not split into blocks of {block_size}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericInput(format!("parameter {bad}")));
        }
        Ok(ParamVector { values, block_size })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.values.len() / self.block_size
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        block * self.block_size..(block + 1) * self.block_size
    }

    pub fn block(&self, block: usize) -> &[f64] {
        &self.values[self.block_range(block)]
    }

    pub fn block_mut(&mut self, block: usize) -> &mut [f64] {
        let r = self.block_range(block);
        &mut self.values[r]
    }

    /// Elementwise sum; shapes must agree.
    pub fn add(&self, other: &ParamVector) -> Result<ParamVector> {
        if self.values.len() != other.values.len() || self.block_size != other.block_size {
            return Err(Error::Shape(format!(
                "cannot add parameter vectors of length {} and {}",
                self.values.len(),
                other.values.len()
            )));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(ParamVector { values, block_size: self.block_size })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `n` structurally identical copies of a parameterized template circuit.
///
/// Block `k` owns parameter slots `k * block_size .. (k + 1) * block_size`.
/// Blocks are applied to the input in index order, block 0 first.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedAnsatz {
    template: Circuit,
    num_blocks: usize,
    expanded: Circuit,
}

impl BlockedAnsatz {
    pub fn from_template(template: Circuit, num_blocks: usize) -> Result<Self> {
        if num_blocks < 1 {
            return Err(Error::InvalidConfig("ansatz needs at least one block".into()));
        }
        let l = template.num_parameters();
        if l == 0 {
            return Err(Error::InvalidConfig("ansatz template has no parameters".into()));
        }
        let mut gates = Vec::with_capacity(template.gates().len() * num_blocks);
        for k in 0..num_blocks {
            for g in template.gates() {
                gates.push(match g.angle {
                    GateAngle::Slot(s) => PauliRotationGate::parameterized(g.word, s + k * l),
                    GateAngle::Fixed(_) => *g,
                });
            }
        }
        let expanded = Circuit::new(template.num_qubits(), gates)?;
        Ok(BlockedAnsatz { template, num_blocks, expanded })
    }

    pub fn template(&self) -> &Circuit {
        &self.template
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn block_size(&self) -> usize {
        self.template.num_parameters()
    }

    pub fn num_parameters(&self) -> usize {
        self.expanded.num_parameters()
    }

    pub fn num_qubits(&self) -> usize {
        self.template.num_qubits()
    }

    /// The full circuit with block offsets applied to the slots.
    pub fn circuit(&self) -> &Circuit {
        &self.expanded
    }

    pub fn zero_parameters(&self) -> ParamVector {
        ParamVector::zeros(self.num_blocks, self.block_size())
    }
}

/// Ansatz whose block is one Trotter sub-step with every term's angle promoted
/// to its own parameter, so `block_size = m` and the total is `n * m`.
pub fn build_blocked_ansatz(ps: &PauliSum, n: usize) -> Result<BlockedAnsatz> {
    if n < 1 {
        return Err(Error::InvalidConfig("ansatz block count n must be >= 1".into()));
    }
    let gates = ps
        .terms()
        .iter()
        .enumerate()
        .map(|(k, t)| PauliRotationGate::parameterized(t.word, k))
        .collect();
    BlockedAnsatz::from_template(Circuit::new(ps.num_qubits(), gates)?, n)
}

/// `U(theta) |input>`.
pub fn evaluate(ansatz: &BlockedAnsatz, theta: &ParamVector, input: &StateVector) -> Result<StateVector> {
    let mut out = input.clone();
    ansatz.circuit().apply(&mut out, theta.as_slice())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{build_tfim, build_xyz, Pauli, PauliTerm, PauliWord};

    #[test]
    fn trotter_circuit_shape() {
        let h = build_tfim(4, -0.25, -1.0, false).unwrap();
        let c = trotter_step_circuit(&h, 0.05, 8).unwrap();
        assert_eq!(c.gates().len(), 8 * 7);
        assert!(c.is_fixed());
        match c.gates()[0].angle {
            GateAngle::Fixed(a) => assert!((a - 2.0 * 0.25 * 0.05 / 8.0).abs() < 1e-15),
            _ => panic!("expected a fixed angle"),
        }
        assert!(matches!(trotter_step_circuit(&h, 0.05, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn zero_step_trotter_is_identity() {
        let h = build_xyz(3, 1.0, 0.8, 0.6, false).unwrap();
        let c = trotter_step_circuit(&h, 0.0, 4).unwrap();
        let s = StateVector::random(3, 5);
        let mut t = s.clone();
        c.apply(&mut t, &[]).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn ansatz_parameter_counts() {
        let h = build_tfim(8, -0.25, -1.0, false).unwrap();
        let a = build_blocked_ansatz(&h, 2).unwrap();
        assert_eq!(a.block_size(), 15);
        assert_eq!(a.num_parameters(), 30);
        assert!(matches!(build_blocked_ansatz(&h, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn single_block_is_its_template() {
        let h = build_tfim(3, 1.0, 0.5, false).unwrap();
        let a = build_blocked_ansatz(&h, 1).unwrap();
        assert_eq!(a.circuit(), a.template());
    }

    #[test]
    fn block_slots_are_offset() {
        let h = build_tfim(3, 1.0, 0.5, false).unwrap();
        let a = build_blocked_ansatz(&h, 3).unwrap();
        let m = h.len();
        for (k, g) in a.circuit().gates().iter().enumerate() {
            assert_eq!(g.slot(), Some(k));
            assert_eq!(g.word, a.template().gates()[k % m].word);
        }
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let h = build_tfim(3, 1.0, 0.5, false).unwrap();
        let a = build_blocked_ansatz(&h, 2).unwrap();
        let theta = ParamVector::zeros(1, h.len());
        let s = StateVector::zero(3).unwrap();
        assert!(matches!(evaluate(&a, &theta, &s), Err(Error::Shape(_))));
    }

    #[test]
    fn non_contiguous_slots_rejected() {
        let w = PauliWord::single(0, Pauli::X).unwrap();
        let gates = vec![PauliRotationGate::parameterized(w, 1)];
        assert!(Circuit::new(1, gates).is_err());
        let far = PauliWord::single(3, Pauli::X).unwrap();
        assert!(matches!(
            Circuit::new(2, vec![PauliRotationGate::fixed(far, 0.1)]),
            Err(Error::InvalidGate(_))
        ));
    }

    #[test]
    fn param_vector_blocks() {
        let mut p = ParamVector::from_values((0..6).map(f64::from).collect(), 3).unwrap();
        assert_eq!(p.num_blocks(), 2);
        assert_eq!(p.block(1), &[3.0, 4.0, 5.0]);
        p.block_mut(0)[2] = 9.0;
        assert_eq!(p.as_slice()[2], 9.0);
        assert!(ParamVector::from_values(vec![0.0; 5], 3).is_err());
        assert!(ParamVector::from_values(vec![f64::NAN; 3], 3).is_err());
    }

    #[test]
    fn single_term_trotter_has_no_splitting_error() {
        let w = PauliWord::pair(0, Pauli::X, 1, Pauli::Y).unwrap();
        let h = PauliSum::new(2, vec![PauliTerm { coeff: 0.8, word: w }]).unwrap();
        let s = StateVector::random(2, 3);
        let exact = crate::pauli::exact_evolve(&h, &s, 0.3).unwrap();
        for p in [1, 3, 8] {
            let mut t = s.clone();
            trotter_step_circuit(&h, 0.3, p).unwrap().apply(&mut t, &[]).unwrap();
            for (a, b) in t.amplitudes().iter().zip(exact.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
