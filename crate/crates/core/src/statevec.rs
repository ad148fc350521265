//! Dense statevectors and in-place Pauli-rotation kernels.
//!
//! Qubit 0 is the least-significant bit of the amplitude index. A rotation
//! with angle `a` about Pauli word `P` is `exp(-i a/2 P)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliWord};

/// Largest register a statevector may hold.
pub const MAX_QUBITS: usize = 24;

/// Tolerance on the imaginary residue of an expectation value.
const HERMITIAN_RESIDUE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidSize(format!(
            "statevectors hold 1..={MAX_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::Shape(format!("basis index {index} outside dimension {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    /// Product state with the listed qubits in `|1>` and the rest in `|0>`.
    pub fn product(num_qubits: usize, ones: &[usize]) -> Result<Self> {
        let mut index = 0usize;
        for &q in ones {
            if q >= num_qubits {
                return Err(Error::InvalidGate(format!(
                    "qubit {q} outside a {num_qubits}-qubit register"
                )));
            }
            index |= 1 << q;
        }
        Self::basis(num_qubits, index)
    }

    /// Wraps raw amplitudes. The length must be `2^num_qubits`; the norm is
    /// not checked, see [`StateVector::normalize`].
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(num_qubits)?;
        if amps.len() != 1usize << num_qubits {
            return Err(Error::Shape(format!(
                "{} amplitudes for {num_qubits} qubits",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NumericInput("non-finite amplitude".into()));
        }
        Ok(StateVector { num_qubits, amps })
    }

    /// Normalized state with uniformly drawn real and imaginary parts.
    pub fn random(num_qubits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1usize << num_qubits;
        let amps = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector { num_qubits, amps };
        s.normalize();
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scale(&mut self, factor: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= factor);
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_same_shape(&self, other: &StateVector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit vs {}-qubit state",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(())
    }

    /// `<self|other>`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn check_word(&self, word: &PauliWord) -> Result<()> {
        if word.min_qubits() > self.num_qubits {
            return Err(Error::InvalidGate(format!(
                "word {word} acts outside a {}-qubit register",
                self.num_qubits
            )));
        }
        Ok(())
    }

    /// Applies `exp(-i angle/2 P)` after validating the support and angle.
    pub fn rotate(&mut self, word: &PauliWord, angle: f64) -> Result<()> {
        if !angle.is_finite() {
            return Err(Error::NumericInput(format!("rotation angle {angle}")));
        }
        self.check_word(word)?;
        self.rotate_unchecked(word, angle);
        Ok(())
    }

    /// Rotation kernel; O(2^N), no allocation.
    pub(crate) fn rotate_unchecked(&mut self, word: &PauliWord, angle: f64) {
        if angle == 0.0 {
            return;
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let flip = word.x_mask() as usize;
        let z = word.z_mask() as usize;
        if flip == 0 {
            let plus = Complex64::new(c, -s);
            let minus = Complex64::new(c, s);
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= if (b & z).count_ones() % 2 == 0 { plus } else { minus };
            }
            return;
        }
        let yp = word.y_phase();
        // -i sin(a/2) folded into the phase of P
        let mis = Complex64::new(0.0, -s);
        let high = 1usize << (usize::BITS - 1 - flip.leading_zeros());
        let low_mask = high - 1;
        for k in 0..self.amps.len() / 2 {
            let b = ((k & !low_mask) << 1) | (k & low_mask);
            let b2 = b ^ flip;
            let a = self.amps[b];
            let a2 = self.amps[b2];
            self.amps[b] = a * c + mis * word.basis_phase(yp, b2) * a2;
            self.amps[b2] = a2 * c + mis * word.basis_phase(yp, b) * a;
        }
    }

    /// Applies the Pauli word itself (a unitary, Hermitian operator).
    pub fn apply_word(&mut self, word: &PauliWord) -> Result<()> {
        self.check_word(word)?;
        self.apply_word_unchecked(word);
        Ok(())
    }

    pub(crate) fn apply_word_unchecked(&mut self, word: &PauliWord) {
        let yp = word.y_phase();
        let flip = word.x_mask() as usize;
        if flip == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= word.basis_phase(yp, b);
            }
            return;
        }
        let high = 1usize << (usize::BITS - 1 - flip.leading_zeros());
        let low_mask = high - 1;
        for k in 0..self.amps.len() / 2 {
            let b = ((k & !low_mask) << 1) | (k & low_mask);
            let b2 = b ^ flip;
            let a = self.amps[b];
            let a2 = self.amps[b2];
            self.amps[b] = word.basis_phase(yp, b2) * a2;
            self.amps[b2] = word.basis_phase(yp, b) * a;
        }
    }

    /// `<self| P |other>` without materializing `P|other>`.
    pub fn matrix_element(&self, word: &PauliWord, other: &StateVector) -> Result<Complex64> {
        self.check_same_shape(other)?;
        self.check_word(word)?;
        Ok(self.matrix_element_unchecked(word, other))
    }

    pub(crate) fn matrix_element_unchecked(&self, word: &PauliWord, other: &StateVector) -> Complex64 {
        let yp = word.y_phase();
        let flip = word.x_mask() as usize;
        other
            .amps
            .iter()
            .enumerate()
            .map(|(b, a)| self.amps[b ^ flip].conj() * word.basis_phase(yp, b) * a)
            .sum()
    }

    /// `<self|O|self>` for a Pauli sum.
    pub fn expectation(&self, obs: &PauliSum) -> Result<f64> {
        if obs.num_qubits() > self.num_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit observable on a {}-qubit state",
                obs.num_qubits(),
                self.num_qubits
            )));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for t in obs.terms() {
            total += self.matrix_element_unchecked(&t.word, self) * t.coeff;
        }
        if total.im.abs() > HERMITIAN_RESIDUE * (1.0 + total.re.abs()) {
            return Err(Error::NonHermitian(format!(
                "expectation has imaginary part {}",
                total.im
            )));
        }
        Ok(total.re)
    }
}

/// Rotation about a Pauli word whose angle is either fixed or read from a
/// parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliRotationGate {
    pub word: PauliWord,
    pub angle: GateAngle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateAngle {
    Fixed(f64),
    Slot(usize),
}

impl PauliRotationGate {
    pub fn fixed(word: PauliWord, angle: f64) -> Self {
        PauliRotationGate { word, angle: GateAngle::Fixed(angle) }
    }

    pub fn parameterized(word: PauliWord, slot: usize) -> Self {
        PauliRotationGate { word, angle: GateAngle::Slot(slot) }
    }

    pub fn slot(&self) -> Option<usize> {
        match self.angle {
            GateAngle::Slot(s) => Some(s),
            GateAngle::Fixed(_) => None,
        }
    }

    /// Resolves the angle against `params`; fixed gates ignore them.
    #[inline]
    pub fn resolve(&self, params: &[f64]) -> f64 {
        match self.angle {
            GateAngle::Fixed(a) => a,
            GateAngle::Slot(s) => params[s],
        }
    }
}

/// Applies `exp(-i angle/2 P)` for the gate's word with an explicit angle.
pub fn apply_pauli_rotation(state: &mut StateVector, gate: &PauliRotationGate, angle: f64) -> Result<()> {
    state.rotate(&gate.word, angle)
}

/// `<a|b>`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}

/// `<state|O|state>`.
pub fn expectation(state: &StateVector, observable: &PauliSum) -> Result<f64> {
    state.expectation(observable)
}
