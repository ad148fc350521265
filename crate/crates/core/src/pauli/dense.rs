//! Dense realization of Pauli sums and the exact propagator built from a full
//! eigendecomposition.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::PauliSum;
use crate::error::{Error, Result};
use crate::statevec::StateVector;

/// Largest register for which dense matrices are built.
pub const MAX_DENSE_QUBITS: usize = 14;

/// A `2^N x 2^N` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Largest entrywise modulus of `A - A^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.matrix.adjoint();
        (&self.matrix - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue.
    pub fn ground_energy(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn apply(&self, state: &StateVector) -> Result<DVector<Complex64>> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit operator applied to {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        Ok(&self.matrix * DVector::from_column_slice(state.amplitudes()))
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capacity(format!(
            "dense operators are limited to {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Builds `Σ_k c_k P_k` as a dense matrix. Each word is a signed permutation,
/// so column `b` of `P_k` has a single entry at row `b ^ x_mask`.
pub fn dense_matrix(ps: &PauliSum) -> Result<DenseOperator> {
    let n = ps.num_qubits();
    check_capacity(n)?;
    let dim = 1usize << n;
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for term in ps.terms() {
        let word = term.word;
        let yp = word.y_phase();
        let flip = word.x_mask() as usize;
        for b in 0..dim {
            matrix[(b ^ flip, b)] += word.basis_phase(yp, b) * term.coeff;
        }
    }
    Ok(DenseOperator { num_qubits: n, matrix })
}

/// Exact time evolution `e^{-iHt}` through `V e^{-iΛt} V^dagger`.
#[derive(Debug, Clone)]
pub struct ExactEvolver {
    num_qubits: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl ExactEvolver {
    /// Diagonalizes `H`. Real-symmetric Hamiltonians (no odd-Y words) take the
    /// cheaper real path.
    pub fn new(ps: &PauliSum) -> Result<Self> {
        let op = dense_matrix(ps)?;
        let (eigenvalues, eigenvectors) = if ps.is_real() {
            let real = op.matrix.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            )
        } else {
            let eig = SymmetricEigen::new(op.matrix);
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };
        Ok(ExactEvolver {
            num_qubits: ps.num_qubits(),
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if !t.is_finite() {
            return Err(Error::NumericInput(format!("evolution time {t}")));
        }
        if state.num_qubits() != self.num_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit propagator applied to {}-qubit state",
                self.num_qubits,
                state.num_qubits()
            )));
        }
        let psi = DVector::from_column_slice(state.amplitudes());
        let mut coeffs = self.eigenvectors.ad_mul(&psi);
        for (c, &e) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.eigenvectors * coeffs;
        StateVector::from_amplitudes(self.num_qubits, out.as_slice().to_vec())
    }
}

type EvolverCache = RwLock<HashMap<String, Arc<ExactEvolver>>>;

fn cache() -> &'static EvolverCache {
    static CACHE: OnceLock<EvolverCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

impl ExactEvolver {
    /// Shared, process-wide propagator for `ps`. The diagonalization runs once
    /// per distinct Hamiltonian; later calls only take a read lock.
    pub fn cached(ps: &PauliSum) -> Result<Arc<ExactEvolver>> {
        check_capacity(ps.num_qubits())?;
        let key = format!("{}\n{}", ps.num_qubits(), ps);
        if let Some(hit) = cache().read().expect("evolver cache poisoned").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let mut guard = cache().write().expect("evolver cache poisoned");
        if let Some(hit) = guard.get(&key) {
            return Ok(Arc::clone(hit));
        }
        let evolver = Arc::new(ExactEvolver::new(ps)?);
        guard.insert(key, Arc::clone(&evolver));
        Ok(evolver)
    }
}

/// `e^{-iHt} |state>` using the cached eigendecomposition of `H`.
pub fn exact_evolve(ps: &PauliSum, state: &StateVector, t: f64) -> Result<StateVector> {
    ExactEvolver::cached(ps)?.evolve(state, t)
}

/// `1 - |<a|b>|^2`, clamped into `[0, 1]`.
pub fn infidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = a.inner(b)?;
    Ok((1.0 - overlap.norm_sqr()).clamp(0.0, 1.0))
}
