//! Dense Kronecker-product reference used by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use pvqd::pauli::{Pauli, PauliSum, PauliWord};
use pvqd::statevec::StateVector;

pub type Matrix = Vec<Vec<Complex64>>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn single(p: Option<Pauli>) -> Matrix {
    match p {
        None => vec![vec![ONE, ZERO], vec![ZERO, ONE]],
        Some(Pauli::X) => vec![vec![ZERO, ONE], vec![ONE, ZERO]],
        Some(Pauli::Y) => vec![vec![ZERO, -I], vec![I, ZERO]],
        Some(Pauli::Z) => vec![vec![ONE, ZERO], vec![ZERO, -ONE]],
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![ZERO; ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Full matrix of a Pauli word; qubit 0 is the rightmost Kronecker factor.
pub fn word_matrix(word: &PauliWord, n: usize) -> Matrix {
    let mut m = vec![vec![ONE]];
    for q in (0..n).rev() {
        m = kron(&m, &single(word.letter(q)));
    }
    m
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim).map(|i| (0..dim).map(|j| if i == j { ONE } else { ZERO }).collect()).collect()
}

pub fn add_scaled(a: &Matrix, b: &Matrix, s: Complex64) -> Matrix {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + s * y).collect()).collect()
}

pub fn sum_matrix(ps: &PauliSum) -> Matrix {
    let dim = 1 << ps.num_qubits();
    let mut m = vec![vec![ZERO; dim]; dim];
    for t in ps.terms() {
        m = add_scaled(&m, &word_matrix(&t.word, ps.num_qubits()), Complex64::new(t.coeff, 0.0));
    }
    m
}

/// `exp(-i a/2 P) = cos(a/2) I - i sin(a/2) P`.
pub fn rotation_matrix(word: &PauliWord, n: usize, angle: f64) -> Matrix {
    let p = word_matrix(word, n);
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(angle / 2.0).sin());
    add_scaled(&identity(1 << n).iter().map(|r| r.iter().map(|x| x * c).collect()).collect(), &p, s)
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `|<a|b>|`, insensitive to global phase.
pub fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).unwrap().norm()
}

/// Infidelity between two states, computed directly from amplitudes.
pub fn state_error(a: &StateVector, b: &StateVector) -> f64 {
    1.0 - overlap(a, b).powi(2)
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// `exp(-i H t)` by scaling and squaring a truncated Taylor series.
pub fn expm_minus_i(h: &Matrix, t: f64) -> Matrix {
    let dim = h.len();
    let norm: f64 = h.iter().map(|r| r.iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let scale = Complex64::new(0.0, -t / f64::from(1u32 << squarings));
    let a: Matrix = h.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut result = identity(dim);
    let mut term = identity(dim);
    for k in 1..=30 {
        term = mat_mul(&term, &a).into_iter().map(|r| r.into_iter().map(|x| x / k as f64).collect()).collect();
        result = add_scaled(&result, &term, ONE);
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    result
}
