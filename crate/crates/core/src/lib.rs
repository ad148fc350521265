//! Projected variational quantum dynamics (PVQD) on a dense statevector
//! simulator, with blockwise parameter sweeping.
//!
//! Each time step projects the Trotter-evolved state `T(dt) U(theta)|0>`
//! back onto a blocked ansatz by minimizing
//! `(1 - |<phi|U(theta + dtheta)|0>|^2) / dt^2` over the parameter update.
//! A [`sweep::SweepPolicy`] decides which ansatz blocks are free in each
//! step: all of them (standard PVQD), one at a time in order, one at random,
//! or the fidelity rule that only moves on once the loss is small enough.
//!
//! Modules, bottom up:
//!
//! - [`statevec`]: statevectors and in-place Pauli rotations `exp(-i a/2 P)`.
//! - [`pauli`]: Pauli words and sums, model Hamiltonians, exact evolution.
//! - [`circuits`]: Trotter step circuits and the blocked ansatz.
//! - [`variational`]: the projection loss, its adjoint gradient, L-BFGS and SPSA.
//! - [`sweep`]: block selection, escalation and warm starting.
//! - [`engine`]: the evolution loop, telemetry, and shot-sampled readout.
//! - [`experiment`]: JSON experiment specs, presets, multi-seed runs and CSV output.
//!
//! Qubit 0 is the least-significant bit of an amplitude index.

pub mod circuits;
pub mod engine;
mod error;
pub mod experiment;
pub mod pauli;
pub mod statevec;
pub mod sweep;
pub mod variational;

pub use error::{Error, Result};
