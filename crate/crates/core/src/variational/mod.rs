//! Projection loss, its masked gradient, and the two optimizers.
//!
//! At each time step the committed parameters `theta` define
//! `|psi> = U(theta)|0>`. The target is `|phi> = T(dt)|psi>` where `T` is the
//! fixed Trotter circuit, and the loss of an update `d_theta` is
//! `(1 - |<phi|U(theta + d_theta)|0>|^2) / dt^2`.

mod quasi_newton;
mod spsa;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuits::{BlockedAnsatz, Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::statevec::StateVector;

pub use quasi_newton::minimize;
pub use spsa::spsa_minimize;

/// Everything the loss needs for one time step. The target state is computed
/// once at construction.
#[derive(Debug, Clone)]
pub struct LossContext<'a> {
    ansatz: &'a BlockedAnsatz,
    theta: &'a ParamVector,
    target_step: &'a Circuit,
    dt: f64,
    initial_state: &'a StateVector,
    target: StateVector,
}

impl<'a> LossContext<'a> {
    pub fn new(
        ansatz: &'a BlockedAnsatz,
        theta: &'a ParamVector,
        target_step: &'a Circuit,
        dt: f64,
        initial_state: &'a StateVector,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
        }
        if !target_step.is_fixed() {
            return Err(Error::InvalidConfig("target step circuit has free parameters".into()));
        }
        if theta.len() != ansatz.num_parameters() {
            return Err(Error::Shape(format!(
                "theta has {} entries, ansatz has {} parameters",
                theta.len(),
                ansatz.num_parameters()
            )));
        }
        if target_step.num_qubits() != ansatz.num_qubits() || initial_state.num_qubits() != ansatz.num_qubits() {
            return Err(Error::Shape("ansatz, target step and initial state sizes differ".into()));
        }
        let mut target = initial_state.clone();
        ansatz.circuit().apply(&mut target, theta.as_slice())?;
        target_step.apply(&mut target, &[])?;
        Ok(LossContext { ansatz, theta, target_step, dt, initial_state, target })
    }

    pub fn ansatz(&self) -> &BlockedAnsatz {
        self.ansatz
    }

    pub fn theta(&self) -> &ParamVector {
        self.theta
    }

    pub fn target_step(&self) -> &Circuit {
        self.target_step
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn initial_state(&self) -> &StateVector {
        self.initial_state
    }

    /// `|phi> = T(dt) U(theta) |0>`.
    pub fn target_state(&self) -> &StateVector {
        &self.target
    }

    fn check_len(&self, d_theta: &[f64]) -> Result<()> {
        if d_theta.len() != self.theta.len() {
            return Err(Error::Shape(format!(
                "update has {} entries, expected {}",
                d_theta.len(),
                self.theta.len()
            )));
        }
        Ok(())
    }

    fn shifted(&self, d_theta: &[f64]) -> Vec<f64> {
        self.theta.as_slice().iter().zip(d_theta).map(|(a, b)| a + b).collect()
    }

    fn loss_from_overlap(&self, overlap: Complex64) -> f64 {
        (1.0 - overlap.norm_sqr()).max(0.0) / (self.dt * self.dt)
    }

    /// State `U(theta + d_theta)|0>`.
    pub fn trial_state(&self, d_theta: &[f64]) -> Result<StateVector> {
        self.check_len(d_theta)?;
        let mut psi = self.initial_state.clone();
        self.ansatz.circuit().apply(&mut psi, &self.shifted(d_theta))?;
        Ok(psi)
    }

    pub(crate) fn loss_unchecked(&self, d_theta: &[f64]) -> f64 {
        let mut psi = self.initial_state.clone();
        self.ansatz.circuit().apply_unchecked(&mut psi, &self.shifted(d_theta));
        let overlap = self.target.inner(&psi).expect("shapes checked at construction");
        self.loss_from_overlap(overlap)
    }

    /// Loss and its gradient on the slots flagged in `active`, via one forward
    /// pass and one reverse (adjoint) pass over the circuit. Entries of
    /// inactive slots are exactly zero.
    pub(crate) fn loss_and_gradient_unchecked(&self, d_theta: &[f64], active: &[bool]) -> (f64, Vec<f64>) {
        let params = self.shifted(d_theta);
        let circuit = self.ansatz.circuit();
        let gates = circuit.gates();

        let mut psi = self.initial_state.clone();
        circuit.apply_unchecked(&mut psi, &params);
        let overlap = self.target.inner(&psi).expect("shapes checked at construction");
        let loss = self.loss_from_overlap(overlap);

        let mut grad = vec![0.0; params.len()];
        let first = gates
            .iter()
            .position(|g| g.slot().is_some_and(|s| active[s]));
        let Some(first) = first else {
            return (loss, grad);
        };

        // psi holds the state after gate j, lambda the target pulled back
        // through gates j+1.. .
        let mut lambda = self.target.clone();
        let scale = -2.0 / (self.dt * self.dt);
        for j in (first..gates.len()).rev() {
            let g = &gates[j];
            let angle = g.resolve(&params);
            if let Some(s) = g.slot().filter(|&s| active[s]) {
                // d<phi|psi>/dx = -i/2 <lambda|P|psi>
                let elem = lambda.matrix_element_unchecked(&g.word, &psi);
                let d_overlap = Complex64::new(0.0, -0.5) * elem;
                grad[s] += scale * (overlap.conj() * d_overlap).re;
            }
            if j > first {
                psi.rotate_unchecked(&g.word, -angle);
                lambda.rotate_unchecked(&g.word, -angle);
            }
        }
        (loss, grad)
    }
}

/// `(1 - |<phi|psi(theta + d_theta)>|^2) / dt^2`.
pub fn pvqd_loss(ctx: &LossContext<'_>, d_theta: &ParamVector) -> Result<f64> {
    ctx.check_len(d_theta.as_slice())?;
    let loss = ctx.loss_unchecked(d_theta.as_slice());
    if !loss.is_finite() {
        return Err(Error::NumericFailure("loss evaluated to a non-finite value".into()));
    }
    Ok(loss)
}

/// Analytic gradient of [`pvqd_loss`] restricted to the blocks in `mask`.
pub fn loss_gradient(ctx: &LossContext<'_>, d_theta: &ParamVector, mask: &BlockMask) -> Result<ParamVector> {
    ctx.check_len(d_theta.as_slice())?;
    mask.check_against(ctx.ansatz)?;
    let active = mask.slot_flags(ctx.ansatz.block_size());
    let (_, grad) = ctx.loss_and_gradient_unchecked(d_theta.as_slice(), &active);
    ParamVector::from_values(grad, ctx.ansatz.block_size())
        .map_err(|_| Error::NumericFailure("gradient has non-finite entries".into()))
}

/// The set of ansatz blocks whose parameters are free in one optimization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockMask {
    blocks: Vec<usize>,
    num_blocks: usize,
}

impl BlockMask {
    /// Sorted, de-duplicated mask. Must be non-empty with indices `< num_blocks`.
    pub fn new(blocks: impl IntoIterator<Item = usize>, num_blocks: usize) -> Result<Self> {
        let mut blocks: Vec<usize> = blocks.into_iter().collect();
        blocks.sort_unstable();
        blocks.dedup();
        if blocks.is_empty() {
            return Err(Error::InvalidMask("mask selects no blocks".into()));
        }
        if let Some(&b) = blocks.iter().find(|&&b| b >= num_blocks) {
            return Err(Error::InvalidMask(format!("block {b} outside 0..{num_blocks}")));
        }
        Ok(BlockMask { blocks, num_blocks })
    }

    pub fn all(num_blocks: usize) -> Self {
        BlockMask { blocks: (0..num_blocks).collect(), num_blocks }
    }

    pub fn single(block: usize, num_blocks: usize) -> Result<Self> {
        Self::new([block], num_blocks)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn contains(&self, block: usize) -> bool {
        self.blocks.binary_search(&block).is_ok()
    }

    /// Parameter slots owned by the masked blocks, ascending.
    pub fn slots(&self, block_size: usize) -> Vec<usize> {
        self.blocks
            .iter()
            .flat_map(|&b| b * block_size..(b + 1) * block_size)
            .collect()
    }

    pub fn slot_flags(&self, block_size: usize) -> Vec<bool> {
        let mut flags = vec![false; self.num_blocks * block_size];
        for s in self.slots(block_size) {
            flags[s] = true;
        }
        flags
    }

    fn check_against(&self, ansatz: &BlockedAnsatz) -> Result<()> {
        if self.num_blocks != ansatz.num_blocks() {
            return Err(Error::InvalidMask(format!(
                "mask built for {} blocks, ansatz has {}",
                self.num_blocks,
                ansatz.num_blocks()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMode {
    /// Limited-memory quasi-Newton with a strong-Wolfe line search.
    QuasiNewton,
    Spsa,
}

/// SPSA gain schedule: `a_k = a / (k + 1 + big_a)^alpha`, `c_k = c / (k + 1)^gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpsaGains {
    /// `None` calibrates `a` so the first update has magnitude `first_step`.
    pub a: Option<f64>,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub first_step: f64,
    /// Gradient estimates averaged when calibrating `a`.
    pub calibration_samples: usize,
}

impl Default for SpsaGains {
    fn default() -> Self {
        SpsaGains {
            a: None,
            c: 0.01,
            big_a: 10.0,
            alpha: 0.602,
            gamma: 0.101,
            first_step: 0.01,
            calibration_samples: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub mode: OptimizerMode,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub loss_tolerance: f64,
    /// Number of curvature pairs kept by the quasi-Newton method.
    pub history: usize,
    pub spsa: SpsaGains,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            mode: OptimizerMode::QuasiNewton,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            loss_tolerance: 1e-9,
            history: 10,
            spsa: SpsaGains::default(),
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn spsa(max_iterations: usize, rng_seed: u64) -> Self {
        OptimizerConfig {
            mode: OptimizerMode::Spsa,
            max_iterations,
            rng_seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("optimizer {what}")));
        if self.max_iterations < 1 {
            return bad("max_iterations must be >= 1");
        }
        if !(self.gradient_tolerance > 0.0) || !(self.loss_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.history < 1 {
            return bad("history must be >= 1");
        }
        let g = &self.spsa;
        if !(g.c > 0.0) || !(g.first_step > 0.0) || g.big_a < 0.0 || g.calibration_samples < 1 {
            return bad("SPSA gains out of range");
        }
        if g.a.is_some_and(|a| !(a > 0.0)) {
            return bad("SPSA gain `a` must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LossTolerance,
    GradientTolerance,
    BudgetExhausted,
    /// No further decrease could be found along any descent direction.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    /// Optimal update; exactly zero outside the mask.
    pub d_theta_star: ParamVector,
    pub final_loss: f64,
    pub iterations: usize,
    pub loss_evaluations: usize,
    pub gradient_evaluations: usize,
    pub termination: Termination,
    /// Loss at the start and after every accepted iteration.
    pub loss_trace: Vec<f64>,
}

impl OptimizeResult {
    pub fn budget_exhausted(&self) -> bool {
        self.termination == Termination::BudgetExhausted
    }
}

/// Evaluates the loss in the reduced coordinates of the masked slots.
pub(crate) struct MaskedObjective<'c, 'a> {
    ctx: &'c LossContext<'a>,
    slots: Vec<usize>,
    flags: Vec<bool>,
    full: Vec<f64>,
    pub loss_evaluations: usize,
    pub gradient_evaluations: usize,
}

impl<'c, 'a> MaskedObjective<'c, 'a> {
    pub(crate) fn new(ctx: &'c LossContext<'a>, mask: &BlockMask) -> Result<Self> {
        mask.check_against(ctx.ansatz)?;
        let bs = ctx.ansatz.block_size();
        Ok(MaskedObjective {
            ctx,
            slots: mask.slots(bs),
            flags: mask.slot_flags(bs),
            full: vec![0.0; ctx.theta.len()],
            loss_evaluations: 0,
            gradient_evaluations: 0,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.slots.len()
    }

    pub(crate) fn reduce(&self, full: &ParamVector) -> Vec<f64> {
        self.slots.iter().map(|&s| full.as_slice()[s]).collect()
    }

    pub(crate) fn expand(&self, reduced: &[f64]) -> ParamVector {
        let mut values = vec![0.0; self.full.len()];
        for (&s, &v) in self.slots.iter().zip(reduced) {
            values[s] = v;
        }
        ParamVector::from_values(values, self.ctx.ansatz.block_size())
            .expect("finite reduced iterate expands to a valid parameter vector")
    }

    fn load(&mut self, reduced: &[f64]) {
        for (&s, &v) in self.slots.iter().zip(reduced) {
            self.full[s] = v;
        }
    }

    pub(crate) fn value(&mut self, reduced: &[f64]) -> Result<f64> {
        self.load(reduced);
        self.loss_evaluations += 1;
        let f = self.ctx.loss_unchecked(&self.full);
        if !f.is_finite() || reduced.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite loss during optimization".into()));
        }
        Ok(f)
    }

    pub(crate) fn value_and_gradient(&mut self, reduced: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.load(reduced);
        self.loss_evaluations += 1;
        self.gradient_evaluations += 1;
        let (f, g) = self.ctx.loss_and_gradient_unchecked(&self.full, &self.flags);
        let g: Vec<f64> = self.slots.iter().map(|&s| g[s]).collect();
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite loss or gradient during optimization".into()));
        }
        Ok((f, g))
    }
}
