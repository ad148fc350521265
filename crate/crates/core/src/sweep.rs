//! Block-selection policies for blockwise projection.
//!
//! Each time step optimizes only the blocks chosen here. `Full` frees every
//! block, `Sequential` cycles one block per step, `Random` draws one block per
//! step, and `Fidelity` stays on a block until its loss reaches the threshold
//! before moving to the next one. The fidelity policy can widen its mask when
//! progress stalls, and any policy can warm-start a newly selected block from
//! the previously optimized one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::ParamVector;
use crate::error::{Error, Result};
use crate::variational::{BlockMask, OptimizeResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Full,
    Sequential,
    Random,
    Fidelity,
}

/// Widening rule for the fidelity policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Escalation {
    /// Consecutive above-threshold steps that trigger a wider mask.
    pub stagnation_window: usize,
    pub max_simultaneous_blocks: usize,
}

impl Default for Escalation {
    fn default() -> Self {
        Escalation { stagnation_window: 5, max_simultaneous_blocks: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPolicy {
    pub kind: SweepKind,
    /// Loss below which the fidelity policy moves on. The loss is the step
    /// infidelity divided by `dt^2`, so the default of `1e-2` corresponds to a
    /// step infidelity of `1e-6` at `dt = 0.01`.
    pub loss_threshold: f64,
    pub rng_seed: u64,
    pub escalation: Option<Escalation>,
    /// Warm-start rate; 0 disables warm starting.
    pub warm_start_zeta: f64,
    /// Restart the fidelity pointer at block 0 on every step.
    pub fidelity_reset_each_step: bool,
    /// Warm-start from the previous block's update instead of its absolute parameters.
    pub warm_start_use_increment: bool,
}

impl Default for SweepPolicy {
    fn default() -> Self {
        SweepPolicy {
            kind: SweepKind::Full,
            loss_threshold: 1e-2,
            rng_seed: 0,
            escalation: None,
            warm_start_zeta: 0.0,
            fidelity_reset_each_step: false,
            warm_start_use_increment: false,
        }
    }
}

impl SweepPolicy {
    pub fn of_kind(kind: SweepKind) -> Self {
        SweepPolicy { kind, ..Default::default() }
    }

    pub fn validate(&self, num_blocks: usize) -> Result<()> {
        if self.kind == SweepKind::Fidelity && !(self.loss_threshold > 0.0) {
            return Err(Error::InvalidConfig("fidelity sweep needs a positive loss threshold".into()));
        }
        if !self.warm_start_zeta.is_finite() {
            return Err(Error::InvalidConfig("warm-start rate must be finite".into()));
        }
        if let Some(e) = self.escalation {
            if e.stagnation_window < 1 {
                return Err(Error::InvalidConfig("escalation window must be >= 1".into()));
            }
            if e.max_simultaneous_blocks < 1 || e.max_simultaneous_blocks > num_blocks {
                return Err(Error::InvalidConfig(format!(
                    "max_simultaneous_blocks must lie in 1..={num_blocks}"
                )));
            }
        }
        Ok(())
    }
}

/// Mutable bookkeeping carried between time steps.
#[derive(Debug, Clone)]
pub struct SweepState {
    pub current_block: usize,
    pub active_width: usize,
    pub stagnation_counter: usize,
    pub last_d_theta_star: Option<ParamVector>,
    pub last_block: Option<usize>,
    pub last_mask: Option<BlockMask>,
    rng: ChaCha8Rng,
}

impl SweepState {
    pub fn new(policy: &SweepPolicy) -> Self {
        SweepState {
            current_block: 0,
            active_width: 1,
            stagnation_counter: 0,
            last_d_theta_star: None,
            last_block: None,
            last_mask: None,
            rng: ChaCha8Rng::seed_from_u64(policy.rng_seed),
        }
    }

    /// Stores what the step just optimized, for warm starting the next one.
    pub fn record(&mut self, mask: &BlockMask, result: &OptimizeResult) {
        self.last_block = mask.blocks().last().copied();
        self.last_mask = Some(mask.clone());
        self.last_d_theta_star = Some(result.d_theta_star.clone());
    }
}

/// Chooses the blocks to optimize this step. `prev` is the previous step's
/// optimization result, `None` on the first step.
pub fn select_mask(
    policy: &SweepPolicy,
    state: &mut SweepState,
    prev: Option<&OptimizeResult>,
    num_blocks: usize,
) -> BlockMask {
    let n = num_blocks;
    match policy.kind {
        SweepKind::Full => BlockMask::all(n),
        SweepKind::Sequential => {
            let b = state.current_block % n;
            state.current_block = (b + 1) % n;
            BlockMask::single(b, n).expect("block index reduced mod n")
        }
        SweepKind::Random => {
            let b = state.rng.random_range(0..n);
            state.current_block = b;
            BlockMask::single(b, n).expect("draw lies in 0..n")
        }
        SweepKind::Fidelity => {
            if let Some(prev) = prev {
                if prev.final_loss <= policy.loss_threshold {
                    state.current_block = (state.current_block + 1) % n;
                    state.stagnation_counter = 0;
                } else {
                    state.stagnation_counter += 1;
                    if let Some(e) = policy.escalation {
                        if state.stagnation_counter >= e.stagnation_window {
                            state.active_width = (state.active_width + 1).min(e.max_simultaneous_blocks).min(n);
                            state.stagnation_counter = 0;
                        }
                    }
                }
            }
            if policy.fidelity_reset_each_step {
                state.current_block = 0;
            }
            let start = state.current_block;
            BlockMask::new((0..state.active_width).map(|i| (start + i) % n), n)
                .expect("width >= 1 and indices reduced mod n")
        }
    }
}

/// Initial update for the optimizer on `new_mask`.
///
/// Each newly selected block `j` starts from `zeta * theta_i`, where `i` is
/// the last block optimized on the previous step and `theta_i` its committed
/// parameters (or its last update, when `warm_start_use_increment` is set).
/// Blocks that were already optimized last step start from zero.
pub fn warm_start_initial(
    policy: &SweepPolicy,
    state: &SweepState,
    theta: &ParamVector,
    new_mask: &BlockMask,
) -> ParamVector {
    let mut init = ParamVector::zeros(theta.num_blocks(), theta.block_size());
    let zeta = policy.warm_start_zeta;
    if zeta == 0.0 {
        return init;
    }
    let (Some(source_block), Some(last_mask)) = (state.last_block, state.last_mask.as_ref()) else {
        return init;
    };
    if last_mask == new_mask {
        return init;
    }
    let source: Vec<f64> = if policy.warm_start_use_increment {
        match &state.last_d_theta_star {
            Some(d) => d.block(source_block).to_vec(),
            None => return init,
        }
    } else {
        theta.block(source_block).to_vec()
    };
    for &j in new_mask.blocks() {
        if last_mask.contains(j) {
            continue;
        }
        init.block_mut(j)
            .iter_mut()
            .zip(&source)
            .for_each(|(dst, s)| *dst = zeta * s);
    }
    init
}
