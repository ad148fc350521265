//! The time-evolution loop: choose blocks, project, commit, record.

mod measure;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{build_blocked_ansatz, evaluate, trotter_step_circuit};
use crate::error::{Error, Result};
use crate::pauli::{infidelity, magnetization, word_observable, ExactEvolver, Pauli, PauliSum};
use crate::statevec::StateVector;
use crate::sweep::{select_mask, warm_start_initial, SweepPolicy, SweepState};
use crate::variational::{
    minimize, spsa_minimize, LossContext, OptimizeResult, OptimizerConfig, OptimizerMode, Termination,
};

pub use measure::{measure_observable_shots, NoiseSpec, ShotEstimate, StatePreparation};

/// Name under which the Hamiltonian itself is recorded.
pub const ENERGY: &str = "energy";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedObservable {
    pub name: String,
    pub operator: PauliSum,
}

impl NamedObservable {
    pub fn new(name: impl Into<String>, operator: PauliSum) -> Self {
        NamedObservable { name: name.into(), operator }
    }
}

/// `sigma_x` and `sigma_z` total magnetizations.
pub fn ising_observables(n: usize) -> Result<Vec<NamedObservable>> {
    Ok(vec![
        NamedObservable::new("sigma_x", magnetization(n, Pauli::X)?),
        NamedObservable::new("sigma_z", magnetization(n, Pauli::Z)?),
    ])
}

/// `Z0` and the `Z0*Z1` correlator.
pub fn heisenberg_observables(n: usize) -> Result<Vec<NamedObservable>> {
    Ok(vec![
        NamedObservable::new("z0", word_observable(n, &[(0, Pauli::Z)])?),
        NamedObservable::new("z0z1", word_observable(n, &[(0, Pauli::Z), (1, Pauli::Z)])?),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Measurement {
    /// Statevector expectation values.
    Exact,
    Shots {
        shots: usize,
        #[serde(default = "default_batch")]
        batch_size: usize,
        #[serde(default)]
        noise: NoiseSpec,
    },
}

fn default_batch() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub hamiltonian: PauliSum,
    pub ansatz_blocks: usize,
    pub trotter_steps: usize,
    pub dt: f64,
    pub num_steps: usize,
    pub policy: SweepPolicy,
    pub optimizer: OptimizerConfig,
    /// Recorded alongside the energy, which is always first.
    pub observables: Vec<NamedObservable>,
    pub measurement: Measurement,
    /// Qubits flipped to `|1>` in the initial product state.
    pub initial_ones: Vec<usize>,
    pub run_seed: u64,
}

impl EvolutionConfig {
    /// Standard projection with 8 Trotter sub-steps, exact measurement, and
    /// only the energy recorded.
    pub fn new(hamiltonian: PauliSum, ansatz_blocks: usize, dt: f64, num_steps: usize) -> Self {
        EvolutionConfig {
            hamiltonian,
            ansatz_blocks,
            trotter_steps: 8,
            dt,
            num_steps,
            policy: SweepPolicy::default(),
            optimizer: OptimizerConfig::default(),
            observables: Vec::new(),
            measurement: Measurement::Exact,
            initial_ones: Vec::new(),
            run_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.num_steps < 1 {
            return Err(Error::InvalidConfig("num_steps must be >= 1".into()));
        }
        if self.ansatz_blocks < 1 {
            return Err(Error::InvalidConfig("ansatz_blocks must be >= 1".into()));
        }
        if self.trotter_steps < 1 {
            return Err(Error::InvalidConfig("trotter_steps must be >= 1".into()));
        }
        self.policy.validate(self.ansatz_blocks)?;
        self.optimizer.validate()?;
        if let Measurement::Shots { shots, batch_size, noise } = self.measurement {
            if shots < 1 || batch_size < 1 {
                return Err(Error::InvalidConfig("shots and batch_size must be >= 1".into()));
            }
            noise.validate()?;
        }
        let n = self.hamiltonian.num_qubits();
        for o in &self.observables {
            if o.operator.num_qubits() != n {
                return Err(Error::Shape(format!("observable `{}` has the wrong register size", o.name)));
            }
            if o.name == ENERGY {
                return Err(Error::InvalidConfig("`energy` is recorded automatically".into()));
            }
        }
        Ok(())
    }

    pub fn observable_names(&self) -> Vec<String> {
        std::iter::once(ENERGY.to_string())
            .chain(self.observables.iter().map(|o| o.name.clone()))
            .collect()
    }
}

/// Telemetry for one time step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeStepRecord {
    pub step: usize,
    pub time: f64,
    /// Per observable, energy first; sampled estimates in shot mode.
    pub simulated: Vec<f64>,
    /// Per observable, evaluated on the exactly evolved state.
    pub exact: Vec<f64>,
    /// Shot-noise standard errors; zero in exact mode.
    pub std_errors: Vec<f64>,
    pub loss: f64,
    pub infidelity: f64,
    pub iterations: usize,
    pub loss_evaluations: usize,
    pub gradient_evaluations: usize,
    pub active_blocks: Vec<usize>,
    pub optimized_parameters: usize,
    pub termination: Termination,
    /// Time spent in the optimizer.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub num_qubits: usize,
    pub num_terms: usize,
    pub ansatz_blocks: usize,
    pub block_size: usize,
    pub trotter_steps: usize,
    pub dt: f64,
    pub num_steps: usize,
    pub policy: SweepPolicy,
    pub optimizer: OptimizerConfig,
    pub measurement: Measurement,
    pub run_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableError {
    pub name: String,
    pub mean_abs_error: f64,
    /// Population standard deviation of the absolute error sequence.
    pub std_abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub observables: Vec<ObservableError>,
    pub mean_infidelity: f64,
    pub max_infidelity: f64,
    pub mean_loss: f64,
    pub total_iterations: usize,
    pub mean_iterations: f64,
    pub mean_optimized_parameters: f64,
    pub total_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub config: ConfigEcho,
    pub observable_names: Vec<String>,
    pub records: Vec<TimeStepRecord>,
    pub summary: Summary,
    pub final_theta: Vec<f64>,
}

pub(crate) fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// Per-observable mean and population standard deviation of
/// `|exact - simulated|` over the steps, plus run-level totals.
pub fn summarize(records: &[TimeStepRecord], names: &[String]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::Shape("cannot summarize an empty run".into()));
    }
    let observables = names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let (mean, std) = mean_std(records.iter().map(move |r| (r.exact[k] - r.simulated[k]).abs()));
            ObservableError { name: name.clone(), mean_abs_error: mean, std_abs_error: std }
        })
        .collect();
    let steps = records.len() as f64;
    let total_iterations: usize = records.iter().map(|r| r.iterations).sum();
    Ok(Summary {
        observables,
        mean_infidelity: records.iter().map(|r| r.infidelity).sum::<f64>() / steps,
        max_infidelity: records.iter().map(|r| r.infidelity).fold(0.0, f64::max),
        mean_loss: records.iter().map(|r| r.loss).sum::<f64>() / steps,
        total_iterations,
        mean_iterations: total_iterations as f64 / steps,
        mean_optimized_parameters: records.iter().map(|r| r.optimized_parameters as f64).sum::<f64>() / steps,
        total_wall_ms: records.iter().map(|r| r.wall_time_ms).sum(),
    })
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub(crate) fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the projected evolution for `cfg.num_steps` steps from `theta = 0`.
///
/// The variational state is always optimized against exact statevector
/// overlaps; only observable readout goes through the shot backend. The
/// reference state at time `t` is `e^{-iHt}` applied to the initial state.
pub fn run_evolution(cfg: &EvolutionConfig) -> Result<RunResult> {
    cfg.validate()?;
    let h = &cfg.hamiltonian;
    let n_qubits = h.num_qubits();
    let ansatz = build_blocked_ansatz(h, cfg.ansatz_blocks)?;
    let target = trotter_step_circuit(h, cfg.dt, cfg.trotter_steps)?;
    let initial = StateVector::product(n_qubits, &cfg.initial_ones)?;
    let evolver = ExactEvolver::cached(h)?;

    let mut operators: Vec<&PauliSum> = vec![h];
    operators.extend(cfg.observables.iter().map(|o| &o.operator));

    let mut policy = cfg.policy.clone();
    policy.rng_seed = mix_seed(policy.rng_seed, cfg.run_seed);
    let mut sweep = SweepState::new(&policy);
    let mut shot_rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.run_seed, 0x5_4057));

    let n_blocks = ansatz.num_blocks();
    let mut theta = ansatz.zero_parameters();
    let mut prev: Option<OptimizeResult> = None;
    let mut records = Vec::with_capacity(cfg.num_steps);

    for step in 1..=cfg.num_steps {
        let mask = select_mask(&policy, &mut sweep, prev.as_ref(), n_blocks);
        let start = warm_start_initial(&policy, &sweep, &theta, &mask);

        let clock = Instant::now();
        let outcome = LossContext::new(&ansatz, &theta, &target, cfg.dt, &initial).and_then(|ctx| {
            match cfg.optimizer.mode {
                OptimizerMode::QuasiNewton => minimize(&ctx, &mask, &start, &cfg.optimizer),
                OptimizerMode::Spsa => {
                    let mut opt = cfg.optimizer.clone();
                    opt.rng_seed = mix_seed(opt.rng_seed, mix_seed(cfg.run_seed, step as u64));
                    spsa_minimize(&ctx, &mask, &start, &opt)
                }
            }
        });
        let wall_time_ms = clock.elapsed().as_secs_f64() * 1e3;
        let result = match outcome {
            Ok(r) => r,
            Err(e) => return Err(Error::PartialRun { completed: records, source: Box::new(e) }),
        };

        theta = theta.add(&result.d_theta_star)?;
        sweep.record(&mask, &result);

        let time = step as f64 * cfg.dt;
        let psi = evaluate(&ansatz, &theta, &initial)?;
        let reference = evolver.evolve(&initial, time)?;
        let mut simulated = Vec::with_capacity(operators.len());
        let mut exact = Vec::with_capacity(operators.len());
        let mut std_errors = Vec::with_capacity(operators.len());
        for op in &operators {
            exact.push(reference.expectation(op)?);
            match cfg.measurement {
                Measurement::Exact => {
                    simulated.push(psi.expectation(op)?);
                    std_errors.push(0.0);
                }
                Measurement::Shots { shots, batch_size, noise } => {
                    let prep = StatePreparation { circuit: ansatz.circuit(), params: theta.as_slice(), initial: &initial };
                    let est = measure_observable_shots(&prep, op, shots, &noise, batch_size, &mut shot_rng)?;
                    simulated.push(est.estimate);
                    std_errors.push(est.std_error);
                }
            }
        }

        records.push(TimeStepRecord {
            step,
            time,
            simulated,
            exact,
            std_errors,
            loss: result.final_loss,
            infidelity: infidelity(&psi, &reference)?,
            iterations: result.iterations,
            loss_evaluations: result.loss_evaluations,
            gradient_evaluations: result.gradient_evaluations,
            active_blocks: mask.blocks().to_vec(),
            optimized_parameters: mask.len() * ansatz.block_size(),
            termination: result.termination,
            wall_time_ms,
        });
        prev = Some(result);
    }

    let names = cfg.observable_names();
    let summary = summarize(&records, &names)?;
    Ok(RunResult {
        config: ConfigEcho {
            num_qubits: n_qubits,
            num_terms: h.len(),
            ansatz_blocks: cfg.ansatz_blocks,
            block_size: ansatz.block_size(),
            trotter_steps: cfg.trotter_steps,
            dt: cfg.dt,
            num_steps: cfg.num_steps,
            policy: cfg.policy.clone(),
            optimizer: cfg.optimizer.clone(),
            measurement: cfg.measurement,
            run_seed: cfg.run_seed,
        },
        observable_names: names,
        records,
        summary,
        final_theta: theta.into_values(),
    })
}
