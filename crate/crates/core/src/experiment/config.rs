//! JSON experiment specifications.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{heisenberg_observables, ising_observables, EvolutionConfig, Measurement, NamedObservable};
use crate::error::{Error, Result};
use crate::pauli::{build_tfim, build_xyz, PauliSum};
use crate::sweep::SweepPolicy;
use crate::variational::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `-J Σ Z_i Z_{i+1} - h Σ X_i`, observables `sigma_x` and `sigma_z`.
    Tfim,
    /// `Σ Jx X X + Jy Y Y + Jz Z Z` on nearest neighbours, observables `z0`
    /// and `z0z1`.
    Xyz,
    /// Hamiltonian read from `hamiltonian_file`, no default observables.
    Custom,
}

/// One experiment: a model, an evolution setup and a number of seeded runs.
///
/// Model parameters are flat keys; `policy`, `optimizer` and `measurement`
/// are nested objects whose omitted fields take their defaults. Unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Prefix of every output file.
    #[serde(default = "default_name")]
    pub name: String,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jz: Option<f64>,
    #[serde(default)]
    pub periodic: bool,
    /// Pauli-sum text file, resolved relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_file: Option<PathBuf>,
    /// Extra observables in Pauli-sum text form, keyed by name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, String>,
    pub dt: f64,
    pub num_steps: usize,
    #[serde(default = "default_trotter_steps")]
    pub trotter_steps: usize,
    pub ansatz_blocks: usize,
    /// Qubits prepared in `|1>`; all others start in `|0>`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_ones: Vec<usize>,
    #[serde(default)]
    pub policy: SweepPolicy,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_measurement")]
    pub measurement: Measurement,
    #[serde(default = "default_runs")]
    pub num_runs: usize,
    /// Run `k` uses seed `seed + k`.
    #[serde(default)]
    pub seed: u64,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_trotter_steps() -> usize {
    8
}

fn default_measurement() -> Measurement {
    Measurement::Exact
}

fn default_runs() -> usize {
    1
}

/// Reads and validates an experiment file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path.parent())
}

/// Parses and validates an experiment from JSON text. A relative
/// `hamiltonian_file` is resolved against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: Option<&Path>) -> Result<ExperimentSpec> {
    if text.trim().is_empty() {
        return Err(Error::config("<root>", "empty configuration"));
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let key = match key.as_str() {
            "." => missing_field(&inner).unwrap_or_else(|| "<root>".into()),
            path => path.to_string(),
        };
        Error::config(key, inner.to_string())
    })?;
    if let (Some(file), Some(base)) = (&spec.hamiltonian_file, base_dir) {
        if file.is_relative() {
            spec.hamiltonian_file = Some(base.join(file));
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn backticked(message: &str, prefix: &str) -> Option<String> {
    let rest = message.strip_prefix(prefix)?;
    let rest = rest.strip_prefix('`')?;
    rest.split('`').next().map(str::to_string)
}

fn missing_field(e: &serde_json::Error) -> Option<String> {
    backticked(&e.to_string(), "missing field ")
}

fn require(value: Option<f64>, key: &str, model: &str) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(Error::config(key, format!("must be finite, got {v}"))),
        None => Err(Error::config(key, format!("required for the {model} model"))),
    }
}

impl ExperimentSpec {
    /// Checks every field that can be checked without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", "must be a non-empty file-name prefix"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.num_steps < 1 {
            return Err(Error::config("num_steps", "must be >= 1"));
        }
        if self.trotter_steps < 1 {
            return Err(Error::config("trotter_steps", "must be >= 1"));
        }
        if self.ansatz_blocks < 1 {
            return Err(Error::config("ansatz_blocks", "must be >= 1"));
        }
        if self.num_runs < 1 {
            return Err(Error::config("num_runs", "must be >= 1"));
        }
        self.policy
            .validate(self.ansatz_blocks)
            .map_err(|e| Error::config("policy", e.to_string()))?;
        self.optimizer.validate().map_err(|e| Error::config("optimizer", e.to_string()))?;
        let probe = EvolutionConfig {
            hamiltonian: self.hamiltonian()?,
            ansatz_blocks: self.ansatz_blocks,
            trotter_steps: self.trotter_steps,
            dt: self.dt,
            num_steps: self.num_steps,
            policy: self.policy.clone(),
            optimizer: self.optimizer.clone(),
            observables: self.named_observables()?,
            measurement: self.measurement,
            initial_ones: self.initial_ones.clone(),
            run_seed: self.seed,
        };
        probe.validate().map_err(|e| Error::config("measurement", e.to_string()))?;
        let n = probe.hamiltonian.num_qubits();
        if let Some(&q) = self.initial_ones.iter().find(|&&q| q >= n) {
            return Err(Error::config("initial_ones", format!("qubit {q} outside a {n}-qubit register")));
        }
        Ok(())
    }

    fn model_size(&self) -> Result<usize> {
        match self.num_qubits {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(Error::config("num_qubits", format!("lattice models need >= 2 qubits, got {n}"))),
            None => Err(Error::config("num_qubits", "required for lattice models")),
        }
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        let built = match self.model {
            ModelKind::Tfim => {
                let n = self.model_size()?;
                build_tfim(n, require(self.j, "j", "tfim")?, require(self.h, "h", "tfim")?, self.periodic)
            }
            ModelKind::Xyz => {
                let n = self.model_size()?;
                build_xyz(
                    n,
                    require(self.jx, "jx", "xyz")?,
                    require(self.jy, "jy", "xyz")?,
                    require(self.jz, "jz", "xyz")?,
                    self.periodic,
                )
            }
            ModelKind::Custom => {
                let path = self
                    .hamiltonian_file
                    .as_ref()
                    .ok_or_else(|| Error::config("hamiltonian_file", "required for the custom model"))?;
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                PauliSum::parse(&text, self.num_qubits)
            }
        };
        built.map_err(|e| match e {
            e @ (Error::Config { .. } | Error::Io { .. }) => e,
            e => Error::config("model", e.to_string()),
        })
    }

    /// Model observables followed by any extra ones from the config.
    pub fn named_observables(&self) -> Result<Vec<NamedObservable>> {
        let n = self.hamiltonian()?.num_qubits();
        let mut out = match self.model {
            ModelKind::Tfim => ising_observables(n)?,
            ModelKind::Xyz => heisenberg_observables(n)?,
            ModelKind::Custom => Vec::new(),
        };
        for (name, text) in &self.observables {
            let key = format!("observables.{name}");
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::config(key, "names may only contain letters, digits and `_`"));
            }
            if out.iter().any(|o| &o.name == name) || name == crate::engine::ENERGY {
                return Err(Error::config(key, "duplicate observable name"));
            }
            let op = PauliSum::parse(text, Some(n)).map_err(|e| Error::config(&key, e.to_string()))?;
            out.push(NamedObservable::new(name.clone(), op));
        }
        Ok(out)
    }

    /// Engine configuration for run `index`.
    pub fn evolution_config(&self, index: usize) -> Result<EvolutionConfig> {
        Ok(EvolutionConfig {
            hamiltonian: self.hamiltonian()?,
            ansatz_blocks: self.ansatz_blocks,
            trotter_steps: self.trotter_steps,
            dt: self.dt,
            num_steps: self.num_steps,
            policy: self.policy.clone(),
            optimizer: self.optimizer.clone(),
            observables: self.named_observables()?,
            measurement: self.measurement,
            initial_ones: self.initial_ones.clone(),
            run_seed: self.seed.wrapping_add(index as u64),
        })
    }

    /// Everything that defines the physical problem, for checking that
    /// compared experiments agree on it.
    pub(crate) fn model_signature(&self) -> String {
        format!(
            "{:?} n={:?} j={:?} h={:?} jx={:?} jy={:?} jz={:?} periodic={} file={:?} observables={:?} \
             dt={} steps={} trotter={} ones={:?} measurement={:?}",
            self.model,
            self.num_qubits,
            self.j,
            self.h,
            self.jx,
            self.jy,
            self.jz,
            self.periodic,
            self.hamiltonian_file,
            self.observables,
            self.dt,
            self.num_steps,
            self.trotter_steps,
            self.initial_ones,
            self.measurement,
        )
    }
}
