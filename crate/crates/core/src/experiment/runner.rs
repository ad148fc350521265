//! Multi-seed execution, aggregation and file output.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentSpec;
use crate::engine::{mean_std, run_evolution, RunResult, Summary, TimeStepRecord};
use crate::error::{Error, Result};

/// Overrides and execution settings that do not belong in the spec file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory for CSV and JSON output; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    /// Worker threads for independent runs; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub runs: Option<usize>,
}

impl RunOptions {
    pub fn apply(&self, spec: &ExperimentSpec) -> Result<ExperimentSpec> {
        let mut spec = spec.clone();
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(runs) = self.runs {
            spec.num_runs = runs;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Per-step mean and population standard deviation of one quantity across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateColumn {
    pub name: String,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub name: String,
    pub num_runs: usize,
    pub seeds: Vec<u64>,
    pub time: Vec<f64>,
    pub columns: Vec<AggregateColumn>,
    /// Summary of each run, in seed order.
    pub run_summaries: Vec<Summary>,
    /// Optimizer wall time per step, one row per run.
    pub wall_ms: Vec<Vec<f64>>,
}

/// What a finished experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub spec: ExperimentSpec,
    pub runs: Vec<RunResult>,
    pub report: AggregateReport,
    pub files: Vec<PathBuf>,
}

/// Column headers of the per-run CSV for the given observable names.
///
/// `step, t, energy_sim, energy_exact, <obs>_sim, <obs>_exact, ..., loss,
/// infidelity, iterations, active_blocks`. Wall time is kept out of the CSV
/// so reruns are byte-identical; it is reported in the JSON summary.
pub fn csv_header(names: &[String]) -> Vec<String> {
    let mut h = vec!["step".to_string(), "t".to_string()];
    for n in names {
        h.push(format!("{n}_sim"));
        h.push(format!("{n}_exact"));
    }
    h.extend(["loss", "infidelity", "iterations", "active_blocks"].map(String::from));
    h
}

/// Shortest round-trip text, in scientific notation for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_row(r: &TimeStepRecord) -> Vec<String> {
    let mut row = vec![r.step.to_string(), num(r.time)];
    for (s, e) in r.simulated.iter().zip(&r.exact) {
        row.push(num(*s));
        row.push(num(*e));
    }
    row.push(num(r.loss));
    row.push(num(r.infidelity));
    row.push(r.iterations.to_string());
    row.push(r.active_blocks.iter().map(usize::to_string).collect::<Vec<_>>().join(";"));
    row
}

/// Writes one run's records as CSV.
pub fn write_run_csv(path: &Path, names: &[String], records: &[TimeStepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header(names))?;
    for r in records {
        w.write_record(csv_row(r))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn step_values(r: &TimeStepRecord) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * r.simulated.len() + 3);
    for (s, e) in r.simulated.iter().zip(&r.exact) {
        v.push(*s);
        v.push(*e);
    }
    v.extend([r.loss, r.infidelity, r.iterations as f64]);
    v
}

/// Per-step mean and population standard deviation over runs.
pub fn aggregate(name: &str, seeds: Vec<u64>, runs: &[RunResult]) -> Result<AggregateReport> {
    let first = runs.first().ok_or_else(|| Error::Shape("no runs to aggregate".into()))?;
    let steps = first.records.len();
    if runs.iter().any(|r| r.records.len() != steps || r.observable_names != first.observable_names) {
        return Err(Error::Shape("runs disagree on their layout".into()));
    }
    let header = csv_header(&first.observable_names);
    let names = &header[2..header.len() - 1];
    let values: Vec<Vec<Vec<f64>>> = runs
        .iter()
        .map(|r| r.records.iter().map(step_values).collect())
        .collect();
    let columns = names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let (mean, std) = (0..steps)
                .map(|s| mean_std(values.iter().map(move |run| run[s][c])))
                .unzip();
            AggregateColumn { name: name.clone(), mean, std }
        })
        .collect();
    Ok(AggregateReport {
        name: name.to_string(),
        num_runs: runs.len(),
        seeds,
        time: first.records.iter().map(|r| r.time).collect(),
        columns,
        run_summaries: runs.iter().map(|r| r.summary.clone()).collect(),
        wall_ms: runs
            .iter()
            .map(|r| r.records.iter().map(|s| s.wall_time_ms).collect())
            .collect(),
    })
}

/// Writes the aggregate as CSV: `step, t`, then `<column>_mean, <column>_std`.
pub fn write_aggregate_csv(path: &Path, report: &AggregateReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["step".to_string(), "t".to_string()];
    for c in &report.columns {
        header.push(format!("{}_mean", c.name));
        header.push(format!("{}_std", c.name));
    }
    w.write_record(&header)?;
    for (s, t) in report.time.iter().enumerate() {
        let mut row = vec![(s + 1).to_string(), num(*t)];
        for c in &report.columns {
            row.push(num(c.mean[s]));
            row.push(num(c.std[s]));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t < 1 {
            return Err(Error::InvalidConfig("thread count must be >= 1".into()));
        }
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Runs every seed of `spec` without writing files.
pub fn run_all(spec: &ExperimentSpec, threads: Option<usize>) -> Vec<Result<RunResult>> {
    let configs: Vec<_> = (0..spec.num_runs).map(|k| spec.evolution_config(k)).collect();
    let work = |cfg: &Result<_>| match cfg {
        Ok(cfg) => run_evolution(cfg),
        Err(e) => Err(Error::InvalidConfig(e.to_string())),
    };
    match pool(threads) {
        Ok(p) => p.install(|| configs.par_iter().map(work).collect()),
        Err(e) => vec![Err(e)],
    }
}

fn run_path(dir: &Path, name: &str, index: usize) -> PathBuf {
    dir.join(format!("{name}_run{index:02}.csv"))
}

fn partial(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

/// Executes all runs of `spec` and, with an output directory, writes
/// `<name>_runNN.csv` per run, `<name>_aggregate.csv` and
/// `<name>_aggregate.json`.
///
/// If any run fails, completed steps of every run are still written, under
/// names ending in `.partial`, and the first failure is returned.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    let spec = opts.apply(spec)?;
    let results = run_all(&spec, opts.threads);
    let seeds: Vec<u64> = (0..spec.num_runs).map(|k| spec.seed.wrapping_add(k as u64)).collect();
    let names = spec.evolution_config(0)?.observable_names();
    let failed = results.iter().any(Result::is_err);

    let mut files = Vec::new();
    if let Some(dir) = &opts.out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (k, r) in results.iter().enumerate() {
            let path = run_path(dir, &spec.name, k);
            let records = match r {
                Ok(run) => &run.records[..],
                Err(Error::PartialRun { completed, .. }) => &completed[..],
                Err(_) => &[][..],
            };
            let target = if failed { partial(&path) } else { path };
            write_run_csv(&target, &names, records)?;
            files.push(target);
        }
    }
    if failed {
        let first = results.into_iter().find_map(Result::err).expect("a run failed");
        return Err(first);
    }

    let runs: Vec<RunResult> = results.into_iter().map(|r| r.expect("checked above")).collect();
    let report = aggregate(&spec.name, seeds, &runs)?;
    if let Some(dir) = &opts.out_dir {
        let csv_path = dir.join(format!("{}_aggregate.csv", spec.name));
        write_aggregate_csv(&csv_path, &report)?;
        files.push(csv_path);
        let json_path = dir.join(format!("{}_aggregate.json", spec.name));
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::NumericFailure(format!("serializing report: {e}")))?;
        fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;
        files.push(json_path);
    }
    Ok(ExperimentOutput { spec, runs, report, files })
}
