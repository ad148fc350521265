//! Side-by-side comparison of policies on one model.

use std::fmt;

use serde::Serialize;

use super::config::ExperimentSpec;
use super::runner::{run_experiment, RunOptions};
use crate::engine::mean_std;
use crate::error::{Error, Result};
use crate::sweep::SweepKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub name: String,
    pub policy: SweepKind,
    pub ansatz_blocks: usize,
    /// `(observable, mean over runs of the average error, mean over runs of its std)`.
    pub errors: Vec<(String, f64, f64)>,
    pub mean_infidelity: f64,
    /// Mean over runs of the total optimizer iterations.
    pub total_iterations: f64,
    /// Mean over runs of the total optimizer wall time.
    pub wall_ms: f64,
    pub mean_wall_ms_per_step: f64,
    /// Parameters optimized per step, averaged over steps and runs.
    pub parameters_per_step: f64,
    pub total_parameters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Runs every spec and tabulates the results. All specs must describe the
/// same model, time grid and measurement; only policy, blocks, optimizer
/// and seeds may differ.
pub fn compare_policies(specs: &[ExperimentSpec], opts: &RunOptions) -> Result<ComparisonTable> {
    let first = specs.first().ok_or_else(|| Error::Comparison("nothing to compare".into()))?;
    let signature = first.model_signature();
    if let Some(other) = specs.iter().find(|s| s.model_signature() != signature) {
        return Err(Error::Comparison(format!(
            "`{}` and `{}` describe different problems",
            first.name, other.name
        )));
    }
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let out = run_experiment(spec, opts)?;
        let summaries = &out.report.run_summaries;
        let errors = summaries[0]
            .observables
            .iter()
            .enumerate()
            .map(|(k, o)| {
                let (mean, _) = mean_std(summaries.iter().map(move |s| s.observables[k].mean_abs_error));
                let (std, _) = mean_std(summaries.iter().map(move |s| s.observables[k].std_abs_error));
                (o.name.clone(), mean, std)
            })
            .collect();
        let avg = |f: fn(&crate::engine::Summary) -> f64| mean_std(summaries.iter().map(f)).0;
        let steps = out.spec.num_steps as f64;
        let wall_ms = avg(|s| s.total_wall_ms);
        let block_size = out.runs[0].config.block_size;
        rows.push(ComparisonRow {
            name: out.spec.name.clone(),
            policy: out.spec.policy.kind,
            ansatz_blocks: out.spec.ansatz_blocks,
            errors,
            mean_infidelity: avg(|s| s.mean_infidelity),
            total_iterations: avg(|s| s.total_iterations as f64),
            wall_ms,
            mean_wall_ms_per_step: wall_ms / steps,
            parameters_per_step: avg(|s| s.mean_optimized_parameters),
            total_parameters: block_size * out.spec.ansatz_blocks,
        });
    }
    Ok(ComparisonTable { rows })
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(first) = self.rows.first() else {
            return Ok(());
        };
        write!(f, "{:<20} {:>6} {:>7}", "name", "blocks", "params")?;
        for (name, _, _) in &first.errors {
            write!(f, " {:>22}", format!("err({name})"))?;
        }
        writeln!(f, " {:>11} {:>10} {:>10}", "infidelity", "iterations", "wall_ms")?;
        for r in &self.rows {
            write!(
                f,
                "{:<20} {:>6} {:>7}",
                r.name,
                r.ansatz_blocks,
                format!("{}({})", r.total_parameters, r.parameters_per_step)
            )?;
            for (_, mean, std) in &r.errors {
                write!(f, " {:>22}", format!("{mean:.5} ± {std:.5}"))?;
            }
            writeln!(f, " {:>11.3e} {:>10.0} {:>10.1}", r.mean_infidelity, r.total_iterations, r.wall_ms)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::parse_config_str;

    fn spec(name: &str, blocks: usize, kind: &str, h: f64) -> ExperimentSpec {
        let text = format!(
            r#"{{"name": "{name}", "model": "tfim", "num_qubits": 3, "j": -0.25, "h": {h:?},
                "dt": 0.05, "num_steps": 4, "ansatz_blocks": {blocks}, "policy": {{"kind": "{kind}"}}}}"#
        );
        parse_config_str(&text, None).unwrap()
    }

    #[test]
    fn parameter_accounting_per_policy() {
        let specs = [spec("pvqd1", 1, "full", -1.0), spec("pvqd2", 2, "full", -1.0), spec("fs2", 2, "fidelity", -1.0)];
        let t = compare_policies(&specs, &RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 3);
        let m = 5.0; // 2 couplings + 3 fields
        assert_eq!(t.rows[0].parameters_per_step, m);
        assert_eq!(t.rows[1].parameters_per_step, 2.0 * m);
        assert_eq!(t.rows[2].parameters_per_step, m);
        assert_eq!(t.rows[2].total_parameters, 10);
        assert!(t.to_string().lines().count() == 4);
    }

    #[test]
    fn single_spec_single_row() {
        let t = compare_policies(&[spec("a", 1, "full", -1.0)], &RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn mismatched_models_rejected() {
        let specs = [spec("a", 1, "full", -1.0), spec("b", 2, "full", -0.5)];
        assert!(matches!(compare_policies(&specs, &RunOptions::default()), Err(Error::Comparison(_))));
        assert!(compare_policies(&[], &RunOptions::default()).is_err());
    }
}
