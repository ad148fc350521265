//! Comparison table for several policies on one model, as `pvqd compare` prints it.

use pvqd::experiment::{compare_policies, parse_config_str, RunOptions};

fn spec(name: &str, blocks: usize, kind: &str) -> pvqd::Result<pvqd::experiment::ExperimentSpec> {
    parse_config_str(
        &format!(
            r#"{{"name": "{name}", "model": "tfim", "num_qubits": 6, "j": -0.25, "h": -1.0,
                "dt": 0.02, "num_steps": 50, "ansatz_blocks": {blocks}, "policy": {{"kind": "{kind}"}},
                "num_runs": 3}}"#
        ),
        None,
    )
}

fn main() -> pvqd::Result<()> {
    let specs = [
        spec("pvqd1", 1, "full")?,
        spec("pvqd2", 2, "full")?,
        spec("sequential2", 2, "sequential")?,
        spec("random2", 2, "random")?,
        spec("fidelity2", 2, "fidelity")?,
    ];
    print!("{}", compare_policies(&specs, &RunOptions::default())?);
    Ok(())
}
