//! An experiment on a Hamiltonian read from a Pauli-sum text file.

use std::fs;

use pvqd::experiment::{parse_config, run_experiment, RunOptions};

const HAMILTONIAN: &str = "\
# two-leg ladder
1.0 X0*X1
1.0 X2*X3
0.5 Z0*Z2
0.5 Z1*Z3
-0.7 X0
-0.7 X3
";

const CONFIG: &str = r#"{
    "name": "ladder",
    "model": "custom",
    "num_qubits": 4,
    "hamiltonian_file": "ladder.txt",
    "observables": {"z_left": "1.0 Z0\n1.0 Z2", "xx": "1.0 X0*X1"},
    "dt": 0.05,
    "num_steps": 30,
    "ansatz_blocks": 2,
    "policy": {"kind": "fidelity"}
}"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("pvqd_custom_example");
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("ladder.txt"), HAMILTONIAN)?;
    fs::write(dir.join("ladder.json"), CONFIG)?;

    let spec = parse_config(dir.join("ladder.json"))?;
    let opts = RunOptions { out_dir: Some(dir.join("out")), ..Default::default() };
    let out = run_experiment(&spec, &opts)?;
    let s = &out.runs[0].summary;
    for o in &s.observables {
        println!("{:<8} mean |error| {:.5}", o.name, o.mean_abs_error);
    }
    println!("mean infidelity {:.3e}", s.mean_infidelity);
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
