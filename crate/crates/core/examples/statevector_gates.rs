//! Pauli rotations on a small register and their expectation values.

use pvqd::pauli::{magnetization, Pauli, PauliSum, PauliWord};
use pvqd::statevec::StateVector;

fn main() -> pvqd::Result<()> {
    let mut s = StateVector::zero(3)?;
    println!("<Z> on |000>: {:.6}", s.expectation(&magnetization(3, Pauli::Z)?)?);

    // exp(-i pi/4 Y0) takes qubit 0 to |+>
    s.rotate(&PauliWord::single(0, Pauli::Y)?, std::f64::consts::FRAC_PI_2)?;
    let zz = PauliWord::pair(0, Pauli::Z, 1, Pauli::Z)?;
    s.rotate(&zz, 0.8)?;
    println!("norm after two gates: {:.15}", s.norm());

    let obs = PauliSum::parse("1.0 X0\n0.5 Z0*Z1\n-0.25 Y0*Z1", Some(3))?;
    println!("<0.5 Z0Z1 + X0 - 0.25 Y0Z1> = {:.6}", s.expectation(&obs)?);
    for (b, p) in s.probabilities().iter().enumerate().filter(|(_, p)| **p > 1e-12) {
        println!("P(|{b:03b}>) = {p:.4}");
    }
    Ok(())
}
