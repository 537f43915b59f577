//! Hadamard gate from a tripod with θ₀₁ = π/8 and a π geometric phase.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --release --example hadamard
//! ```

use std::f64::consts::PI;

use stirap_gates::gates::{run_hadamard, GateSpec};
use stirap_gates::pulses::StirapSchedule;

fn main() -> stirap_gates::Result<()> {
    let spec = GateSpec::hadamard(StirapSchedule::new(1.0, 1.0, 5.0, 0.0)?, 200.0 * PI)?;
    let r = run_hadamard(&spec)?;
    for (input, out) in ["0", "1"].iter().zip(&r.outputs) {
        let a0 = out.amplitude("0")?;
        let a1 = out.amplitude("1")?;
        println!(
            "|{input}> -> ({:+.5}{:+.5}i)|0> + ({:+.5}{:+.5}i)|1>",
            a0.re, a0.im, a1.re, a1.im
        );
    }
    println!("reconstructed gate:");
    for i in 0..2 {
        let row: Vec<String> = (0..2)
            .map(|j| format!("{:+.5}{:+.5}i", r.reconstructed[(i, j)].re, r.reconstructed[(i, j)].im))
            .collect();
        println!("  [{}]", row.join(", "));
    }
    println!("fidelity {:.10}, leakage {:?}", r.fidelity, r.leakage);
    Ok(())
}
