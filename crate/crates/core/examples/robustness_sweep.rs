//! Phase-gate fidelity over a ±10 % band of peak Rabi frequency, driven by
//! the same config file the `stirap sweep` command reads.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --release --example robustness_sweep
//! ```

use std::path::Path;

use stirap_gates::cli::{sweep_rows, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/robustness_sweep.toml");
    let cfg = ExperimentConfig::parse(&std::fs::read_to_string(path)?)?;
    let rows = sweep_rows(&cfg)?;
    println!("      peak      fidelity      achieved phase");
    for row in &rows {
        match &row.outcome {
            Ok(r) => println!("{:10.3}  {:.10}  {:+.8}", row.values[0], r.fidelity, r.achieved_phase),
            Err(e) => println!("{:10.3}  failed: {e}", row.values[0]),
        }
    }
    Ok(())
}
