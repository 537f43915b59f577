//! Single-qubit phase gate diag(1, e^{iφ₁}) on a tripod, for a few φ₁.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --release --example phase_gate
//! ```

use std::f64::consts::PI;

use stirap_gates::gates::{run_phase_gate, GateSpec};
use stirap_gates::pulses::StirapSchedule;

fn main() -> stirap_gates::Result<()> {
    let schedule = StirapSchedule::new(1.0, 1.0, 5.0, 0.0)?;
    println!("  requested    achieved    fidelity      max pop_e");
    for phi1 in [PI / 4.0, PI / 2.0, PI, -PI / 3.0] {
        let r = run_phase_gate(&GateSpec::phase(phi1, schedule, 200.0 * PI)?)?;
        println!(
            "  {:+.6}  {:+.6}  {:.10}  {:.2e}",
            r.requested_phase, r.achieved_phase, r.fidelity, r.max_excited_population
        );
    }
    Ok(())
}
