//! Leakage out of D₅ for the two-atom gate: calibrate E so that a τ = 1
//! sequence leaks 0.5 %, then shorten the pulses at fixed E.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --release --example leakage_scan
//! ```

use stirap_gates::geomphase::{calibrate_coupling, wz_for_schedule};
use stirap_gates::pulses::StirapSchedule;

fn leakage(fwhm: f64, coupling: f64) -> stirap_gates::Result<f64> {
    let s = StirapSchedule::new(fwhm, fwhm, 5.0, 0.0)?;
    Ok(wz_for_schedule(&s, coupling, 1e-9)?.leakage)
}

fn main() -> stirap_gates::Result<()> {
    let coupling = calibrate_coupling(|e| leakage(1.0, e), 5e-3, 0.01, 50.0, 40)?;
    println!("E = {coupling:.6} gives 0.5 % leakage at τ = 1");
    println!("   τ     leakage");
    for fwhm in [1.0, 0.8, 0.6, 0.5, 0.4, 0.25] {
        println!("{fwhm:5.2}  {:8.4} %", 100.0 * leakage(fwhm, coupling)?);
    }
    Ok(())
}
