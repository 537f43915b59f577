//! Geometric phase of a double STIRAP sequence: quadrature of
//! −∫sin²θ φ̇ dt against the closed form φ(t_a) − φ(t_a + ΔT).
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example berry_phase
//! ```

use stirap_gates::geomphase::{berry_phase_closed_form, berry_phase_numeric};
use stirap_gates::pulses::{PhaseRamp, StirapSchedule};

fn main() -> stirap_gates::Result<()> {
    println!("  fwhm  intra  inter  slope    numeric        closed form    diff");
    for (fwhm, intra, inter, slope) in [
        (1.0, 1.0, 5.0, 1.0),
        (1.0, 1.0, 5.0, -0.3),
        (2.0, 1.5, 8.0, 0.5),
        (0.5, 0.6, 2.5, 2.0),
        (3.0, 3.0, 12.0, -0.1),
    ] {
        let s = StirapSchedule::new(fwhm, intra, inter, 0.0)?;
        let ramp = PhaseRamp::linear(0.0, slope);
        let numeric = berry_phase_numeric(&s, &ramp, fwhm / 200.0)?;
        let closed = berry_phase_closed_form(&ramp, s.t_a(), inter);
        println!(
            "{fwhm:6.2} {intra:6.2} {inter:6.2} {slope:6.2}  {:+.10}  {closed:+.10}  {:.1e} (±{:.0e})",
            numeric.value,
            (numeric.value - closed).abs(),
            numeric.error
        );
    }
    Ok(())
}
