//! Pulse schedule, mixing angle and dressed states along the reference
//! lambda sequence, plus the tripod dressed basis for the Hadamard ratio.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --example dressed_states
//! ```

use std::f64::consts::PI;

use stirap_gates::pulses::{DriveField, PhaseRamp, StirapSchedule};
use stirap_gates::qcore::eig_hermitian;
use stirap_gates::systems::{tripod_dressed_states, LambdaSystem};

fn main() -> stirap_gates::Result<()> {
    let s = StirapSchedule::new(1.0, 1.0, 5.0, 0.0)?;
    let peak = 200.0 * PI;
    let sys = LambdaSystem {
        pump: DriveField::new("j", s.pump_envelopes(peak)?, PhaseRamp::default()),
        stokes: DriveField::new("2", s.stokes_envelopes(peak)?, PhaseRamp::linear(0.0, 1.0)),
        detuning: 0.0,
    };
    println!("timing: {:?}", s.timing());
    println!("   t     Ω_p       Ω_s      θ/π     eigenvalues of H/ħ");
    for k in 0..=16 {
        let t = 0.5 * k as f64;
        let eig = eig_hermitian(&sys.hamiltonian(t))?;
        let ev: Vec<String> = eig.eigenvalues.iter().map(|l| format!("{l:+8.2}")).collect();
        println!(
            "{t:5.2}  {:7.2}  {:7.2}  {:6.3}  {}",
            sys.pump.amplitude(t),
            sys.stokes.amplitude(t),
            s.mixing(t).theta() / PI,
            ev.join(" ")
        );
    }

    let theta01 = PI / 8.0;
    let b = tripod_dressed_states(theta01, 0.0, 2.0, peak * theta01.sin(), peak * theta01.cos())?;
    println!();
    println!("tripod at θ₀₁ = π/8, Δ = 2: ω± = {:?}, δ = {:?}", b.bright_frequencies, b.angles.delta);
    for (label, state) in b.labels.iter().zip(&b.states) {
        let amps: Vec<String> = state.amplitudes().iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
        println!("  |{label}> = [{}]", amps.join(", "));
    }
    println!("Gram deviation {:.1e}", b.gram_deviation());
    Ok(())
}
