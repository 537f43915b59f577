//! Reference lambda run: two STIRAP sequences with a linear Stokes phase
//! sweep return the population to |j⟩ with a −5 rad geometric phase.
//!
//! Run with:
//!
//! ```not_rust
//! cargo run --release --example lambda_phase
//! ```

use std::f64::consts::PI;

use stirap_gates::propagator::{converge, overlap_guide, TimeGrid};
use stirap_gates::pulses::{DriveField, PhaseProfile, PhaseRamp, StirapSchedule};
use stirap_gates::systems::{dark_state, LambdaSystem};
use stirap_gates::{Basis, StateVector};

fn main() -> stirap_gates::Result<()> {
    let schedule = StirapSchedule::new(1.0, 1.0, 5.0, 0.0)?;
    let peak = 200.0 * PI;
    let ramp = PhaseRamp::linear(0.0, 1.0);
    let sys = LambdaSystem {
        pump: DriveField::new("j", schedule.pump_envelopes(peak)?, PhaseRamp::default()),
        stokes: DriveField::new("2", schedule.stokes_envelopes(peak)?, ramp),
        detuning: 0.0,
    };

    let psi0 = StateVector::basis_state(&Basis::lambda(), "j")?;
    let grid = TimeGrid::new(schedule.start, schedule.end(), schedule.fwhm / 200.0, 20)?;
    let (mut traj, report) = converge(&sys, &psi0, &grid, 1e-8)?;

    // |j⟩ is empty between the sequences, so follow the dark state across it
    let guide = overlap_guide(&traj, |t| dark_state(schedule.mixing(t).theta(), ramp.value(t)))?;
    traj.rebranch(&guide)?;

    println!("    t      pop_j     pop_e     pop_2     phase_j");
    for (k, t) in traj.times.iter().enumerate().step_by(4) {
        let p = &traj.populations[k];
        let phase = traj.phases[k][0].map_or("-".to_string(), |x| format!("{x:.4}"));
        println!("{t:6.2}  {:8.5}  {:8.1e}  {:8.5}  {phase:>9}", p[0], p[1], p[2]);
    }
    println!();
    println!("terminal phase of |j>: {:.6} rad", traj.terminal_phase("j")?.unwrap_or(f64::NAN));
    println!("max excited population: {:.2e}", traj.max_excited_population);
    println!("accepted step: {:.2e} ({} halvings)", report.accepted_step, report.steps.len() - 1);
    Ok(())
}
