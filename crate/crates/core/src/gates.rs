//! Gate protocols: drive configuration for the phase, Hadamard and
//! controlled-phase gates, propagation of the computational basis, unitary
//! reconstruction and certification against the target matrices.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8, PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geomphase::{transform_interaction, two_qubit_phase_for_schedule};
use crate::propagator::{adiabaticity_report, converge, Hamiltonian, TimeGrid, Trajectory};
use crate::pulses::{DriveField, PhaseRamp, StirapSchedule};
use crate::qcore::{
    eig_hermitian, phase_of, trace_fidelity, wrap_phase, Basis, StateVector, C64, POPULATION_FLOOR,
};
use crate::systems::{two_atom_dark_states, TripodSystem, TwoAtomTripod};

/// Reconstruction is refused above this out-of-subspace population.
pub const MAX_RECONSTRUCTION_LEAKAGE: f64 = 0.05;
/// Reports with more population outside the adiabatic subspace are flagged.
pub const ADIABATICITY_THRESHOLD: f64 = 1e-3;
/// θ₀₁ of the Hadamard drive, tan θ₀₁ = |Ω₀|/|Ω₁| = √2 − 1.
pub const HADAMARD_THETA01: f64 = FRAC_PI_8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    /// diag(1, e^{iφ₁}).
    Phase { phi1: f64 },
    Hadamard,
    /// diag(1, 1, 1, e^{iφ₂}).
    ControlledPhase { phi2: f64 },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Phase { .. } => "phase",
            GateKind::Hadamard => "hadamard",
            GateKind::ControlledPhase { .. } => "controlled_phase",
        }
    }

    pub fn target(&self) -> DMatrix<C64> {
        let one = C64::new(1.0, 0.0);
        match *self {
            GateKind::Phase { phi1 } => {
                DMatrix::from_diagonal(&nalgebra::dvector![one, C64::from_polar(1.0, phi1)])
            }
            GateKind::Hadamard => {
                let r = C64::new(FRAC_1_SQRT_2, 0.0);
                DMatrix::from_row_slice(2, 2, &[r, r, r, -r])
            }
            GateKind::ControlledPhase { phi2 } => DMatrix::from_diagonal(&nalgebra::dvector![
                one,
                one,
                one,
                C64::from_polar(1.0, phi2)
            ]),
        }
    }

    /// The geometric phase the protocol is set up to produce.
    pub fn requested_phase(&self) -> f64 {
        match *self {
            GateKind::Phase { phi1 } => phi1,
            GateKind::Hadamard => -PI,
            GateKind::ControlledPhase { phi2 } => phi2,
        }
    }
}

/// Integration settings shared by every basis-state run of a gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integration {
    /// Starting step of the halving ladder.
    pub base_step: f64,
    /// Stored-sample stride on the starting grid.
    pub sample_stride: usize,
    /// Terminal-state distance accepted between two refinements.
    pub tolerance: f64,
}

impl Integration {
    pub fn for_schedule(schedule: &StirapSchedule) -> Self {
        Integration {
            base_step: schedule.fwhm / 200.0,
            sample_stride: 1,
            tolerance: 1e-7,
        }
    }
}

/// A fully specified gate protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub schedule: StirapSchedule,
    /// Ω_max of the pump and Stokes fields; for the Hadamard gate the
    /// Stokes peak, with √(Ω_max,0² + Ω_max,1²) equal to it.
    pub peak: f64,
    /// Phase of the Stokes field (|2⟩ ↔ |e⟩).
    pub ramp: PhaseRamp,
    pub detuning: f64,
    /// Level shift E of |22⟩, controlled phase only.
    pub coupling: f64,
    pub integration: Integration,
}

impl GateSpec {
    /// Phase gate with the ramp slope fixed by −slope·ΔT = φ₁.
    pub fn phase(phi1: f64, schedule: StirapSchedule, peak: f64) -> Result<Self> {
        schedule.validate()?;
        check_peak(peak)?;
        Ok(GateSpec {
            kind: GateKind::Phase { phi1 },
            ramp: PhaseRamp::linear(0.0, -phi1 / schedule.inter_delay),
            peak,
            detuning: 0.0,
            coupling: 0.0,
            integration: Integration::for_schedule(&schedule),
            schedule,
        })
    }

    /// Hadamard gate: bright-state phase γ = −π.
    pub fn hadamard(schedule: StirapSchedule, peak: f64) -> Result<Self> {
        schedule.validate()?;
        check_peak(peak)?;
        Ok(GateSpec {
            kind: GateKind::Hadamard,
            ramp: PhaseRamp::linear(0.0, PI / schedule.inter_delay),
            peak,
            detuning: 0.0,
            coupling: 0.0,
            integration: Integration::for_schedule(&schedule),
            schedule,
        })
    }

    /// Controlled phase at fixed E with the schedule as given. The achieved
    /// phase is whatever −E∫sin⁴θ₂dt yields; see [`controlled_phase_for`]
    /// for tuning ΔT to a target.
    ///
    /// [`controlled_phase_for`]: GateSpec::controlled_phase_for
    pub fn controlled_phase(coupling: f64, schedule: StirapSchedule, peak: f64) -> Result<Self> {
        schedule.validate()?;
        check_peak(peak)?;
        let phi2 = two_qubit_phase_for_schedule(&schedule, coupling, schedule.fwhm / 400.0)?.value;
        Ok(GateSpec {
            kind: GateKind::ControlledPhase { phi2 },
            ramp: PhaseRamp::default(),
            peak,
            detuning: 0.0,
            coupling,
            integration: Integration {
                tolerance: 1e-6,
                ..Integration::for_schedule(&schedule)
            },
            schedule,
        })
    }

    /// Controlled phase with ΔT chosen so that −E∫sin⁴θ₂dt = φ₂ (mod 2π),
    /// using the smallest ΔT ≥ `min_inter_delay` that also keeps the
    /// schedule valid.
    pub fn controlled_phase_for(
        phi2: f64,
        coupling: f64,
        fwhm: f64,
        intra_delay: f64,
        min_inter_delay: f64,
        start: f64,
        peak: f64,
    ) -> Result<Self> {
        if coupling == 0.0 {
            if wrap_phase(phi2).abs() > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "coupling",
                    reason: format!("E = 0 cannot produce φ₂ = {phi2}"),
                });
            }
            let s = StirapSchedule::new(fwhm, intra_delay, min_inter_delay, start)?;
            let mut spec = GateSpec::controlled_phase(0.0, s, peak)?;
            spec.kind = GateKind::ControlledPhase { phi2 };
            return Ok(spec);
        }
        let floor = min_inter_delay.max(2.0 * fwhm + intra_delay);
        // ∫sin⁴θ₂ = ΔT − c, with c fixed by the pulse shapes alone
        let probe = StirapSchedule::new(fwhm, intra_delay, floor + fwhm, start)?;
        let integral = -two_qubit_phase_for_schedule(&probe, 1.0, fwhm / 400.0)?.value;
        let c = probe.inter_delay - integral;
        let base = -phi2 / coupling;
        let spacing = TAU / coupling.abs();
        let i_min = floor - c;
        let mut i = base + spacing * ((i_min - base) / spacing).ceil();
        if i + c <= floor {
            i += spacing;
        }
        let schedule = StirapSchedule::new(fwhm, intra_delay, i + c, start)?;
        let mut spec = GateSpec::controlled_phase(coupling, schedule, peak)?;
        spec.kind = GateKind::ControlledPhase { phi2 };
        Ok(spec)
    }

    pub fn with_integration(mut self, integration: Integration) -> Self {
        self.integration = integration;
        self
    }

    pub fn timing(&self) -> GateTiming {
        GateTiming {
            start: self.schedule.start,
            end: self.schedule.end(),
        }
    }

    fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(
            self.schedule.start,
            self.schedule.end(),
            self.integration.base_step,
            self.integration.sample_stride,
        )
    }

    /// The single-atom tripod this spec drives.
    pub fn tripod(&self) -> Result<TripodSystem> {
        let s = &self.schedule;
        let pump = |peak: f64| s.pump_envelopes(peak);
        let stokes = DriveField::new("2", s.stokes_envelopes(self.peak)?, self.ramp);
        let drives = match self.kind {
            GateKind::Hadamard => {
                let (sin, cos) = HADAMARD_THETA01.sin_cos();
                [
                    // Ω₀ = −(√2 − 1)Ω₁: opposite sign carried as phase π
                    DriveField::new("0", pump(self.peak * sin)?, PhaseRamp::constant(PI)),
                    DriveField::new("1", pump(self.peak * cos)?, PhaseRamp::default()),
                    stokes,
                ]
            }
            _ => [
                DriveField::off("0"),
                DriveField::new("1", pump(self.peak)?, PhaseRamp::default()),
                stokes,
            ],
        };
        Ok(TripodSystem {
            drives,
            detuning: self.detuning,
        })
    }

    pub fn two_atom(&self) -> Result<TwoAtomTripod> {
        let atom = self.tripod()?;
        Ok(TwoAtomTripod {
            atom_a: atom.clone(),
            atom_b: atom,
            coupling: self.coupling,
        })
    }
}

fn check_peak(peak: f64) -> Result<()> {
    if !(peak >= 0.0 && peak.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "peak",
            reason: format!("must be finite and >= 0, got {peak}"),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateTiming {
    pub start: f64,
    pub end: f64,
}

impl GateTiming {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Computational-subspace block of a set of propagated basis states.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub matrix: DMatrix<C64>,
    /// Population of each output outside the computational subspace.
    pub leakage: Vec<f64>,
}

/// Computational levels of a basis: `0, 1` for one atom, `00 … 11` for two.
pub fn computational_labels(basis: &Basis) -> Result<Vec<&'static str>> {
    match basis.len() {
        2 | 4 => Ok(vec!["0", "1"]),
        16 => Ok(vec!["00", "01", "10", "11"]),
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// Columns are the computational amplitudes of each output. The global phase
/// is fixed by making the first nonzero diagonal entry real and positive.
pub fn reconstruct_unitary(outputs: &[StateVector]) -> Result<Reconstruction> {
    let first = outputs.first().ok_or(Error::UnsupportedDimension(0))?;
    let labels = computational_labels(first.basis())?;
    let d = labels.len();
    if outputs.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: outputs.len(),
        });
    }
    let mut m = DMatrix::zeros(d, d);
    let mut leakage = Vec::with_capacity(d);
    for (j, out) in outputs.iter().enumerate() {
        if out.basis() != first.basis() {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: out.dim(),
            });
        }
        let mut kept = 0.0;
        for (i, l) in labels.iter().enumerate() {
            let a = out.amplitude(l)?;
            kept += a.norm_sqr();
            m[(i, j)] = a;
        }
        let lost = (out.norm_sq() - kept).max(0.0);
        if lost > MAX_RECONSTRUCTION_LEAKAGE {
            return Err(Error::ExcessLeakage {
                leakage: lost,
                limit: MAX_RECONSTRUCTION_LEAKAGE,
            });
        }
        leakage.push(lost);
    }
    if let Some(k) = (0..d).find(|&k| m[(k, k)].norm() > POPULATION_FLOOR) {
        let ph = m[(k, k)].arg();
        m *= C64::from_polar(1.0, -ph);
    }
    Ok(Reconstruction { matrix: m, leakage })
}

/// Everything measured in one gate run.
#[derive(Clone, Debug)]
pub struct GateReport {
    pub kind: GateKind,
    pub reconstructed: DMatrix<C64>,
    pub target: DMatrix<C64>,
    pub fidelity: f64,
    pub leakage: Vec<f64>,
    /// max over all runs and times of the population in levels with `e`.
    pub max_excited_population: f64,
    pub norm_drift: f64,
    /// max population found outside the instantaneous adiabatic subspace.
    pub adiabaticity: f64,
    pub low_confidence: bool,
    pub requested_phase: f64,
    /// Measured counterpart of the requested phase, on the branch nearest it.
    pub achieved_phase: f64,
    /// arg of each diagonal entry of the reconstructed matrix.
    pub diagonal_phases: Vec<f64>,
    pub accepted_steps: Vec<f64>,
    pub timing: GateTiming,
    /// Output state of each computational input.
    pub outputs: Vec<StateVector>,
}

struct BasisRun {
    traj: Trajectory,
    accepted_step: f64,
    adiabaticity: f64,
}

fn run_basis<H, F>(ham: &H, spec: &GateSpec, subspace: &F) -> Result<Vec<BasisRun>>
where
    H: Hamiltonian,
    F: Fn(f64) -> Vec<StateVector> + Sync,
{
    let basis = ham.basis();
    let grid = spec.grid()?;
    let labels = computational_labels(&basis)?;
    labels
        .par_iter()
        .map(|l| {
            let psi0 = StateVector::basis_state(&basis, l)?;
            let (traj, report) = converge(ham, &psi0, &grid, spec.integration.tolerance)?;
            let adiabaticity = adiabaticity_report(&traj, subspace)?;
            Ok(BasisRun {
                traj,
                accepted_step: report.accepted_step,
                adiabaticity,
            })
        })
        .collect()
}

/// Instantaneous zero-energy eigenspace of H(t); the lower levels when H
/// vanishes.
fn dark_subspace<H: Hamiltonian>(ham: &H, t: f64) -> Vec<StateVector> {
    let h = ham.at(t);
    let basis = ham.basis();
    let scale = h.norm();
    if scale == 0.0 {
        let excited = basis.excited_indices();
        return (0..basis.len())
            .filter(|k| !excited.contains(k))
            .map(|k| StateVector::basis_state(&basis, &basis.labels()[k]).expect("label from basis"))
            .collect();
    }
    let eig = eig_hermitian(&h).expect("Hermitian eigensolver");
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= 1e-9 * scale)
        .map(|(k, _)| StateVector::normalized(eig.eigenvector(k), basis.clone()).expect("unit eigenvector"))
        .collect()
}

fn assemble(spec: &GateSpec, runs: Vec<BasisRun>, achieved: impl Fn(&DMatrix<C64>) -> f64) -> Result<GateReport> {
    let outputs: Vec<StateVector> = runs.iter().map(|r| r.traj.final_state().clone()).collect();
    let rec = reconstruct_unitary(&outputs)?;
    let target = spec.kind.target();
    let fidelity = trace_fidelity(&target, &rec.matrix)?.clamp(0.0, 1.0);
    let adiabaticity = runs.iter().map(|r| r.adiabaticity).fold(0.0, f64::max);
    let requested = spec.kind.requested_phase();
    let raw = achieved(&rec.matrix);
    Ok(GateReport {
        kind: spec.kind,
        diagonal_phases: (0..rec.matrix.nrows())
            .map(|k| phase_of(rec.matrix[(k, k)]).unwrap_or(0.0))
            .collect(),
        target,
        fidelity,
        leakage: rec.leakage,
        max_excited_population: runs.iter().map(|r| r.traj.max_excited_population).fold(0.0, f64::max),
        norm_drift: runs.iter().map(|r| r.traj.norm_drift).fold(0.0, f64::max),
        adiabaticity,
        low_confidence: adiabaticity > ADIABATICITY_THRESHOLD,
        requested_phase: requested,
        achieved_phase: requested + wrap_phase(raw - requested),
        accepted_steps: runs.iter().map(|r| r.accepted_step).collect(),
        timing: spec.timing(),
        reconstructed: rec.matrix,
        outputs,
    })
}

fn relative_phase(m: &DMatrix<C64>, k: usize) -> f64 {
    (m[(k, k)] * m[(0, 0)].conj()).arg()
}

/// One-qubit phase gate through the tripod with Ω₀ off.
pub fn run_phase_gate(spec: &GateSpec) -> Result<GateReport> {
    expect_kind(spec, "phase")?;
    let sys = spec.tripod()?;
    let runs = run_basis(&sys, spec, &|t| dark_subspace(&sys, t))?;
    assemble(spec, runs, |m| relative_phase(m, 1))
}

/// Hadamard gate through the tripod with all three fields.
pub fn run_hadamard(spec: &GateSpec) -> Result<GateReport> {
    expect_kind(spec, "hadamard")?;
    let sys = spec.tripod()?;
    let runs = run_basis(&sys, spec, &|t| dark_subspace(&sys, t))?;
    assemble(spec, runs, |m| {
        // phase of the bright combination relative to the untouched |D_H⟩
        let (s, c) = HADAMARD_THETA01.sin_cos();
        let dark = nalgebra::dvector![C64::new(c, 0.0), C64::new(s, 0.0)];
        let bright = nalgebra::dvector![C64::new(-s, 0.0), C64::new(c, 0.0)];
        let on_b = bright.dotc(&(m * &bright));
        let on_d = dark.dotc(&(m * &dark));
        (on_b * on_d.conj()).arg()
    })
}

/// Two-qubit controlled phase through the 16-level two-atom tripod.
pub fn run_controlled_phase(spec: &GateSpec) -> Result<GateReport> {
    expect_kind(spec, "controlled_phase")?;
    let sys = spec.two_atom()?;
    let theta = crate::geomphase::schedule_theta2(&spec.schedule);
    let e = spec.coupling;
    // D₁ … D₅ in the Schrödinger picture; population in D₆ counts as leakage
    let subspace = |t: f64| {
        two_atom_dark_states(theta(t), e, t)
            .states
            .into_iter()
            .take(5)
            .map(|d| transform_interaction(&d, e, t).expect("16-level state"))
            .collect::<Vec<_>>()
    };
    let runs = run_basis(&sys, spec, &subspace)?;
    assemble(spec, runs, |m| relative_phase(m, 3))
}

/// Dispatches on the gate kind.
pub fn run_gate(spec: &GateSpec) -> Result<GateReport> {
    match spec.kind {
        GateKind::Phase { .. } => run_phase_gate(spec),
        GateKind::Hadamard => run_hadamard(spec),
        GateKind::ControlledPhase { .. } => run_controlled_phase(spec),
    }
}

fn expect_kind(spec: &GateSpec, name: &'static str) -> Result<()> {
    if spec.kind.name() != name {
        return Err(Error::InvalidParameter {
            name: "kind",
            reason: format!("expected a {name} gate spec, got {}", spec.kind.name()),
        });
    }
    Ok(())
}
