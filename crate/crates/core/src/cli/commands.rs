//! The four subcommands as library functions: each takes a validated config
//! and an output directory, writes its files and returns what it wrote.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, GateName, SystemKind};
use super::CliError;
use crate::gates::{run_gate, GateReport, GateSpec};
use crate::geomphase::{berry_phase_closed_form, berry_phase_numeric, two_qubit_phase_for_schedule, wz_for_schedule};
use crate::propagator::{converge, overlap_guide, Hamiltonian, TimeGrid, Trajectory};
use crate::pulses::{DriveField, PhaseProfile, PhaseRamp, StirapSchedule};
use crate::qcore::{StateVector, C64};
use crate::systems::{dark_state, LambdaSystem};

/// Shortest round-trip decimal form.
fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// One written file in a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    /// sha256 of the config file bytes.
    pub config_hash: String,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    /// Checks that every listed file exists under `dir` with its hash.
    pub fn verify(&self, dir: &Path) -> Result<(), CliError> {
        for o in &self.outputs {
            let bytes = fs::read(dir.join(&o.path)).map_err(|e| CliError::Io(format!("{}: {e}", o.path)))?;
            if sha256_hex(&bytes) != o.sha256 {
                return Err(CliError::Io(format!("{}: content hash mismatch", o.path)));
            }
        }
        Ok(())
    }
}

fn write_manifest(
    cfg: &ExperimentConfig,
    config_bytes: &[u8],
    command: &str,
    dir: &Path,
    outputs: Vec<(String, Vec<u8>, f64)>,
) -> Result<RunManifest, CliError> {
    let mut records = Vec::new();
    for (name, bytes, secs) in outputs {
        write_file(dir, &name, &bytes)?;
        records.push(OutputRecord {
            sha256: sha256_hex(&bytes),
            path: name,
            wall_clock_seconds: secs,
        });
    }
    let m = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config_hash: sha256_hex(config_bytes),
        outputs: records,
    };
    let text = serde_json::to_vec_pretty(&m).expect("manifest serializes");
    write_file(dir, &cfg.output.manifest, &text)?;
    Ok(m)
}

enum System {
    Lambda(LambdaSystem),
    Tripod(crate::systems::TripodSystem),
    TwoAtom(crate::systems::TwoAtomTripod),
}

impl System {
    fn as_dyn(&self) -> &dyn Hamiltonian {
        match self {
            System::Lambda(s) => s,
            System::Tripod(s) => s,
            System::TwoAtom(s) => s,
        }
    }
}

fn build_system(cfg: &ExperimentConfig) -> Result<(System, StirapSchedule, PhaseRamp), CliError> {
    let sched = cfg.schedule()?;
    match cfg.system.kind {
        SystemKind::Lambda => {
            let peak = cfg.pulses.peak;
            let ramp = cfg.ramp();
            let sys = LambdaSystem {
                pump: DriveField::new("j", sched.pump_envelopes(peak)?, PhaseRamp::default()),
                stokes: DriveField::new("2", sched.stokes_envelopes(peak)?, ramp),
                detuning: cfg.system.detuning,
            };
            Ok((System::Lambda(sys), sched, ramp))
        }
        SystemKind::Tripod => {
            let spec = cfg.gate_spec()?;
            Ok((System::Tripod(spec.tripod()?), spec.schedule, spec.ramp))
        }
        SystemKind::TwoAtom => {
            let spec = cfg.gate_spec()?;
            Ok((System::TwoAtom(spec.two_atom()?), spec.schedule, spec.ramp))
        }
    }
}

/// Picks the 2π branch of each phase column from the dark state when the
/// state follows it (lambda, and the tripod with Ω₀ off), so phases stay
/// continuous across population gaps.
fn guide_phases(cfg: &ExperimentConfig, sched: &StirapSchedule, ramp: PhaseRamp, traj: &mut Trajectory) -> Result<(), CliError> {
    let embed: Option<&[usize]> = match cfg.system.kind {
        SystemKind::Lambda => Some(&[0, 1, 2]),
        SystemKind::Tripod if cfg.gate.as_ref().map(|g| g.kind) != Some(GateName::Hadamard) => Some(&[1, 3, 2]),
        _ => None,
    };
    let Some(embed) = embed else { return Ok(()) };
    let basis = traj.basis.clone();
    let reference = |t: f64| {
        let d = dark_state(sched.mixing(t).theta(), ramp.value(t));
        let mut a = nalgebra::DVector::zeros(basis.len());
        for (k, &slot) in embed.iter().enumerate() {
            a[slot] = d.amplitudes()[k];
        }
        StateVector::new(a, basis.clone()).expect("embedded dark state")
    };
    let follows = traj
        .times
        .iter()
        .zip(&traj.states)
        .all(|(t, psi)| reference(*t).inner(psi).map(|z| z.norm_sqr() >= 0.5).unwrap_or(false));
    if follows {
        let guide = overlap_guide(traj, reference)?;
        traj.rebranch(&guide)?;
    }
    Ok(())
}

/// Propagates the configured initial state and renders the trajectory CSV.
pub fn simulate_trajectory(cfg: &ExperimentConfig) -> Result<Trajectory, CliError> {
    let (sys, sched, ramp) = build_system(cfg)?;
    let h = sys.as_dyn();
    let grid = TimeGrid::new(
        cfg.grid.t_start.unwrap_or(sched.start),
        cfg.grid.t_end.unwrap_or(sched.end()),
        cfg.grid.base_step.unwrap_or(sched.fwhm / 200.0),
        cfg.grid.sample_stride,
    )?;
    let psi0 = StateVector::basis_state(&h.basis(), &cfg.initial_label())?;
    let (mut traj, _) = converge(h, &psi0, &grid, cfg.grid.convergence_tol)?;
    guide_phases(cfg, &sched, ramp, &mut traj)?;
    Ok(traj)
}

pub fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let labels = traj.basis.labels();
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(labels.iter().map(|l| format!("pop_{l}")))
        .chain(labels.iter().map(|l| format!("phase_{l}")))
        .collect();
    w.write_record(&header).expect("in-memory write");
    for ((t, pops), phases) in traj.times.iter().zip(&traj.populations).zip(&traj.phases) {
        let row: Vec<String> = std::iter::once(num(*t))
            .chain(pops.iter().map(|p| num(*p)))
            .chain(phases.iter().map(|p| p.map(num).unwrap_or_default()))
            .collect();
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn simulate(cfg: &ExperimentConfig, config_bytes: &[u8], out: &Path) -> Result<RunManifest, CliError> {
    let clock = Instant::now();
    let traj = simulate_trajectory(cfg)?;
    let csv = trajectory_csv(&traj);
    let secs = clock.elapsed().as_secs_f64();
    write_manifest(cfg, config_bytes, "simulate", out, vec![(cfg.output.trajectory.clone(), csv, secs)])
}

type Pair = [f64; 2];

fn matrix_pairs(m: &DMatrix<C64>) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateParameters {
    pub peak: f64,
    pub fwhm: f64,
    pub intra_delay: f64,
    pub inter_delay: f64,
    pub start: f64,
    pub ramp_offset: f64,
    pub ramp_slope: f64,
    pub detuning: f64,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDiagnostics {
    pub leakage: Vec<f64>,
    pub max_excited_population: f64,
    pub norm_drift: f64,
    pub adiabaticity: f64,
    pub low_confidence: bool,
    pub diagonal_phases: Vec<f64>,
    pub accepted_steps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateTimingJson {
    pub start: f64,
    pub end: f64,
    pub duration: f64,
}

/// JSON form of a gate report; complex entries are [re, im] pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReportJson {
    pub kind: String,
    pub fidelity: f64,
    pub requested_phase: f64,
    pub achieved_phase: f64,
    pub reconstructed: Vec<Vec<Pair>>,
    pub target: Vec<Vec<Pair>>,
    pub diagnostics: GateDiagnostics,
    pub timing: GateTimingJson,
    pub parameters: GateParameters,
}

impl GateReportJson {
    pub fn new(spec: &GateSpec, r: &GateReport) -> Self {
        GateReportJson {
            kind: r.kind.name().into(),
            fidelity: r.fidelity,
            requested_phase: r.requested_phase,
            achieved_phase: r.achieved_phase,
            reconstructed: matrix_pairs(&r.reconstructed),
            target: matrix_pairs(&r.target),
            diagnostics: GateDiagnostics {
                leakage: r.leakage.clone(),
                max_excited_population: r.max_excited_population,
                norm_drift: r.norm_drift,
                adiabaticity: r.adiabaticity,
                low_confidence: r.low_confidence,
                diagonal_phases: r.diagonal_phases.clone(),
                accepted_steps: r.accepted_steps.clone(),
            },
            timing: GateTimingJson {
                start: r.timing.start,
                end: r.timing.end,
                duration: r.timing.duration(),
            },
            parameters: GateParameters {
                peak: spec.peak,
                fwhm: spec.schedule.fwhm,
                intra_delay: spec.schedule.intra_delay,
                inter_delay: spec.schedule.inter_delay,
                start: spec.schedule.start,
                ramp_offset: spec.ramp.offset,
                ramp_slope: spec.ramp.slope,
                detuning: spec.detuning,
                coupling: spec.coupling,
            },
        }
    }
}

/// Builds and runs the configured gate.
pub fn gate_report(cfg: &ExperimentConfig) -> Result<(GateSpec, GateReport), CliError> {
    if cfg.gate.is_none() {
        return Err(CliError::Config(super::config::ConfigError::new("gate", "missing [gate] section")));
    }
    let spec = cfg.gate_spec()?;
    let report = run_gate(&spec)?;
    Ok((spec, report))
}

pub fn gate(cfg: &ExperimentConfig, config_bytes: &[u8], out: &Path) -> Result<RunManifest, CliError> {
    let clock = Instant::now();
    let (spec, report) = gate_report(cfg)?;
    let json = serde_json::to_vec_pretty(&GateReportJson::new(&spec, &report)).expect("report serializes");
    let secs = clock.elapsed().as_secs_f64();
    write_manifest(cfg, config_bytes, "gate", out, vec![(cfg.output.gate_report.clone(), json, secs)])
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    pub outcome: Result<SweepResult, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub fidelity: f64,
    pub requested_phase: f64,
    pub achieved_phase: f64,
    pub leakage: f64,
    pub max_excited_population: f64,
}

impl SweepResult {
    fn from_report(r: &GateReport) -> Self {
        SweepResult {
            fidelity: r.fidelity,
            requested_phase: r.requested_phase,
            achieved_phase: r.achieved_phase,
            leakage: r.leakage.iter().copied().fold(0.0, f64::max),
            max_excited_population: r.max_excited_population,
        }
    }
}

/// Runs every grid point in parallel; rows come back in grid order (first
/// axis outermost).
pub fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let axes = &cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config(super::config::ConfigError::new("sweep", "missing [sweep] section")))?
        .axes;
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for a in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                a.values().into_iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(points
        .into_par_iter()
        .map(|values| {
            let mut c = cfg.clone();
            for (a, v) in axes.iter().zip(&values) {
                c = c.with_parameter(a.parameter, *v);
            }
            c.sweep = None;
            let outcome = c
                .validate()
                .map_err(|e| e.to_string())
                .and_then(|_| gate_report(&c).map_err(|e| e.to_string()))
                .map(|(_, r)| SweepResult::from_report(&r));
            SweepRow { values, outcome }
        })
        .collect())
}

pub fn sweep_csv(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let axes = &cfg.sweep.as_ref().expect("sweep rows come from a sweep config").axes;
    let header: Vec<&str> = axes
        .iter()
        .map(|a| a.parameter.name())
        .chain([
            "fidelity",
            "requested_phase",
            "achieved_phase",
            "leakage",
            "max_excited_population",
            "error",
        ])
        .collect();
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec: Vec<String> = r.values.iter().map(|v| num(*v)).collect();
        match &r.outcome {
            Ok(s) => {
                rec.extend(
                    [s.fidelity, s.requested_phase, s.achieved_phase, s.leakage, s.max_excited_population].map(num),
                );
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(std::iter::repeat_n(String::new(), 5));
                rec.push(e.clone());
            }
        }
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn sweep(cfg: &ExperimentConfig, config_bytes: &[u8], out: &Path) -> Result<RunManifest, CliError> {
    let clock = Instant::now();
    let rows = sweep_rows(cfg)?;
    let csv = sweep_csv(cfg, &rows);
    let secs = clock.elapsed().as_secs_f64();
    let manifest = write_manifest(cfg, config_bytes, "sweep", out, vec![(cfg.output.sweep.clone(), csv, secs)])?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        return Err(CliError::PartialSweep {
            failed,
            total: rows.len(),
        });
    }
    Ok(manifest)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitPhases {
    pub coupling: f64,
    pub integral_phase: f64,
    pub integral_error: f64,
    pub wz_phase: f64,
    pub wz_leakage: f64,
    pub difference: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub berry_phase_numeric: f64,
    pub quadrature_error: f64,
    pub berry_phase_closed_form: f64,
    pub difference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_qubit: Option<TwoQubitPhases>,
}

pub fn phase_summary(cfg: &ExperimentConfig) -> Result<PhaseSummary, CliError> {
    let (sched, ramp, coupling) = match cfg.system.kind {
        SystemKind::Lambda => (cfg.schedule()?, cfg.ramp(), None),
        SystemKind::Tripod => {
            let spec = cfg.gate_spec()?;
            (spec.schedule, spec.ramp, None)
        }
        SystemKind::TwoAtom => {
            let spec = cfg.gate_spec()?;
            (spec.schedule, spec.ramp, Some(spec.coupling))
        }
    };
    let quad_step = sched.fwhm / 200.0;
    let num = berry_phase_numeric(&sched, &ramp, quad_step)?;
    let closed = berry_phase_closed_form(&ramp, sched.t_a(), sched.inter_delay);
    let two_qubit = match coupling {
        None => None,
        Some(e) => {
            let integral = two_qubit_phase_for_schedule(&sched, e, quad_step)?;
            let wz = wz_for_schedule(&sched, e, cfg.grid.convergence_tol)?;
            Some(TwoQubitPhases {
                coupling: e,
                integral_phase: integral.value,
                integral_error: integral.error,
                wz_phase: wz.terminal_phase,
                wz_leakage: wz.leakage,
                difference: (wz.terminal_phase - integral.value).abs(),
            })
        }
    };
    Ok(PhaseSummary {
        berry_phase_numeric: num.value,
        quadrature_error: num.error,
        berry_phase_closed_form: closed,
        difference: (num.value - closed).abs(),
        two_qubit,
    })
}

pub fn phase(cfg: &ExperimentConfig, config_bytes: &[u8], out: &Path) -> Result<RunManifest, CliError> {
    let clock = Instant::now();
    let summary = phase_summary(cfg)?;
    let json = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    let secs = clock.elapsed().as_secs_f64();
    write_manifest(cfg, config_bytes, "phase", out, vec![(cfg.output.phase.clone(), json, secs)])
}
