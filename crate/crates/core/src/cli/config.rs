//! TOML experiment configuration.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gates::{GateSpec, Integration};
use crate::pulses::{PhaseRamp, StirapSchedule};
use crate::qcore::Basis;

/// A validation failure tied to a config key.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Lambda,
    Tripod,
    TwoAtom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    /// One-photon detuning Δ (rad/T₀).
    #[serde(default)]
    pub detuning: f64,
    /// Level shift E of |22⟩ (rad/T₀), two-atom only.
    #[serde(default)]
    pub coupling: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampConfig {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// Ω_max of pump and Stokes (rad/T₀).
    pub peak: f64,
    /// τ.
    pub fwhm: f64,
    /// Δt.
    pub intra_delay: f64,
    /// ΔT.
    pub inter_delay: f64,
    #[serde(default)]
    pub start: f64,
    /// Phase of the Stokes field.
    #[serde(default)]
    pub ramp: RampConfig,
}

fn default_stride() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to the schedule start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    /// Defaults to the schedule end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Starting step of the halving ladder; defaults to fwhm/200.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_step: Option<f64>,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            t_start: None,
            t_end: None,
            base_step: None,
            sample_stride: default_stride(),
            convergence_tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateName {
    Phase,
    Hadamard,
    ControlledPhase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub kind: GateName,
    /// φ₁ for the phase gate (sets the ramp slope), φ₂ for the controlled
    /// phase (sets ΔT, with `inter_delay` as lower bound). Not used by the
    /// Hadamard gate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_phase: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Peak,
    Fwhm,
    IntraDelay,
    InterDelay,
    Slope,
    Detuning,
    Coupling,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Peak => "peak",
            SweepParameter::Fwhm => "fwhm",
            SweepParameter::IntraDelay => "intra_delay",
            SweepParameter::InterDelay => "inter_delay",
            SweepParameter::Slope => "slope",
            SweepParameter::Detuning => "detuning",
            SweepParameter::Coupling => "coupling",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepAxis {
    /// Evenly spaced values from `start` to `stop` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub trajectory: String,
    pub gate_report: String,
    pub sweep: String,
    pub phase: String,
    pub manifest: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            trajectory: "trajectory.csv".into(),
            gate_report: "gate_report.json".into(),
            sweep: "sweep.csv".into(),
            phase: "phase.json".into(),
            manifest: "manifest.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Carried through for reproducibility records; the built-in commands
    /// draw no random numbers.
    #[serde(default)]
    pub seed: u64,
    pub system: SystemConfig,
    pub pulses: PulseConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be finite and > 0, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(field, format!("must be finite, got {v}")))
    }
}

fn file_name(field: &str, v: &str) -> Result<(), ConfigError> {
    let p = std::path::Path::new(v);
    if v.is_empty() || p.is_absolute() || p.components().count() != 1 {
        return Err(ConfigError::new(field, format!("must be a plain file name, got {v:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            ConfigError::new(field_from_toml(&e).unwrap_or_else(|| "config".into()), msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config types serialize to TOML")
    }

    pub fn basis(&self) -> Basis {
        match self.system.kind {
            SystemKind::Lambda => Basis::lambda(),
            SystemKind::Tripod => Basis::tripod(),
            SystemKind::TwoAtom => Basis::two_atom(),
        }
    }

    pub fn schedule(&self) -> Result<StirapSchedule, ConfigError> {
        let p = &self.pulses;
        StirapSchedule::new(p.fwhm, p.intra_delay, p.inter_delay, p.start)
            .map_err(|e| ConfigError::new("pulses", e.to_string()))
    }

    pub fn ramp(&self) -> PhaseRamp {
        PhaseRamp::linear(self.pulses.ramp.offset, self.pulses.ramp.slope)
    }

    pub fn initial_label(&self) -> String {
        match &self.initial {
            Some(i) => i.label.clone(),
            None => match self.system.kind {
                SystemKind::Lambda => "j".into(),
                SystemKind::Tripod => "1".into(),
                SystemKind::TwoAtom => "11".into(),
            },
        }
    }

    /// Every field checked; the first failure is returned with its key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.pulses;
        finite("pulses.peak", p.peak)?;
        if p.peak < 0.0 {
            return Err(ConfigError::new("pulses.peak", format!("must be >= 0, got {}", p.peak)));
        }
        positive("pulses.fwhm", p.fwhm)?;
        positive("pulses.intra_delay", p.intra_delay)?;
        positive("pulses.inter_delay", p.inter_delay)?;
        finite("pulses.start", p.start)?;
        finite("pulses.ramp.offset", p.ramp.offset)?;
        finite("pulses.ramp.slope", p.ramp.slope)?;
        if p.intra_delay >= 2.0 * p.fwhm {
            return Err(ConfigError::new(
                "pulses.intra_delay",
                format!("must be < 2·fwhm = {}, got {}", 2.0 * p.fwhm, p.intra_delay),
            ));
        }
        if p.inter_delay <= 2.0 * p.fwhm + p.intra_delay {
            return Err(ConfigError::new(
                "pulses.inter_delay",
                format!(
                    "must exceed 2·fwhm + intra_delay = {}, got {}",
                    2.0 * p.fwhm + p.intra_delay,
                    p.inter_delay
                ),
            ));
        }
        finite("system.detuning", self.system.detuning)?;
        finite("system.coupling", self.system.coupling)?;
        if self.system.kind != SystemKind::TwoAtom && self.system.coupling != 0.0 {
            return Err(ConfigError::new("system.coupling", "only meaningful for kind = \"two_atom\""));
        }

        let g = &self.grid;
        if let Some(t) = g.t_start {
            finite("grid.t_start", t)?;
        }
        if let Some(t) = g.t_end {
            finite("grid.t_end", t)?;
        }
        let sched = self.schedule()?;
        let (t0, t1) = (g.t_start.unwrap_or(sched.start), g.t_end.unwrap_or(sched.end()));
        if t1 <= t0 {
            return Err(ConfigError::new("grid.t_end", format!("must exceed t_start = {t0}, got {t1}")));
        }
        if let Some(h) = g.base_step {
            positive("grid.base_step", h)?;
        }
        if g.sample_stride == 0 {
            return Err(ConfigError::new("grid.sample_stride", "must be >= 1"));
        }
        positive("grid.convergence_tol", g.convergence_tol)?;

        if let Some(i) = &self.initial {
            self.basis()
                .index_of(&i.label)
                .map_err(|_| ConfigError::new("initial.label", format!("no level {:?} in this system", i.label)))?;
        }

        if let Some(gate) = &self.gate {
            self.validate_gate(gate)?;
        }

        if let Some(sweep) = &self.sweep {
            if sweep.axes.is_empty() || sweep.axes.len() > 2 {
                return Err(ConfigError::new(
                    "sweep.axes",
                    format!("need 1 or 2 axes, got {}", sweep.axes.len()),
                ));
            }
            if sweep.axes.len() == 2 && sweep.axes[0].parameter == sweep.axes[1].parameter {
                return Err(ConfigError::new("sweep.axes", "the two axes sweep the same parameter"));
            }
            for (k, a) in sweep.axes.iter().enumerate() {
                let field = |f: &str| format!("sweep.axes[{k}].{f}");
                finite(&field("start"), a.start)?;
                finite(&field("stop"), a.stop)?;
                if a.points == 0 {
                    return Err(ConfigError::new(field("points"), "must be >= 1"));
                }
                let gate = self
                    .gate
                    .as_ref()
                    .ok_or_else(|| ConfigError::new("gate", "a sweep needs a [gate] section"))?;
                let fixed_slope = gate.kind != GateName::Phase || gate.target_phase.is_some();
                if a.parameter == SweepParameter::Slope && fixed_slope {
                    return Err(ConfigError::new(
                        field("parameter"),
                        "the ramp slope is fixed by this gate; sweep it only for a phase gate without target_phase",
                    ));
                }
            }
        }

        let o = &self.output;
        file_name("output.trajectory", &o.trajectory)?;
        file_name("output.gate_report", &o.gate_report)?;
        file_name("output.sweep", &o.sweep)?;
        file_name("output.phase", &o.phase)?;
        file_name("output.manifest", &o.manifest)?;
        Ok(())
    }

    fn validate_gate(&self, gate: &GateConfig) -> Result<(), ConfigError> {
        let need = match gate.kind {
            GateName::Phase | GateName::Hadamard => SystemKind::Tripod,
            GateName::ControlledPhase => SystemKind::TwoAtom,
        };
        if self.system.kind != need {
            return Err(ConfigError::new(
                "system.kind",
                format!("gate {:?} runs on system kind {:?}", gate.kind, need),
            ));
        }
        if let Some(t) = gate.target_phase {
            finite("gate.target_phase", t)?;
        }
        match gate.kind {
            GateName::Hadamard if gate.target_phase.is_some() => Err(ConfigError::new(
                "gate.target_phase",
                "the Hadamard gate fixes its own phase",
            )),
            GateName::Hadamard | GateName::ControlledPhase if self.pulses.ramp.slope != 0.0 => Err(ConfigError::new(
                "pulses.ramp.slope",
                "this gate sets its own ramp; leave the slope at 0",
            )),
            GateName::ControlledPhase if self.system.detuning != 0.0 => Err(ConfigError::new(
                "system.detuning",
                "the controlled phase runs on resonance",
            )),
            GateName::ControlledPhase if self.system.coupling == 0.0 => match gate.target_phase {
                Some(t) if crate::qcore::wrap_phase(t).abs() > 1e-12 => Err(ConfigError::new(
                    "gate.target_phase",
                    "a nonzero target needs system.coupling != 0",
                )),
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Returns a copy with one swept parameter set.
    pub fn with_parameter(&self, p: SweepParameter, v: f64) -> ExperimentConfig {
        let mut c = self.clone();
        match p {
            SweepParameter::Peak => c.pulses.peak = v,
            SweepParameter::Fwhm => c.pulses.fwhm = v,
            SweepParameter::IntraDelay => c.pulses.intra_delay = v,
            SweepParameter::InterDelay => c.pulses.inter_delay = v,
            SweepParameter::Slope => c.pulses.ramp.slope = v,
            SweepParameter::Detuning => c.system.detuning = v,
            SweepParameter::Coupling => c.system.coupling = v,
        }
        c
    }

    pub fn integration(&self, schedule: &StirapSchedule) -> Integration {
        Integration {
            base_step: self.grid.base_step.unwrap_or(schedule.fwhm / 200.0),
            sample_stride: self.grid.sample_stride,
            tolerance: self.grid.convergence_tol,
        }
    }

    /// The gate protocol described by the config. Without a `[gate]`
    /// section, tripod and two-atom configs describe the phase-gate and
    /// controlled-phase drive layouts with the configured ramp.
    pub fn gate_spec(&self) -> Result<GateSpec, ConfigError> {
        let sched = self.schedule()?;
        let p = &self.pulses;
        let cfg_err = |e: crate::Error| ConfigError::new("gate", e.to_string());
        let kind = self.gate.as_ref().map(|g| g.kind);
        let target = self.gate.as_ref().and_then(|g| g.target_phase);
        let mut spec = match (self.system.kind, kind) {
            (SystemKind::Tripod, Some(GateName::Hadamard)) => GateSpec::hadamard(sched, p.peak).map_err(cfg_err)?,
            (SystemKind::Tripod, _) => match target {
                Some(phi1) => GateSpec::phase(phi1, sched, p.peak).map_err(cfg_err)?,
                None => {
                    let mut s = GateSpec::phase(-p.ramp.slope * p.inter_delay, sched, p.peak).map_err(cfg_err)?;
                    s.ramp = self.ramp();
                    s
                }
            },
            (SystemKind::TwoAtom, _) => {
                let e = self.system.coupling;
                let mut s = match target {
                    Some(phi2) => {
                        GateSpec::controlled_phase_for(phi2, e, p.fwhm, p.intra_delay, p.inter_delay, p.start, p.peak)
                            .map_err(cfg_err)?
                    }
                    None => GateSpec::controlled_phase(e, sched, p.peak).map_err(cfg_err)?,
                };
                s.ramp = self.ramp();
                s
            }
            (SystemKind::Lambda, _) => {
                return Err(ConfigError::new("system.kind", "gates run on \"tripod\" or \"two_atom\""));
            }
        };
        spec.detuning = self.system.detuning;
        spec.integration = self.integration(&spec.schedule);
        Ok(spec)
    }
}

fn field_from_toml(e: &toml::de::Error) -> Option<String> {
    // toml reports unknown/missing keys in the message; keep it whole and
    // let the caller show it alongside the offending span
    e.span().map(|s| format!("config (bytes {}..{})", s.start, s.end))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const REFERENCE: &str = r#"
[system]
kind = "lambda"

[pulses]
peak = 628.3185307179587
fwhm = 1.0
intra_delay = 1.0
inter_delay = 5.0

[pulses.ramp]
slope = 1.0

[grid]
sample_stride = 10
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = ExperimentConfig::parse(REFERENCE).unwrap();
        assert_eq!(c.system.kind, SystemKind::Lambda);
        assert_eq!(c.grid.convergence_tol, 1e-8);
        assert_eq!(c.initial_label(), "j");
        assert_eq!(c.output.trajectory, "trajectory.csv");
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::parse(REFERENCE).unwrap();
        c.gate = None;
        c.initial = Some(InitialConfig { label: "2".into() });
        c.grid.base_step = Some(0.1 + 0.2);
        c.seed = 42;
        let text = c.to_toml();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), c);

        let mut t = c.clone();
        t.system.kind = SystemKind::Tripod;
        t.initial = None;
        t.pulses.ramp.slope = 0.0;
        t.gate = Some(GateConfig {
            kind: GateName::Phase,
            target_phase: Some(-5.0),
        });
        t.sweep = Some(SweepConfig {
            axes: vec![SweepAxis {
                parameter: SweepParameter::Peak,
                start: 500.0,
                stop: 700.0,
                points: 3,
            }],
        });
        assert_eq!(ExperimentConfig::parse(&t.to_toml()).unwrap(), t);
    }

    fn err_field(text: &str) -> String {
        ExperimentConfig::parse(text).unwrap_err().field
    }

    #[test]
    fn validation_names_the_field() {
        assert_eq!(err_field(&REFERENCE.replace("fwhm = 1.0", "fwhm = -1.0")), "pulses.fwhm");
        assert_eq!(err_field(&REFERENCE.replace("intra_delay = 1.0", "intra_delay = 2.5")), "pulses.intra_delay");
        assert_eq!(err_field(&REFERENCE.replace("inter_delay = 5.0", "inter_delay = 2.0")), "pulses.inter_delay");
        assert_eq!(err_field(&REFERENCE.replace("sample_stride = 10", "sample_stride = 0")), "grid.sample_stride");
        assert_eq!(err_field(&format!("{REFERENCE}\n[initial]\nlabel = \"x\"\n")), "initial.label");
        assert_eq!(
            err_field(&format!("{REFERENCE}\n[gate]\nkind = \"hadamard\"\n")),
            "system.kind"
        );
        assert_eq!(
            err_field(&format!(
                "{REFERENCE}\n[sweep]\naxes = [{{ parameter = \"peak\", start = 1.0, stop = 2.0, points = 3 }}]\n"
            )),
            "gate"
        );
        assert_eq!(
            err_field(&REFERENCE.replace("sample_stride = 10", "sample_stride = 10\nconvergence_tol = 0.0")),
            "grid.convergence_tol"
        );
    }

    #[test]
    fn malformed_toml_is_an_error_not_a_panic() {
        for bad in [
            "",
            "[system]\nkind = \"qutrit\"\n",
            &REFERENCE.replace("peak = 628.3185307179587", "peak = \"big\""),
            &REFERENCE.replace("[grid]", "[grid]\nbogus = 1"),
            &REFERENCE.replace("fwhm = 1.0", ""),
        ] {
            let e = ExperimentConfig::parse(bad).unwrap_err();
            assert!(!e.message.is_empty());
        }
    }

    #[test]
    fn sweep_axis_values() {
        let a = SweepAxis {
            parameter: SweepParameter::Peak,
            start: 1.0,
            stop: 2.0,
            points: 5,
        };
        assert_eq!(a.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(SweepAxis { points: 1, ..a }.values(), vec![1.0]);
    }
}
