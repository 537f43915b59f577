//! Pulse envelopes, the four-pulse STIRAP timing, mixing angles and laser
//! phase ramps.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeShape {
    /// Ω_max·sin²(π(t − t_on)/2τ) on (t_on, t_on + 2τ), zero elsewhere.
    SinSquared,
    Off,
}

/// A single pulse. `fwhm` is τ; the support is `[onset, onset + 2τ]` and the
/// peak `Ω_max` is reached at `onset + τ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEnvelope {
    pub shape: EnvelopeShape,
    pub peak: f64,
    pub onset: f64,
    pub fwhm: f64,
}

impl PulseEnvelope {
    pub fn sin_squared(peak: f64, onset: f64, fwhm: f64) -> Result<Self> {
        if !(peak >= 0.0 && peak.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "peak",
                reason: format!("must be finite and >= 0, got {peak}"),
            });
        }
        if !(fwhm > 0.0 && fwhm.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "fwhm",
                reason: format!("must be finite and > 0, got {fwhm}"),
            });
        }
        Ok(PulseEnvelope {
            shape: EnvelopeShape::SinSquared,
            peak,
            onset,
            fwhm,
        })
    }

    pub fn off() -> Self {
        PulseEnvelope {
            shape: EnvelopeShape::Off,
            peak: 0.0,
            onset: 0.0,
            fwhm: 1.0,
        }
    }

    pub fn end(&self) -> f64 {
        self.onset + 2.0 * self.fwhm
    }

    /// Envelope value in rad/T₀.
    pub fn value(&self, t: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Off => 0.0,
            EnvelopeShape::SinSquared => {
                let s = t - self.onset;
                if s > 0.0 && s < 2.0 * self.fwhm {
                    let x = (PI * s / (2.0 * self.fwhm)).sin();
                    self.peak * x * x
                } else {
                    0.0
                }
            }
        }
    }

    /// The same pulse moved by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        PulseEnvelope {
            onset: self.onset + dt,
            ..*self
        }
    }
}

/// A laser phase as a function of time.
pub trait PhaseProfile {
    fn value(&self, t: f64) -> f64;
    /// dφ/dt.
    fn rate(&self, t: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RampKind {
    Constant,
    Linear,
}

/// φ(t) = φ₀ + slope·t.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct PhaseRamp {
    pub offset: f64,
    pub slope: f64,
}

impl PhaseRamp {
    pub fn constant(offset: f64) -> Self {
        PhaseRamp { offset, slope: 0.0 }
    }

    pub fn linear(offset: f64, slope: f64) -> Self {
        PhaseRamp { offset, slope }
    }

    pub fn kind(&self) -> RampKind {
        if self.slope == 0.0 {
            RampKind::Constant
        } else {
            RampKind::Linear
        }
    }
}

impl PhaseProfile for PhaseRamp {
    fn value(&self, t: f64) -> f64 {
        self.offset + self.slope * t
    }

    fn rate(&self, _t: f64) -> f64 {
        self.slope
    }
}

/// sin²θ for a pair of field amplitudes, flagged when both are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingAngle {
    pub sin_sq: f64,
    pub idle: bool,
}

impl MixingAngle {
    pub fn theta(&self) -> f64 {
        self.sin_sq.clamp(0.0, 1.0).sqrt().asin()
    }
}

/// sin²θ = Ω_a²/(Ω_a² + Ω_b²). When both fields vanish the result is 0 with
/// the `idle` flag set; schedule-aware callers use
/// [`StirapSchedule::mixing`] which extends by continuity instead.
pub fn mixing_angle(omega_a: f64, omega_b: f64) -> MixingAngle {
    let a2 = omega_a * omega_a;
    let total = a2 + omega_b * omega_b;
    if total == 0.0 {
        MixingAngle {
            sin_sq: 0.0,
            idle: true,
        }
    } else {
        MixingAngle {
            sin_sq: a2 / total,
            idle: false,
        }
    }
}

/// Timing of the double STIRAP sequence: the Stokes field (|2⟩↔|e⟩) leads
/// the pump (|j⟩↔|e⟩) by `intra_delay` in the first sequence, and trails it
/// in the second, which starts `inter_delay` later.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapSchedule {
    pub fwhm: f64,
    pub intra_delay: f64,
    pub inter_delay: f64,
    pub start: f64,
}

/// Pulse onsets and the t_a / t_b markers of a schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirapTiming {
    pub pump_onsets: [f64; 2],
    pub stokes_onsets: [f64; 2],
    /// Onset of the first pump pulse; sin²θ = 0 before it.
    pub t_a: f64,
    /// End of the first Stokes pulse; sin²θ = 1 from here until `t_a + ΔT`.
    pub t_b: f64,
    pub end: f64,
}

impl StirapSchedule {
    pub fn new(fwhm: f64, intra_delay: f64, inter_delay: f64, start: f64) -> Result<Self> {
        let s = StirapSchedule {
            fwhm,
            intra_delay,
            inter_delay,
            start,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let StirapSchedule {
            fwhm: tau,
            intra_delay: dt,
            inter_delay: big_dt,
            start,
        } = *self;
        if ![tau, dt, big_dt, start].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite timing parameter".into()));
        }
        if tau <= 0.0 {
            return Err(Error::InvalidSchedule(format!("fwhm must be > 0, got {tau}")));
        }
        if dt <= 0.0 || dt >= 2.0 * tau {
            return Err(Error::InvalidSchedule(format!(
                "intra-pair delay must satisfy 0 < Δt < 2τ = {}, got {dt}",
                2.0 * tau
            )));
        }
        if big_dt <= 2.0 * tau + dt {
            return Err(Error::InvalidSchedule(format!(
                "sequences overlap: need ΔT > 2τ + Δt = {}, got {big_dt}",
                2.0 * tau + dt
            )));
        }
        Ok(())
    }

    pub fn timing(&self) -> StirapTiming {
        StirapTiming {
            pump_onsets: self.pump_onsets(),
            stokes_onsets: self.stokes_onsets(),
            t_a: self.t_a(),
            t_b: self.t_b(),
            end: self.end(),
        }
    }

    pub fn stokes_onsets(&self) -> [f64; 2] {
        [self.start, self.start + self.intra_delay + self.inter_delay]
    }

    pub fn pump_onsets(&self) -> [f64; 2] {
        [self.start + self.intra_delay, self.start + self.inter_delay]
    }

    pub fn t_a(&self) -> f64 {
        self.start + self.intra_delay
    }

    pub fn t_b(&self) -> f64 {
        self.start + 2.0 * self.fwhm
    }

    /// End of the last pulse.
    pub fn end(&self) -> f64 {
        self.start + self.intra_delay + self.inter_delay + 2.0 * self.fwhm
    }

    pub fn pump_envelopes(&self, peak: f64) -> Result<Vec<PulseEnvelope>> {
        self.pump_onsets()
            .iter()
            .map(|&t| PulseEnvelope::sin_squared(peak, t, self.fwhm))
            .collect()
    }

    pub fn stokes_envelopes(&self, peak: f64) -> Result<Vec<PulseEnvelope>> {
        self.stokes_onsets()
            .iter()
            .map(|&t| PulseEnvelope::sin_squared(peak, t, self.fwhm))
            .collect()
    }

    /// Every pulse onset and end, sorted. The pulse amplitudes are smooth
    /// between consecutive breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pump_onsets()
            .iter()
            .chain(self.stokes_onsets().iter())
            .flat_map(|&t| [t, t + 2.0 * self.fwhm])
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// sin²θ(t) for equal-amplitude pump and Stokes pulses. Where both fields
    /// vanish the value is extended by continuity: 0 before the first pump
    /// pulse and after the last Stokes onset, 1 in between.
    pub fn mixing(&self, t: f64) -> MixingAngle {
        let pump: f64 = self.pump_onsets().iter().map(|&on| unit(on, self.fwhm, t)).sum();
        let stokes: f64 = self
            .stokes_onsets()
            .iter()
            .map(|&on| unit(on, self.fwhm, t))
            .sum();
        let m = mixing_angle(pump, stokes);
        if !m.idle {
            return m;
        }
        let held = t >= self.t_a() && t <= self.stokes_onsets()[1];
        MixingAngle {
            sin_sq: if held { 1.0 } else { 0.0 },
            idle: true,
        }
    }
}

fn unit(onset: f64, fwhm: f64, t: f64) -> f64 {
    let s = t - onset;
    if s > 0.0 && s < 2.0 * fwhm {
        let x = (PI * s / (2.0 * fwhm)).sin();
        x * x
    } else {
        0.0
    }
}

/// Builds the four-pulse timing, validating the schedule.
pub fn build_schedule(fwhm: f64, intra_delay: f64, inter_delay: f64, start: f64) -> Result<StirapTiming> {
    Ok(StirapSchedule::new(fwhm, intra_delay, inter_delay, start)?.timing())
}

/// One laser's complex Rabi frequency Ω(t)·e^{iφ(t)} on the transition
/// between `lower` and the excited level.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveField {
    pub envelopes: Vec<PulseEnvelope>,
    pub phase: PhaseRamp,
    pub lower: String,
}

impl DriveField {
    pub fn new(lower: impl Into<String>, envelopes: Vec<PulseEnvelope>, phase: PhaseRamp) -> Self {
        DriveField {
            envelopes,
            phase,
            lower: lower.into(),
        }
    }

    pub fn off(lower: impl Into<String>) -> Self {
        DriveField::new(lower, Vec::new(), PhaseRamp::default())
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        self.envelopes.iter().map(|e| e.value(t)).sum()
    }

    pub fn rabi(&self, t: f64) -> C64 {
        let a = self.amplitude(t);
        if a == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            C64::from_polar(a, self.phase.value(t))
        }
    }

    pub fn is_off(&self) -> bool {
        self.envelopes
            .iter()
            .all(|e| e.shape == EnvelopeShape::Off || e.peak == 0.0)
    }
}
