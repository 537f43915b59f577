//! Hamiltonian builders for the lambda, tripod and two-atom tripod systems,
//! and the analytic dark/dressed states used as oracles.
//!
//! Every lower level `l` couples to `e` through H[l][e] = Ω_l/2 and
//! H[e][l] = Ω_l*/2, in angular-frequency units. The detuning Δ sits on the
//! excited level, so two-photon resonance is built in.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::propagator::Hamiltonian;
use crate::pulses::DriveField;
use crate::qcore::{eig_hermitian, Basis, HermitianOperator, StateVector, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Three-level lambda system in the basis `j, e, 2`.
#[derive(Clone, Debug)]
pub struct LambdaSystem {
    /// |j⟩ ↔ |e⟩.
    pub pump: DriveField,
    /// |2⟩ ↔ |e⟩.
    pub stokes: DriveField,
    pub detuning: f64,
}

impl LambdaSystem {
    pub fn hamiltonian(&self, t: f64) -> HermitianOperator {
        self.at(t)
    }
}

impl Hamiltonian for LambdaSystem {
    fn basis(&self) -> Basis {
        Basis::lambda()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        out.fill(ZERO);
        let oj = self.pump.rabi(t) * 0.5;
        let o2 = self.stokes.rabi(t) * 0.5;
        out[(0, 1)] = oj;
        out[(1, 0)] = oj.conj();
        out[(1, 1)] = c(self.detuning);
        out[(2, 1)] = o2;
        out[(1, 2)] = o2.conj();
    }
}

/// |D⟩ = cosθ|j⟩ − sinθ·e^{iφ}|2⟩ in the lambda basis.
pub fn dark_state(theta: f64, phi: f64) -> StateVector {
    let amps = DVector::from_vec(vec![
        c(theta.cos()),
        ZERO,
        -C64::from_polar(theta.sin(), phi),
    ]);
    StateVector::normalized(amps, Basis::lambda()).expect("dark state has unit norm")
}

/// Four-level tripod in the basis `0, 1, 2, e`.
#[derive(Clone, Debug)]
pub struct TripodSystem {
    /// Fields on |0⟩↔|e⟩, |1⟩↔|e⟩ and |2⟩↔|e⟩.
    pub drives: [DriveField; 3],
    pub detuning: f64,
}

impl TripodSystem {
    pub fn hamiltonian(&self, t: f64) -> HermitianOperator {
        self.at(t)
    }

    fn local(&self, t: f64) -> [[C64; 4]; 4] {
        let mut h = [[ZERO; 4]; 4];
        for (l, d) in self.drives.iter().enumerate() {
            let o = d.rabi(t) * 0.5;
            h[l][3] = o;
            h[3][l] = o.conj();
        }
        h[3][3] = c(self.detuning);
        h
    }
}

impl Hamiltonian for TripodSystem {
    fn basis(&self) -> Basis {
        Basis::tripod()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        let h = self.local(t);
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] = h[i][j];
            }
        }
    }
}

/// Index of |22⟩ in the two-atom basis.
pub const IDX_22: usize = 4 * 2 + 2;

/// Two tripod atoms with the level shift E|22⟩⟨22|.
#[derive(Clone, Debug)]
pub struct TwoAtomTripod {
    pub atom_a: TripodSystem,
    pub atom_b: TripodSystem,
    pub coupling: f64,
}

impl TwoAtomTripod {
    pub fn hamiltonian(&self, t: f64) -> HermitianOperator {
        self.at(t)
    }

    fn fill_drive(&self, t: f64, out: &mut DMatrix<C64>) {
        out.fill(ZERO);
        let ha = self.atom_a.local(t);
        let hb = self.atom_b.local(t);
        for a in 0..4 {
            for b in 0..4 {
                let row = 4 * a + b;
                for k in 0..4 {
                    if ha[a][k] != ZERO {
                        out[(row, 4 * k + b)] += ha[a][k];
                    }
                    if hb[b][k] != ZERO {
                        out[(row, 4 * a + k)] += hb[b][k];
                    }
                }
            }
        }
    }

    /// The drive part H − E|22⟩⟨22| in the interaction picture with respect
    /// to H₀ = E|22⟩⟨22|, i.e. e^{iH₀t}(H − H₀)e^{−iH₀t}.
    pub fn interaction_drive(&self, t: f64) -> HermitianOperator {
        let mut m = DMatrix::zeros(16, 16);
        self.fill_drive(t, &mut m);
        let ph = C64::from_polar(1.0, self.coupling * t);
        for k in 0..16 {
            if k != IDX_22 {
                m[(IDX_22, k)] *= ph;
                m[(k, IDX_22)] *= ph.conj();
            }
        }
        HermitianOperator::new(m).expect("phase conjugation keeps Hermiticity")
    }
}

impl Hamiltonian for TwoAtomTripod {
    fn basis(&self) -> Basis {
        Basis::two_atom()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        self.fill_drive(t, out);
        out[(IDX_22, IDX_22)] += c(self.coupling);
    }
}

/// Angles describing a dressed basis. Only the ones meaningful for the
/// constructor that produced it are set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DressedAngles {
    pub theta01: Option<f64>,
    pub phi01: Option<f64>,
    pub delta: Option<f64>,
    pub theta2: Option<f64>,
}

/// Orthonormal set of instantaneous eigenstates (or, for the two-atom
/// system, interaction-picture dark states) with their H/ħ eigenvalues.
#[derive(Clone, Debug)]
pub struct DressedBasis {
    pub labels: Vec<String>,
    pub states: Vec<StateVector>,
    pub energies: Vec<f64>,
    pub angles: DressedAngles,
    /// The lower-level bright combination sinθ₀₁|0⟩ + cosθ₀₁e^{iφ₀₁}|1⟩,
    /// tripod only. Not an eigenstate.
    pub bright: Option<StateVector>,
    /// (ω₊, ω₋) = Δ ± √(Δ² + Ω₀² + Ω₁²). These are twice the H/ħ
    /// eigenvalues because of the ħ/2 prefactor of the tripod Hamiltonian.
    pub bright_frequencies: Option<(f64, f64)>,
}

impl DressedBasis {
    pub fn state(&self, label: &str) -> Option<&StateVector> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| &self.states[k])
    }

    /// max |⟨a|b⟩ − δ_ab| over the set.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.states.iter().enumerate() {
            for (j, b) in self.states.iter().enumerate() {
                let id = if i == j { 1.0 } else { 0.0 };
                let g = a.inner(b).expect("same basis");
                worst = worst.max((g - c(id)).norm());
            }
        }
        worst
    }
}

/// Dressed states of the tripod with Ω₀, Ω₁ applied in a fixed ratio and
/// Ω₂ off. |D_H⟩ and the bright combination are analytic; |±⟩ come from the
/// numerical eigensolver.
pub fn tripod_dressed_states(
    theta01: f64,
    phi01: f64,
    detuning: f64,
    omega0: f64,
    omega1: f64,
) -> Result<DressedBasis> {
    let (w0, w1) = (omega0.abs(), omega1.abs());
    if w0 == 0.0 && w1 == 0.0 {
        return Err(Error::InvalidParameter {
            name: "omega0/omega1",
            reason: "both Rabi frequencies are zero".into(),
        });
    }
    let implied = w0.atan2(w1);
    if (implied - theta01).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "theta01",
            reason: format!("tan θ₀₁ must equal |Ω₀|/|Ω₁| (θ₀₁ = {implied} implied, {theta01} given)"),
        });
    }
    let basis = Basis::tripod();
    let mut h = DMatrix::zeros(4, 4);
    let o0 = c(w0 * 0.5);
    let o1 = C64::from_polar(w1 * 0.5, phi01);
    h[(0, 3)] = o0;
    h[(3, 0)] = o0.conj();
    h[(1, 3)] = o1;
    h[(3, 1)] = o1.conj();
    h[(3, 3)] = c(detuning);
    let eig = eig_hermitian(&HermitianOperator::new(h)?)?;

    let (s, co) = theta01.sin_cos();
    let dark = StateVector::from_labels(
        &basis,
        &[("0", c(co)), ("1", -C64::from_polar(s, phi01))],
    )?;
    let bright = StateVector::from_labels(&basis, &[("0", c(s)), ("1", C64::from_polar(co, phi01))])?;
    // the two nonzero eigenvalues sit at the ends of the ascending spectrum
    let plus = StateVector::normalized(eig.eigenvector(3), basis.clone())?;
    let minus = StateVector::normalized(eig.eigenvector(0), basis)?;
    let (lp, lm) = (eig.eigenvalues[3], eig.eigenvalues[0]);
    let (wp, wm) = (2.0 * lp, 2.0 * lm);
    let delta = if wp > 0.0 && wm <= 0.0 {
        Some((-wm / wp).sqrt().atan())
    } else {
        None
    };
    Ok(DressedBasis {
        labels: vec!["D_H".into(), "+".into(), "-".into()],
        states: vec![dark, plus, minus],
        energies: vec![0.0, lp, lm],
        angles: DressedAngles {
            theta01: Some(theta01),
            phi01: Some(phi01),
            delta,
            theta2: None,
        },
        bright: Some(bright),
        bright_frequencies: Some((wp, wm)),
    })
}

/// The six interaction-picture dark states of the two-atom tripod driven on
/// |1⟩↔|e⟩ and |2⟩↔|e⟩, with tanθ₂ = Ω₁/Ω₂. The |22⟩ components carry
/// e^{iEt}.
pub fn two_atom_dark_states(theta2: f64, coupling: f64, t: f64) -> DressedBasis {
    let basis = Basis::two_atom();
    let (s, co) = theta2.sin_cos();
    let ph = C64::from_polar(1.0, coupling * t);
    let r = FRAC_1_SQRT_2;
    let build = |terms: &[(&str, C64)]| {
        StateVector::from_labels(&basis, terms).expect("dark states are normalized")
    };
    let d1 = build(&[("00", c(1.0))]);
    let d2 = build(&[("10", c(-co)), ("20", c(s))]);
    let d3 = build(&[("01", c(-co)), ("02", c(s))]);
    let d4 = build(&[
        ("1e", c(r * s)),
        ("e1", c(-r * s)),
        ("2e", c(r * co)),
        ("e2", c(-r * co)),
    ]);
    let d5 = build(&[
        ("11", c(co * co)),
        ("12", c(-s * co)),
        ("21", c(-s * co)),
        ("22", ph * (s * s)),
    ]);
    let d6 = build(&[
        ("11", c(-r * s * s)),
        ("12", c(-r * s * co)),
        ("21", c(-r * s * co)),
        ("ee", c(r)),
        ("22", ph * (-r * co * co)),
    ]);
    DressedBasis {
        labels: (1..=6).map(|k| format!("D{k}")).collect(),
        states: vec![d1, d2, d3, d4, d5, d6],
        energies: vec![0.0; 6],
        angles: DressedAngles {
            theta2: Some(theta2),
            ..Default::default()
        },
        bright: None,
        bright_frequencies: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{PhaseProfile, PhaseRamp, PulseEnvelope, StirapSchedule};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn const_field(lower: &str, amp: f64, phase: f64) -> DriveField {
        // a long flat-topped stand-in: one very wide pulse sampled at its peak
        let env = PulseEnvelope::sin_squared(amp, -1e6, 1e6).unwrap();
        DriveField::new(lower, vec![env], PhaseRamp::constant(phase))
    }

    fn lambda_const(oj: f64, o2: f64, detuning: f64) -> LambdaSystem {
        LambdaSystem {
            pump: const_field("j", oj, 0.0),
            stokes: const_field("2", o2, 0.0),
            detuning,
        }
    }

    #[test]
    fn lambda_examples() {
        let off = LambdaSystem {
            pump: DriveField::off("j"),
            stokes: DriveField::off("2"),
            detuning: 0.0,
        };
        assert_eq!(off.hamiltonian(0.3).matrix().camax(), 0.0_f64);
        let h = lambda_const(2.0, 0.0, 0.0).hamiltonian(0.0);
        let m = h.matrix();
        assert_abs_diff_eq!(m[(0, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(1, 0)].re, 1.0, epsilon = 1e-12);
        let others: f64 = m.iter().map(|z| z.norm()).sum::<f64>() - m[(0, 1)].norm() - m[(1, 0)].norm();
        assert_abs_diff_eq!(others, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_eigenvalues_match_closed_form() {
        // Ω_j = Ω₂ = Ω, Δ = 0: H/ħ eigenvalues are ω±/2 = ±√2·Ω/2 and 0
        let omega = 3.0;
        let eig = eig_hermitian(&lambda_const(omega, omega, 0.0).hamiltonian(0.0)).unwrap();
        let w = (2.0_f64).sqrt() * omega;
        assert_abs_diff_eq!(eig.eigenvalues[0], -w / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[2], w / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lambda_eigenvalues_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let oj: f64 = rng.random_range(0.0..50.0);
            let o2: f64 = rng.random_range(0.0..50.0);
            let d: f64 = rng.random_range(-20.0..20.0);
            let eig = eig_hermitian(&lambda_const(oj, o2, d).hamiltonian(0.0)).unwrap();
            let root = (d * d + oj * oj + o2 * o2).sqrt();
            let mut expect = [0.0, (d + root) / 2.0, (d - root) / 2.0];
            expect.sort_by(f64::total_cmp);
            let scale = root.max(1.0);
            for (got, want) in eig.eigenvalues.iter().zip(expect) {
                assert!((got - want).abs() <= 1e-10 * scale, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_eigenvector_when_stokes_off() {
        let eig = eig_hermitian(&lambda_const(1.0, 0.0, 0.0).hamiltonian(0.0)).unwrap();
        let k = eig
            .eigenvalues
            .iter()
            .position(|l| l.abs() < 1e-12)
            .unwrap();
        let v = eig.eigenvector(k);
        let d = dark_state(PI / 2.0, 0.0);
        assert_abs_diff_eq!(v.dotc(d.amplitudes()).norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2].norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dark_state_examples() {
        let d = dark_state(0.0, 1.3);
        assert_eq!(d.amplitude("j").unwrap(), c(1.0));
        let d = dark_state(PI / 2.0, 0.0);
        assert_abs_diff_eq!(d.amplitude("2").unwrap().re, -1.0, epsilon = 1e-15);
        let d = dark_state(PI / 4.0, PI / 2.0);
        let r = FRAC_1_SQRT_2;
        assert_abs_diff_eq!((d.amplitude("j").unwrap() - c(r)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (d.amplitude("2").unwrap() - C64::new(0.0, -r)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn dark_state_annihilated_along_reference_schedule() {
        let s = StirapSchedule::new(1.0, 1.0, 5.0, 0.0).unwrap();
        let peak = 200.0 * PI;
        let ramp = PhaseRamp::linear(0.0, 1.0);
        let sys = LambdaSystem {
            pump: DriveField::new("j", s.pump_envelopes(peak).unwrap(), PhaseRamp::default()),
            stokes: DriveField::new("2", s.stokes_envelopes(peak).unwrap(), ramp),
            detuning: 0.0,
        };
        for k in 0..=8000 {
            let t = k as f64 * 1e-3;
            let h = sys.hamiltonian(t);
            let m = s.mixing(t);
            let d = dark_state(m.theta(), ramp.value(t));
            let resid = h.apply(&d).unwrap().norm();
            assert!(resid <= 1e-10 * h.norm().max(1e-300) || h.norm() == 0.0, "t={t} resid={resid}");
        }
    }

    #[test]
    fn tripod_topology() {
        let sys = TripodSystem {
            drives: [
                const_field("0", 1.0, 0.2),
                const_field("1", 2.0, -0.7),
                const_field("2", 3.0, 1.1),
            ],
            detuning: 0.5,
        };
        let m = sys.hamiltonian(0.0).into_matrix();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m[(i, j)], ZERO);
            }
        }
        assert_abs_diff_eq!((m[(1, 3)] - C64::from_polar(1.0, -0.7)).norm(), 0.0, epsilon = 1e-12);
        assert_eq!(m[(3, 3)], c(0.5));
    }

    #[test]
    fn tripod_dressed_examples() {
        let b = tripod_dressed_states(0.0, 0.4, 0.0, 0.0, 1.0).unwrap();
        let dh = b.state("D_H").unwrap();
        assert_abs_diff_eq!(dh.amplitude("0").unwrap().re, 1.0, epsilon = 1e-15);
        let bright = b.bright.as_ref().unwrap();
        assert_abs_diff_eq!(
            (bright.amplitude("1").unwrap() - C64::from_polar(1.0, 0.4)).norm(),
            0.0,
            epsilon = 1e-15
        );

        let t = PI / 8.0;
        let w1 = 1.0;
        let w0 = (2.0_f64.sqrt() - 1.0) * w1;
        let b = tripod_dressed_states(t, PI, 0.0, w0, w1).unwrap();
        let dh = b.state("D_H").unwrap();
        assert_abs_diff_eq!((dh.amplitude("0").unwrap() - c(t.cos())).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((dh.amplitude("1").unwrap() - c(t.sin())).norm(), 0.0, epsilon = 1e-12);

        let b = tripod_dressed_states(PI / 4.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let (wp, wm) = b.bright_frequencies.unwrap();
        assert_abs_diff_eq!(wp, 2.0_f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(wm, -(2.0_f64.sqrt()), epsilon = 1e-10);
        assert!(b.gram_deviation() < 1e-10);

        assert!(tripod_dressed_states(0.3, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(tripod_dressed_states(0.3, 0.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tripod_dressed_states_are_eigenstates_and_delta_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let w0: f64 = rng.random_range(0.1..5.0);
            let w1: f64 = rng.random_range(0.1..5.0);
            let phi: f64 = rng.random_range(-PI..PI);
            let d: f64 = rng.random_range(0.0..4.0);
            let theta = w0.atan2(w1);
            let b = tripod_dressed_states(theta, phi, d, w0, w1).unwrap();
            assert!(b.gram_deviation() < 1e-10);
            let root = (d * d + w0 * w0 + w1 * w1).sqrt();
            let (wp, wm) = b.bright_frequencies.unwrap();
            assert!((wp - (d + root)).abs() < 1e-10 * root);
            assert!((wm - (d - root)).abs() < 1e-10 * root);
            // rebuild H and check every dressed state is an eigenvector
            let sys = TripodSystem {
                drives: [
                    const_field("0", w0, 0.0),
                    const_field("1", w1, phi),
                    DriveField::off("2"),
                ],
                detuning: d,
            };
            let h = sys.hamiltonian(0.0);
            for (state, e) in b.states.iter().zip(&b.energies) {
                let hv = h.apply(state).unwrap();
                let resid = (hv - state.amplitudes().map(|z| z * *e)).norm();
                assert!(resid < 1e-10 * h.norm());
            }
            // |+⟩ = sinδ|B⟩ + cosδ|e⟩ up to phase
            let plus = b.state("+").unwrap();
            let bright = b.bright.as_ref().unwrap();
            let along_b = bright.inner(plus).unwrap().norm();
            let along_e = plus.amplitude("e").unwrap().norm();
            let delta = b.angles.delta.unwrap();
            assert!((along_b.atan2(along_e) - delta).abs() < 1e-9);
        }
    }

    fn kron4(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
        a.kronecker(&DMatrix::<C64>::identity(4, 4)) + DMatrix::<C64>::identity(4, 4).kronecker(b)
    }

    fn driven_tripod(o1: f64, o2: f64, phases: [f64; 3]) -> TripodSystem {
        TripodSystem {
            drives: [
                const_field("0", 0.7, phases[0]),
                const_field("1", o1, phases[1]),
                const_field("2", o2, phases[2]),
            ],
            detuning: 0.3,
        }
    }

    #[test]
    fn two_atom_examples() {
        let off = TripodSystem {
            drives: [DriveField::off("0"), DriveField::off("1"), DriveField::off("2")],
            detuning: 0.0,
        };
        let sys = TwoAtomTripod {
            atom_a: off.clone(),
            atom_b: off,
            coupling: 2.5,
        };
        let m = sys.hamiltonian(1.0).into_matrix();
        assert_eq!(m[(IDX_22, IDX_22)], c(2.5));
        assert_eq!(m.iter().filter(|z| **z != ZERO).count(), 1);

        let a = driven_tripod(1.3, 0.4, [0.1, 0.2, 0.3]);
        let b = driven_tripod(0.5, 2.2, [-0.4, 1.0, 0.0]);
        let sys = TwoAtomTripod {
            atom_a: a.clone(),
            atom_b: b.clone(),
            coupling: 0.0,
        };
        let expect = kron4(a.hamiltonian(0.0).matrix(), b.hamiltonian(0.0).matrix());
        assert!((sys.hamiltonian(0.0).into_matrix() - expect).camax() < 1e-14);
    }

    fn real_pair(o1: f64, o2: f64, coupling: f64) -> TwoAtomTripod {
        let atom = TripodSystem {
            drives: [DriveField::off("0"), const_field("1", o1, 0.0), const_field("2", o2, 0.0)],
            detuning: 0.0,
        };
        TwoAtomTripod {
            atom_a: atom.clone(),
            atom_b: atom,
            coupling,
        }
    }

    #[test]
    fn two_atom_dark_states_examples() {
        let b = two_atom_dark_states(0.0, 1.7, 3.3);
        assert_abs_diff_eq!(b.state("D5").unwrap().population("11").unwrap(), 1.0, epsilon = 1e-15);
        let b = two_atom_dark_states(PI / 2.0, 1.7, 0.0);
        assert_abs_diff_eq!(b.state("D5").unwrap().amplitude("22").unwrap().re, 1.0, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let th: f64 = rng.random_range(-PI..PI);
            let e: f64 = rng.random_range(-5.0..5.0);
            let t: f64 = rng.random_range(-10.0..10.0);
            assert!(two_atom_dark_states(th, e, t).gram_deviation() < 1e-12);
        }
    }

    #[test]
    fn two_atom_dark_states_are_annihilated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let o1: f64 = rng.random_range(0.0..10.0);
            let o2: f64 = rng.random_range(0.01..10.0);
            let e: f64 = rng.random_range(-3.0..3.0);
            let t: f64 = rng.random_range(-5.0..5.0);
            let sys = real_pair(o1, o2, e);
            let theta2 = o1.atan2(o2);
            let h = sys.interaction_drive(t);
            let norm = h.norm();
            for d in two_atom_dark_states(theta2, e, t).states {
                let resid = h.apply(&d).unwrap().norm();
                assert!(resid <= 1e-10 * norm, "resid {resid}");
            }
            // at t = 0 the interaction picture coincides with H − H₀
            let mut hm = sys.hamiltonian(0.0).into_matrix();
            hm[(IDX_22, IDX_22)] -= c(e);
            for d in two_atom_dark_states(theta2, e, 0.0).states {
                assert!((&hm * d.amplitudes()).norm() <= 1e-10 * norm);
            }
        }
    }

    #[test]
    fn null_space_is_six_dimensional() {
        let s = StirapSchedule::new(1.0, 1.0, 5.0, 0.0).unwrap();
        let peak = 200.0 * PI;
        let atom = TripodSystem {
            drives: [
                DriveField::off("0"),
                DriveField::new("1", s.pump_envelopes(peak).unwrap(), PhaseRamp::default()),
                DriveField::new("2", s.stokes_envelopes(peak).unwrap(), PhaseRamp::default()),
            ],
            detuning: 0.0,
        };
        let sys = TwoAtomTripod {
            atom_a: atom.clone(),
            atom_b: atom,
            coupling: 0.4,
        };
        for k in 1..80 {
            let t = k as f64 * 0.1;
            let h = sys.interaction_drive(t);
            if h.norm() == 0.0 {
                continue;
            }
            let eig = eig_hermitian(&h).unwrap();
            let zeros = eig
                .eigenvalues
                .iter()
                .filter(|l| l.abs() <= 1e-9 * h.norm())
                .count();
            assert_eq!(zeros, 6, "t = {t}");
        }
    }
}
