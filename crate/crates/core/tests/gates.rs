use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stirap_gates::gates::{run_gate, run_hadamard, run_phase_gate, GateSpec};
use stirap_gates::geomphase::{berry_phase_closed_form, berry_phase_numeric};
use stirap_gates::pulses::{PhaseRamp, StirapSchedule};
use stirap_gates::qcore::{unitarity_deviation, wrap_phase, C64};

const PEAK: f64 = 200.0 * PI;

fn schedule() -> StirapSchedule {
    StirapSchedule::new(1.0, 1.0, 5.0, 0.0).unwrap()
}

fn identity_distance(m: &DMatrix<C64>) -> f64 {
    let mut m = m.clone();
    // global phase from the (0,0) entry
    let g = m[(0, 0)] / m[(0, 0)].norm();
    m /= g;
    (m - DMatrix::<C64>::identity(2, 2)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn phase_gates_compose_additively() {
    let a = run_phase_gate(&GateSpec::phase(0.7, schedule(), PEAK).unwrap()).unwrap();
    let b = run_phase_gate(&GateSpec::phase(1.1, schedule(), PEAK).unwrap()).unwrap();
    let ab = run_phase_gate(&GateSpec::phase(1.8, schedule(), PEAK).unwrap()).unwrap();
    let product = &b.reconstructed * &a.reconstructed;
    let got = wrap_phase(product[(1, 1)].arg() - product[(0, 0)].arg());
    assert_abs_diff_eq!(got, wrap_phase(ab.achieved_phase), epsilon = 1e-3);
    assert_abs_diff_eq!(got, 1.8, epsilon = 1e-3);
}

#[test]
fn s_gate_squared_is_z_and_pi_gate_squared_is_identity() {
    let pi = run_phase_gate(&GateSpec::phase(PI, schedule(), PEAK).unwrap()).unwrap();
    let sq = &pi.reconstructed * &pi.reconstructed;
    assert!(identity_distance(&sq) < 2e-3);

    let s = run_phase_gate(&GateSpec::phase(PI / 2.0, schedule(), PEAK).unwrap()).unwrap();
    let z = &s.reconstructed * &s.reconstructed;
    assert_abs_diff_eq!(wrap_phase(z[(1, 1)].arg() - z[(0, 0)].arg()).abs(), PI, epsilon = 2e-3);
}

#[test]
fn hadamard_is_an_involution() {
    let h = run_hadamard(&GateSpec::hadamard(schedule(), PEAK).unwrap()).unwrap();
    assert!(unitarity_deviation(&h.reconstructed) < 1e-3);
    let hh = &h.reconstructed * &h.reconstructed;
    assert!(identity_distance(&hh) < 2e-3, "{hh}");
}

#[test]
fn excited_population_stays_small_for_every_gate() {
    let specs = [
        GateSpec::phase(-1.3, schedule(), PEAK).unwrap(),
        GateSpec::hadamard(schedule(), PEAK).unwrap(),
        GateSpec::controlled_phase_for(-PI / 2.0, 0.1, 1.0, 1.0, 5.0, 0.0, PEAK).unwrap(),
    ];
    for spec in &specs {
        let r = run_gate(spec).unwrap();
        assert!(r.max_excited_population <= 1e-3, "{}: {}", spec.kind.name(), r.max_excited_population);
        assert!(r.norm_drift <= 1e-6);
        assert!(!r.low_confidence);
    }
}

#[test]
fn controlled_phase_reaches_target() {
    let spec = GateSpec::controlled_phase_for(-PI / 2.0, 0.1, 1.0, 1.0, 5.0, 0.0, PEAK).unwrap();
    assert!(spec.schedule.inter_delay >= 5.0);
    let r = run_gate(&spec).unwrap();
    assert!(r.fidelity >= 0.995, "{}", r.fidelity);
    assert_abs_diff_eq!(wrap_phase(r.achieved_phase + PI / 2.0), 0.0, epsilon = 5e-3);
}

#[test]
fn random_phase_gates_track_the_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let phi1: f64 = rng.random_range(-3.0..3.0);
        let spec = GateSpec::phase(phi1, schedule(), PEAK).unwrap();
        let r = run_phase_gate(&spec).unwrap();
        let expected = berry_phase_closed_form(&spec.ramp, spec.schedule.t_a(), spec.schedule.inter_delay);
        assert_abs_diff_eq!(wrap_phase(r.achieved_phase - phi1), 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(wrap_phase(expected - phi1), 0.0, epsilon = 1e-12);
        assert!(r.fidelity > 0.9999);
    }
}

#[test]
fn berry_phase_rejects_non_monotonic_ramp() {
    struct Wobble;
    impl stirap_gates::pulses::PhaseProfile for Wobble {
        fn value(&self, t: f64) -> f64 {
            t.sin()
        }
        fn rate(&self, t: f64) -> f64 {
            t.cos()
        }
    }
    assert!(berry_phase_numeric(&schedule(), &Wobble, 0.005).is_err());
    assert!(berry_phase_numeric(&schedule(), &PhaseRamp::linear(0.0, 2.0), 0.005).is_ok());
}
