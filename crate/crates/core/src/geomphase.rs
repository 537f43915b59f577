//! Geometric phases from connection integrals: the Berry phase of the lambda
//! dark state, its closed form for translated pulse pairs, and the
//! two-dimensional Wilczek–Zee reduction for the two-atom tripod.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::propagator::{converge, ConvergenceReport, Hamiltonian, TimeGrid};
use crate::pulses::{PhaseProfile, StirapSchedule};
use crate::qcore::{Basis, StateVector, C64};
use crate::systems::IDX_22;

/// A quadrature result with its Richardson error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEstimate {
    pub value: f64,
    pub error: f64,
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Composite Simpson over each interval between consecutive `breakpoints`
/// (sorted), with at most `step` between nodes. The value is the refined
/// sum S(h/2); the error estimate is |S(h/2) − S(h)|/15 summed over pieces.
pub fn integrate_piecewise(f: impl Fn(f64) -> f64, breakpoints: &[f64], step: f64) -> Result<PhaseEstimate> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "quad_step",
            reason: format!("must be > 0, got {step}"),
        });
    }
    if breakpoints.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter {
            name: "breakpoints",
            reason: "must be sorted".into(),
        });
    }
    let mut value = 0.0;
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a {
            continue;
        }
        let n = 2 * (((b - a) / (2.0 * step)).ceil() as usize).max(1);
        let coarse = simpson(&f, a, b, n);
        let fine = simpson(&f, a, b, 2 * n);
        value += fine;
        error += (fine - coarse).abs() / 15.0;
    }
    Ok(PhaseEstimate { value, error })
}

/// γ = −∫ sin²θ(t)·φ̇(t) dt over the schedule, by direct quadrature.
pub fn berry_phase_numeric(
    schedule: &StirapSchedule,
    ramp: &impl PhaseProfile,
    quad_step: f64,
) -> Result<PhaseEstimate> {
    schedule.validate()?;
    let pts = schedule.breakpoints();
    check_monotonic(ramp, &pts, quad_step)?;
    integrate_piecewise(|t| -schedule.mixing(t).sin_sq * ramp.rate(t), &pts, quad_step)
}

/// The Berry integral accumulated from the schedule start up to `t`.
pub fn berry_phase_until(
    schedule: &StirapSchedule,
    ramp: &impl PhaseProfile,
    t: f64,
    quad_step: f64,
) -> Result<PhaseEstimate> {
    schedule.validate()?;
    let all = schedule.breakpoints();
    check_monotonic(ramp, &all, quad_step)?;
    let mut pts: Vec<f64> = all.into_iter().filter(|&p| p < t).collect();
    if pts.is_empty() {
        return Ok(PhaseEstimate { value: 0.0, error: 0.0 });
    }
    pts.push(t.min(schedule.end()));
    integrate_piecewise(|s| -schedule.mixing(s).sin_sq * ramp.rate(s), &pts, quad_step)
}

fn check_monotonic(ramp: &impl PhaseProfile, pts: &[f64], step: f64) -> Result<()> {
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let n = ((b - a) / step).ceil().max(1.0) as usize;
    let (mut up, mut down) = (false, false);
    for k in 0..=n {
        let r = ramp.rate(a + (b - a) * k as f64 / n as f64);
        up |= r > 0.0;
        down |= r < 0.0;
    }
    if up && down {
        return Err(Error::NonMonotonicRamp);
    }
    Ok(())
}

/// φ(t_a) − φ(t_a + ΔT).
pub fn berry_phase_closed_form(ramp: &impl PhaseProfile, t_a: f64, inter_delay: f64) -> f64 {
    ramp.value(t_a) - ramp.value(t_a + inter_delay)
}

/// The nonzero elements ⟨D_c|Ḋ_b⟩ of the connection in the {D₅, D₆} block
/// for fixed θ₂. Signs follow the dark-state constructor
/// [`two_atom_dark_states`](crate::systems::two_atom_dark_states).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WzConnection {
    pub d55: C64,
    pub d56: C64,
    pub d65: C64,
    pub d66: C64,
}

pub fn wz_connection(theta2: f64, coupling: f64) -> WzConnection {
    let (s, c) = theta2.sin_cos();
    let (s2, c2) = (s * s, c * c);
    let off = C64::new(0.0, -FRAC_1_SQRT_2 * coupling * c2 * s2);
    WzConnection {
        d55: C64::new(0.0, coupling * s2 * s2),
        d56: off,
        d65: off,
        d66: C64::new(0.0, 0.5 * coupling * c2 * c2),
    }
}

/// Ḃ = −M·B on (B₅, B₆) as a Hermitian generator K = −iM.
struct WzGenerator<F> {
    theta2: F,
    coupling: f64,
}

impl<F: Fn(f64) -> f64 + Sync> Hamiltonian for WzGenerator<F> {
    fn basis(&self) -> Basis {
        Basis::new(["D5", "D6"])
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        let m = wz_connection((self.theta2)(t), self.coupling);
        let k = |z: C64| z * C64::new(0.0, -1.0);
        out[(0, 0)] = k(m.d55);
        out[(0, 1)] = k(m.d56);
        out[(1, 0)] = k(m.d65);
        out[(1, 1)] = k(m.d66);
    }
}

/// Sampled solution of the coefficient equations, starting in D₅.
#[derive(Clone, Debug)]
pub struct WzTrajectory {
    pub times: Vec<f64>,
    /// (B₁ … B₆); B₁ … B₄ stay zero.
    pub coefficients: Vec<[C64; 6]>,
    /// max over samples of |B₆|².
    pub leakage: f64,
    /// Unwrapped arg B₅ at the final time.
    pub terminal_phase: f64,
    pub norm_drift: f64,
    pub convergence: ConvergenceReport,
}

/// Integrates the coefficient equations from B = D₅ with the propagator's
/// RK4 ladder. Sample spacing must keep E·Δt below π for the phase unwrap.
pub fn wz_propagate<F>(theta2: F, coupling: f64, grid: &TimeGrid, tol: f64) -> Result<WzTrajectory>
where
    F: Fn(f64) -> f64 + Sync,
{
    let gen = WzGenerator { theta2, coupling };
    let psi0 = StateVector::basis_state(&gen.basis(), "D5")?;
    let (traj, convergence) = converge(&gen, &psi0, grid, tol)?;
    let coefficients = traj
        .states
        .iter()
        .map(|s| {
            let a = s.amplitudes();
            let z = C64::new(0.0, 0.0);
            [z, z, z, z, a[0], a[1]]
        })
        .collect::<Vec<_>>();
    let leakage = coefficients.iter().map(|b| b[5].norm_sqr()).fold(0.0, f64::max);
    let terminal_phase = traj
        .terminal_phase("D5")?
        .ok_or_else(|| Error::InvalidParameter {
            name: "coupling",
            reason: "D5 emptied; terminal phase undefined".into(),
        })?;
    Ok(WzTrajectory {
        times: traj.times,
        coefficients,
        leakage,
        terminal_phase,
        norm_drift: traj.norm_drift,
        convergence,
    })
}

/// γ₂ = −E∫sin⁴θ₂ dt over `breakpoints` (sorted; the integrand must be
/// smooth between them).
pub fn two_qubit_phase(
    theta2: impl Fn(f64) -> f64,
    coupling: f64,
    breakpoints: &[f64],
    quad_step: f64,
) -> Result<PhaseEstimate> {
    let est = integrate_piecewise(|t| theta2(t).sin().powi(4), breakpoints, quad_step)?;
    Ok(PhaseEstimate {
        value: -coupling * est.value,
        error: coupling.abs() * est.error,
    })
}

/// θ₂(t) of a double STIRAP schedule with equal pump and Stokes peaks.
pub fn schedule_theta2(schedule: &StirapSchedule) -> impl Fn(f64) -> f64 + Sync + '_ {
    move |t| schedule.mixing(t).theta()
}

/// γ₂ for a double STIRAP schedule driven identically on both atoms.
pub fn two_qubit_phase_for_schedule(
    schedule: &StirapSchedule,
    coupling: f64,
    quad_step: f64,
) -> Result<PhaseEstimate> {
    schedule.validate()?;
    two_qubit_phase(schedule_theta2(schedule), coupling, &schedule.breakpoints(), quad_step)
}

/// [`wz_propagate`] over a whole double STIRAP schedule, starting from a
/// step of τ/200.
pub fn wz_for_schedule(schedule: &StirapSchedule, coupling: f64, tol: f64) -> Result<WzTrajectory> {
    schedule.validate()?;
    let base = schedule.fwhm / 200.0;
    let stride = if coupling == 0.0 {
        1
    } else {
        // keep E·Δt_sample ≤ 0.5 on the starting grid
        ((0.5 / (coupling.abs() * base)).floor() as usize).clamp(1, 200)
    };
    let grid = TimeGrid::new(schedule.start, schedule.end(), base, stride)?;
    wz_propagate(schedule_theta2(schedule), coupling, &grid, tol)
}

/// Finds E with `leakage_at(E)` = `target` by a logarithmic scan of
/// `points` values over [e_lo, e_hi] followed by bisection on the first
/// bracketing pair.
pub fn calibrate_coupling(
    leakage_at: impl Fn(f64) -> Result<f64>,
    target: f64,
    e_lo: f64,
    e_hi: f64,
    points: usize,
) -> Result<f64> {
    if !(e_lo > 0.0 && e_hi > e_lo && points >= 2) {
        return Err(Error::InvalidParameter {
            name: "scan",
            reason: format!("need 0 < e_lo < e_hi and points >= 2, got [{e_lo}, {e_hi}] x {points}"),
        });
    }
    let ratio = (e_hi / e_lo).powf(1.0 / (points - 1) as f64);
    let mut lo = e_lo;
    let mut f_lo = leakage_at(lo)? - target;
    for k in 1..points {
        let hi = e_lo * ratio.powi(k as i32);
        let f_hi = leakage_at(hi)? - target;
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            for _ in 0..60 {
                let m = (a * b).sqrt();
                let fm = leakage_at(m)? - target;
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
                if (b - a) <= 1e-9 * b {
                    break;
                }
            }
            return Ok((a * b).sqrt());
        }
        lo = hi;
        f_lo = f_hi;
    }
    Err(Error::InvalidParameter {
        name: "scan",
        reason: format!("leakage never crosses {target} on [{e_lo}, {e_hi}]"),
    })
}

fn check_two_atom(psi: &StateVector) -> Result<()> {
    if psi.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: psi.dim(),
        });
    }
    Ok(())
}

/// ψ = e^{−iE|22⟩⟨22|t} ψ_I.
pub fn transform_interaction(psi_i: &StateVector, coupling: f64, t: f64) -> Result<StateVector> {
    check_two_atom(psi_i)?;
    let mut a = psi_i.amplitudes().clone();
    a[IDX_22] *= C64::from_polar(1.0, -coupling * t);
    StateVector::from_raw(a, psi_i.basis().clone())
}

/// ψ_I = e^{iE|22⟩⟨22|t} ψ.
pub fn inverse_transform_interaction(psi: &StateVector, coupling: f64, t: f64) -> Result<StateVector> {
    transform_interaction(psi, -coupling, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::PhaseRamp;
    use crate::systems::two_atom_dark_states;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn reference_schedule() -> StirapSchedule {
        StirapSchedule::new(1.0, 1.0, 5.0, 0.0).unwrap()
    }

    struct Wobble;

    impl PhaseProfile for Wobble {
        fn value(&self, t: f64) -> f64 {
            t.sin()
        }

        fn rate(&self, t: f64) -> f64 {
            t.cos()
        }
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let est = integrate_piecewise(|t| t * t * t - 2.0 * t, &[0.0, 1.0, 3.0], 0.5).unwrap();
        assert_abs_diff_eq!(est.value, 81.0 / 4.0 - 9.0, epsilon = 1e-12);
        assert!(est.error < 1e-12);
        let est = integrate_piecewise(|t: f64| t.exp(), &[0.0, 1.0], 0.1).unwrap();
        assert!((est.value - (1f64.exp() - 1.0)).abs() <= est.error * 2.0 + 1e-14);
    }

    #[test]
    fn berry_examples() {
        let s = reference_schedule();
        let zero = berry_phase_numeric(&s, &PhaseRamp::constant(0.3), 0.005).unwrap();
        assert_eq!(zero.value, 0.0);
        let g = berry_phase_numeric(&s, &PhaseRamp::linear(0.0, 1.0), 0.005).unwrap();
        assert_abs_diff_eq!(g.value, -5.0, epsilon = 1e-9);
        assert!(g.error < 1e-9);
        assert!(matches!(
            berry_phase_numeric(&s, &Wobble, 0.005),
            Err(Error::NonMonotonicRamp)
        ));
    }

    #[test]
    fn running_berry_phase() {
        let s = reference_schedule();
        let ramp = PhaseRamp::linear(0.0, 1.0);
        assert_eq!(berry_phase_until(&s, &ramp, -1.0, 0.01).unwrap().value, 0.0);
        let full = berry_phase_numeric(&s, &ramp, 0.01).unwrap().value;
        assert_abs_diff_eq!(berry_phase_until(&s, &ramp, 100.0, 0.01).unwrap().value, full, epsilon = 1e-12);
        // sin²θ = 1 while all fields are off, so γ falls at the ramp rate
        let a = berry_phase_until(&s, &ramp, 4.0, 0.01).unwrap().value;
        let b = berry_phase_until(&s, &ramp, 4.5, 0.01).unwrap().value;
        assert_abs_diff_eq!(b - a, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(berry_phase_closed_form(&PhaseRamp::linear(0.0, 1.0), 1.0, 5.0), -5.0);
        for t_a in [-3.0, 0.0, 2.5, 100.0] {
            assert_abs_diff_eq!(
                berry_phase_closed_form(&PhaseRamp::linear(0.7, -2.5), t_a, 4.0),
                10.0,
                epsilon = 1e-12
            );
        }
        assert_eq!(berry_phase_closed_form(&PhaseRamp::constant(2.0), 1.0, 5.0), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn numeric_berry_matches_closed_form(
            fwhm in 0.2f64..3.0,
            intra in 0.05f64..1.95,
            extra in 0.01f64..5.0,
            slope in -4.0f64..4.0,
            offset in -3.0f64..3.0,
            start in -5.0f64..5.0,
        ) {
            let intra_delay = intra * fwhm;
            let inter_delay = 2.0 * fwhm + intra_delay + extra;
            let s = StirapSchedule::new(fwhm, intra_delay, inter_delay, start).unwrap();
            let ramp = PhaseRamp::linear(offset, slope);
            let num = berry_phase_numeric(&s, &ramp, fwhm / 100.0).unwrap();
            let closed = berry_phase_closed_form(&ramp, s.t_a(), inter_delay);
            prop_assert!((num.value - closed).abs() <= 1e-6, "{} vs {}", num.value, closed);
        }

        #[test]
        fn berry_integrand_is_bounded(t in -2.0f64..15.0, slope in -5.0f64..5.0) {
            let s = reference_schedule();
            let v = s.mixing(t).sin_sq * slope;
            prop_assert!(v.abs() <= slope.abs());
        }
    }

    #[test]
    fn connection_limits() {
        let e = 2.7;
        let m = wz_connection(0.0, e);
        assert_eq!(m.d55, C64::new(0.0, 0.0));
        assert_abs_diff_eq!(m.d56.norm(), 0.0);
        assert_abs_diff_eq!(m.d66.im, e / 2.0);
        let m = wz_connection(FRAC_PI_2, e);
        assert_abs_diff_eq!(m.d55.im, e, epsilon = 1e-15);
        assert!(m.d56.norm() < 1e-15 && m.d66.norm() < 1e-15);
    }

    /// ⟨D_c(t)|(D_b(t+h) − D_b(t−h))/2h⟩ for all 36 pairs.
    fn fd_connection(theta: impl Fn(f64) -> f64, e: f64, t: f64, h: f64) -> [[C64; 6]; 6] {
        let d0 = two_atom_dark_states(theta(t), e, t);
        let dp = two_atom_dark_states(theta(t + h), e, t + h);
        let dm = two_atom_dark_states(theta(t - h), e, t - h);
        let mut out = [[C64::new(0.0, 0.0); 6]; 6];
        for c in 0..6 {
            for b in 0..6 {
                let diff = (dp.states[b].amplitudes() - dm.states[b].amplitudes()) / C64::new(2.0 * h, 0.0);
                out[c][b] = d0.states[c].amplitudes().dotc(&diff);
            }
        }
        out
    }

    fn fd_error(theta: impl Fn(f64) -> f64 + Copy, e: f64, t: f64, h: f64) -> f64 {
        let fd = fd_connection(theta, e, t, h);
        let m = wz_connection(theta(t), e);
        let mut expect = [[C64::new(0.0, 0.0); 6]; 6];
        expect[4][4] = m.d55;
        expect[4][5] = m.d56;
        expect[5][4] = m.d65;
        expect[5][5] = m.d66;
        let mut worst = 0.0_f64;
        for c in 0..6 {
            for b in 0..6 {
                worst = worst.max((fd[c][b] - expect[c][b]).norm());
            }
        }
        worst
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn connection_matches_finite_differences(
            theta in 0.0f64..FRAC_PI_2,
            e in 0.5f64..8.0,
            t in -3.0f64..3.0,
        ) {
            let h = 1e-2;
            let e1 = fd_error(|_| theta, e, t, h);
            let e2 = fd_error(|_| theta, e, t, h / 2.0);
            // the other 32 elements are included in the worst case
            prop_assert!(e1 <= e * e * e * h * h, "{e1}");
            prop_assert!(e2 < e1);
            let order = (e1 / e2).log2();
            prop_assert!((order - 2.0).abs() < 0.1, "observed order {order}");
        }
    }

    #[test]
    fn connection_ignores_theta_motion_in_d5_d6_block() {
        let e = 1.3;
        let theta = |t: f64| 0.4 + 0.8 * t;
        for t in [0.1, 0.3, 0.7] {
            let h = 1e-4;
            let fd = fd_connection(theta, e, t, h);
            let m = wz_connection(theta(t), e);
            for (got, want) in [
                (fd[4][4], m.d55),
                (fd[4][5], m.d56),
                (fd[5][4], m.d65),
                (fd[5][5], m.d66),
            ] {
                assert!((got - want).norm() < 1e-6, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn wz_constant_profiles() {
        let e = 1.7;
        let grid = TimeGrid::new(0.0, 3.0, 0.01, 1).unwrap();
        let w = wz_propagate(|_| FRAC_PI_2, e, &grid, 1e-10).unwrap();
        let b5 = w.coefficients.last().unwrap()[4];
        assert!((b5 - C64::from_polar(1.0, -e * 3.0)).norm() < 1e-9);
        assert!(w.leakage < 1e-20);
        assert_abs_diff_eq!(w.terminal_phase, -e * 3.0, epsilon = 1e-9);
        let w = wz_propagate(|_| 0.0, e, &grid, 1e-10).unwrap();
        assert!((w.coefficients.last().unwrap()[4] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(w.leakage < 1e-20);
    }

    #[test]
    fn wz_phase_matches_quadrature_when_adiabatic() {
        let s = reference_schedule();
        let e = 0.05;
        let w = wz_for_schedule(&s, e, 1e-10).unwrap();
        assert!(w.leakage <= 1e-4, "leakage {}", w.leakage);
        assert!(w.norm_drift <= 1e-10);
        let q = two_qubit_phase_for_schedule(&s, e, 0.005).unwrap();
        assert!((w.terminal_phase - q.value).abs() < 1e-3, "{} vs {}", w.terminal_phase, q.value);
    }

    #[test]
    fn wz_norm_is_conserved() {
        let s = reference_schedule();
        let w = wz_for_schedule(&s, 3.0, 1e-10).unwrap();
        for b in &w.coefficients {
            let n: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn leakage_drops_with_shorter_pulses() {
        let e = 1.0;
        let mut last = f64::INFINITY;
        for fwhm in [1.0, 0.5, 0.25] {
            let s = StirapSchedule::new(fwhm, fwhm, 5.0, 0.0).unwrap();
            let w = wz_for_schedule(&s, e, 1e-10).unwrap();
            assert!(w.leakage < last, "fwhm {fwhm}: {} !< {last}", w.leakage);
            last = w.leakage;
        }
    }

    #[test]
    fn two_qubit_phase_examples() {
        let s = reference_schedule();
        assert_eq!(two_qubit_phase_for_schedule(&s, 0.0, 0.01).unwrap().value, 0.0);
        let sq = two_qubit_phase(|_| FRAC_PI_2, 2.0, &[1.0, 4.0], 0.01).unwrap();
        assert_abs_diff_eq!(sq.value, -6.0, epsilon = 1e-12);
        // linear in ΔT: translating the second sequence shifts γ₂ by −E·δ
        let e = 0.8;
        let a = two_qubit_phase_for_schedule(&s, e, 0.005).unwrap().value;
        let s2 = StirapSchedule::new(1.0, 1.0, 6.5, 0.0).unwrap();
        let b = two_qubit_phase_for_schedule(&s2, e, 0.005).unwrap().value;
        assert_abs_diff_eq!(b - a, -e * 1.5, epsilon = 1e-9);
    }

    #[test]
    fn calibration_finds_crossing() {
        let e = calibrate_coupling(|e| Ok(e * e), 0.25, 0.01, 10.0, 12).unwrap();
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-8);
        assert!(calibrate_coupling(|_| Ok(0.0), 0.25, 0.01, 10.0, 12).is_err());
    }

    #[test]
    fn interaction_transform_examples() {
        let basis = Basis::two_atom();
        let psi = StateVector::from_labels(
            &basis,
            &[("11", C64::new(0.6, 0.0)), ("22", C64::new(0.0, 0.8))],
        )
        .unwrap();
        assert_eq!(transform_interaction(&psi, 3.0, 0.0).unwrap(), psi);
        let s22 = StateVector::basis_state(&basis, "22").unwrap();
        let out = transform_interaction(&s22, 3.0, 0.4).unwrap();
        assert!((out.amplitude("22").unwrap() - C64::from_polar(1.0, -1.2)).norm() < 1e-15);
        let back = inverse_transform_interaction(&transform_interaction(&psi, 3.0, 0.4).unwrap(), 3.0, 0.4).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() <= 1e-15);
        let lam = StateVector::basis_state(&Basis::lambda(), "j").unwrap();
        assert!(transform_interaction(&lam, 1.0, 1.0).is_err());
    }
}
