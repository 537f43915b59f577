//! Fixed-step integration of i·dψ/dt = H(t)ψ (H in angular-frequency units)
//! with a step-halving convergence ladder, plus observable extraction.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::{phase_of, Basis, HermitianOperator, StateVector, C64};

/// Largest tolerated max_t |‖ψ(t)‖² − 1| for an accepted trajectory.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
/// Cap on the number of step halvings in [`converge`].
pub const MAX_HALVINGS: usize = 10;
/// Starting step as a fraction of the pulse FWHM.
pub const DEFAULT_STEPS_PER_FWHM: f64 = 200.0;

/// A time-dependent Hamiltonian H(t)/ħ over a fixed basis.
pub trait Hamiltonian: Sync {
    fn basis(&self) -> Basis;

    fn dim(&self) -> usize {
        self.basis().len()
    }

    /// Writes H(t)/ħ into `out` (dim × dim), overwriting every entry.
    fn fill(&self, t: f64, out: &mut DMatrix<C64>);

    fn at(&self, t: f64) -> HermitianOperator {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        self.fill(t, &mut m);
        HermitianOperator::new(m).expect("Hamiltonian builders produce Hermitian matrices")
    }
}

impl<H: Hamiltonian + ?Sized> Hamiltonian for &H {
    fn basis(&self) -> Basis {
        (**self).basis()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        (**self).fill(t, out)
    }
}

/// Adapts a closure `t ↦ H(t)/ħ` to [`Hamiltonian`].
pub struct FnHamiltonian<F> {
    basis: Basis,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    pub fn new(basis: Basis, f: F) -> Self {
        FnHamiltonian { basis, f }
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64) -> DMatrix<C64> + Sync,
{
    fn basis(&self) -> Basis {
        self.basis.clone()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        out.copy_from(&(self.f)(t));
    }
}

/// The time-reversed generator −H(t_start + t_end − t). Propagating
/// ψ(t_end) with it over [t_start, t_end] undoes the forward evolution.
pub struct Reversed<H> {
    pub inner: H,
    pub t_start: f64,
    pub t_end: f64,
}

impl<H: Hamiltonian> Hamiltonian for Reversed<H> {
    fn basis(&self) -> Basis {
        self.inner.basis()
    }

    fn fill(&self, t: f64, out: &mut DMatrix<C64>) {
        self.inner.fill(self.t_start + self.t_end - t, out);
        out.neg_mut();
    }
}

/// Integration interval, step and sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub base_step: f64,
    /// Every `sample_stride`-th step is stored (the final time always is).
    pub sample_stride: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, base_step: f64, sample_stride: usize) -> Result<Self> {
        let g = TimeGrid {
            t_start,
            t_end,
            base_step,
            sample_stride,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need t_end > t_start, got [{}, {}]", self.t_start, self.t_end),
            });
        }
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "base_step",
                reason: format!("must be > 0, got {}", self.base_step),
            });
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter {
                name: "sample_stride",
                reason: "must be >= 1".into(),
            });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        let n = ((self.t_end - self.t_start) / self.base_step - 1e-9).ceil();
        (n as usize).max(1)
    }

    /// The actual step: the span divided evenly into [`steps`](Self::steps).
    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps() as f64
    }

    /// Half the step and twice the stride, so sample times are unchanged.
    pub fn halved(&self) -> TimeGrid {
        TimeGrid {
            base_step: self.step() / 2.0,
            sample_stride: self.sample_stride * 2,
            ..*self
        }
    }
}

/// Stored samples of a propagation.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub basis: Basis,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `populations[sample][level]`.
    pub populations: Vec<Vec<f64>>,
    /// Unwrapped phases, `None` below the population floor.
    pub phases: Vec<Vec<Option<f64>>>,
    /// max over every step of |‖ψ‖² − 1|.
    pub norm_drift: f64,
    /// max over every step of the total population in levels involving `e`.
    pub max_excited_population: f64,
    pub step: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("a trajectory has at least one sample")
    }

    pub fn level_index(&self, label: &str) -> Result<usize> {
        self.basis.index_of(label)
    }

    pub fn phase_column(&self, label: &str) -> Result<Vec<Option<f64>>> {
        let k = self.level_index(label)?;
        Ok(self.phases.iter().map(|row| row[k]).collect())
    }

    pub fn population_column(&self, label: &str) -> Result<Vec<f64>> {
        let k = self.level_index(label)?;
        Ok(self.populations.iter().map(|row| row[k]).collect())
    }

    /// Last defined unwrapped phase of a level.
    pub fn terminal_phase(&self, label: &str) -> Result<Option<f64>> {
        Ok(self.phase_column(label)?.into_iter().next_back().flatten())
    }
}

/// Populations and unwrapped phases of a sequence of states.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub populations: Vec<Vec<f64>>,
    pub phases: Vec<Vec<Option<f64>>>,
}

/// Per-level populations and phases. A phase is undefined below the
/// population floor; across such gaps it freezes at its last defined value
/// and unwrapping resumes relative to it when the level repopulates.
pub fn extract_observables(states: &[StateVector]) -> Observables {
    observables(states, None)
}

/// Like [`extract_observables`], but each new phase is put on the 2π branch
/// nearest to its last defined value advanced by the change in `guide` (one
/// value per state). With the continuous phase of the adiabatic state as
/// guide, a level keeps the right branch across a population gap.
pub fn guided_observables(states: &[StateVector], guide: &[f64]) -> Result<Observables> {
    if guide.len() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            found: guide.len(),
        });
    }
    Ok(observables(states, Some(guide)))
}

fn observables(states: &[StateVector], guide: Option<&[f64]>) -> Observables {
    let dim = states.first().map_or(0, |s| s.dim());
    // (value, sample index) of the last defined phase per level
    let mut last: Vec<Option<(f64, usize)>> = vec![None; dim];
    let mut populations = Vec::with_capacity(states.len());
    let mut phases = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        populations.push(s.populations());
        let row = s
            .amplitudes()
            .iter()
            .zip(last.iter_mut())
            .map(|(&a, prev)| {
                let p = phase_of(a)?;
                let p = match (*prev, guide) {
                    (Some((q, _)), None) => p + TAU * ((q - p) / TAU).round(),
                    (Some((q, j)), Some(g)) => {
                        let expect = q + g[i] - g[j];
                        p + TAU * ((expect - p) / TAU).round()
                    }
                    (None, _) => p,
                };
                *prev = Some((p, i));
                Some(p)
            })
            .collect();
        phases.push(row);
    }
    Observables {
        populations,
        phases,
    }
}

/// Unwrapped arg⟨ref(t)|ψ(t)⟩ over the samples of a trajectory.
pub fn overlap_guide<F>(traj: &Trajectory, reference: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> StateVector,
{
    let mut out: Vec<f64> = Vec::with_capacity(traj.times.len());
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let p = reference(*t).inner(psi)?.arg();
        let p = match out.last() {
            Some(&q) => p + TAU * ((q - p) / TAU).round(),
            None => p,
        };
        out.push(p);
    }
    Ok(out)
}

impl Trajectory {
    /// Recomputes the phase columns with [`guided_observables`].
    pub fn rebranch(&mut self, guide: &[f64]) -> Result<()> {
        self.phases = guided_observables(&self.states, guide)?.phases;
        Ok(())
    }
}

struct Workspace {
    h0: DMatrix<C64>,
    hm: DMatrix<C64>,
    k: [DVector<C64>; 4],
    tmp: DVector<C64>,
}

#[inline]
fn deriv(h: &DMatrix<C64>, y: &DVector<C64>, out: &mut DVector<C64>) {
    out.gemv(C64::new(0.0, -1.0), h, y, C64::new(0.0, 0.0));
}

/// Runs RK4 on the grid without the norm-drift check.
fn integrate<H: Hamiltonian + ?Sized>(ham: &H, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory> {
    grid.validate()?;
    let basis = ham.basis();
    if psi0.dim() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: psi0.dim(),
        });
    }
    let n = basis.len();
    let steps = grid.steps();
    let h = grid.step();
    let excited = basis.excited_indices();
    let zero = DVector::<C64>::zeros(n);
    let mut ws = Workspace {
        h0: DMatrix::zeros(n, n),
        hm: DMatrix::zeros(n, n),
        k: [zero.clone(), zero.clone(), zero.clone(), zero.clone()],
        tmp: zero,
    };
    let mut y = psi0.amplitudes().clone();
    let mut times = Vec::with_capacity(steps / grid.sample_stride + 2);
    let mut states = Vec::with_capacity(steps / grid.sample_stride + 2);
    let excited_pop = |y: &DVector<C64>| excited.iter().map(|&k| y[k].norm_sqr()).sum::<f64>();
    let mut drift = (y.norm_squared() - 1.0).abs();
    let mut max_e = excited_pop(&y);

    times.push(grid.t_start);
    states.push(StateVector::from_raw(y.clone(), basis.clone())?);
    ham.fill(grid.t_start, &mut ws.h0);
    for step in 1..=steps {
        let t = grid.t_start + (step - 1) as f64 * h;
        let t_next = if step == steps {
            grid.t_end
        } else {
            grid.t_start + step as f64 * h
        };
        ham.fill(t + 0.5 * h, &mut ws.hm);

        let [k1, k2, k3, k4] = &mut ws.k;
        deriv(&ws.h0, &y, k1);
        ws.tmp.copy_from(&y);
        ws.tmp.axpy(C64::new(0.5 * h, 0.0), k1, C64::new(1.0, 0.0));
        deriv(&ws.hm, &ws.tmp, k2);
        ws.tmp.copy_from(&y);
        ws.tmp.axpy(C64::new(0.5 * h, 0.0), k2, C64::new(1.0, 0.0));
        deriv(&ws.hm, &ws.tmp, k3);
        ws.tmp.copy_from(&y);
        ws.tmp.axpy(C64::new(h, 0.0), k3, C64::new(1.0, 0.0));
        // H(t + h) becomes the next step's H(t)
        ham.fill(t_next, &mut ws.h0);
        deriv(&ws.h0, &ws.tmp, k4);
        let w = h / 6.0;
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }

        drift = drift.max((y.norm_squared() - 1.0).abs());
        max_e = max_e.max(excited_pop(&y));
        if step % grid.sample_stride == 0 || step == steps {
            times.push(t_next);
            states.push(StateVector::from_raw(y.clone(), basis.clone())?);
        }
    }
    let obs = extract_observables(&states);
    Ok(Trajectory {
        basis,
        times,
        states,
        populations: obs.populations,
        phases: obs.phases,
        norm_drift: drift,
        max_excited_population: max_e,
        step: h,
    })
}

/// Propagates `psi0` with the classical fourth-order Runge–Kutta scheme on
/// a fixed grid. The state is never renormalized; a norm drift above
/// [`NORM_DRIFT_LIMIT`] is an error.
pub fn propagate<H: Hamiltonian + ?Sized>(ham: &H, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory> {
    let traj = integrate(ham, psi0, grid)?;
    check_drift(&traj)?;
    Ok(traj)
}

fn check_drift(traj: &Trajectory) -> Result<()> {
    if traj.norm_drift > NORM_DRIFT_LIMIT || !traj.norm_drift.is_finite() {
        return Err(Error::IntegrationQuality {
            drift: traj.norm_drift,
            limit: NORM_DRIFT_LIMIT,
        });
    }
    Ok(())
}

/// Steps tried by [`converge`] and the terminal-state distances between
/// successive refinements.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub distances: Vec<f64>,
    pub accepted_step: f64,
    pub tolerance: f64,
}

/// Halves the step until the terminal states of two successive refinements
/// differ by at most `tol` in vector norm, and returns the finer trajectory.
pub fn converge<H: Hamiltonian + ?Sized>(
    ham: &H,
    psi0: &StateVector,
    grid: &TimeGrid,
    tol: f64,
) -> Result<(Trajectory, ConvergenceReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be > 0, got {tol}"),
        });
    }
    let mut g = *grid;
    let mut coarse = integrate(ham, psi0, &g)?;
    let mut steps = vec![coarse.step];
    let mut distances = Vec::new();
    for _ in 0..MAX_HALVINGS {
        g = g.halved();
        let fine = integrate(ham, psi0, &g)?;
        let d = (fine.final_state().amplitudes() - coarse.final_state().amplitudes()).norm();
        steps.push(fine.step);
        distances.push(d);
        if d <= tol {
            check_drift(&fine)?;
            let report = ConvergenceReport {
                accepted_step: fine.step,
                steps,
                distances,
                tolerance: tol,
            };
            return Ok((fine, report));
        }
        coarse = fine;
    }
    Err(Error::NotConverged {
        halvings: MAX_HALVINGS,
        distance: distances.last().copied().unwrap_or(f64::INFINITY),
    })
}

/// Largest population found outside the adiabatic subspace spanned by
/// `subspace(t)` (an orthonormal set) over the stored samples.
pub fn adiabaticity_report<F>(traj: &Trajectory, subspace: F) -> Result<f64>
where
    F: Fn(f64) -> Vec<StateVector>,
{
    let mut worst = 0.0_f64;
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let inside: f64 = subspace(*t)
            .iter()
            .map(|v| v.inner(psi).map(|z| z.norm_sqr()))
            .sum::<Result<f64>>()?;
        worst = worst.max(psi.norm_sq() - inside);
    }
    Ok(worst)
}
