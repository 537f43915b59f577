//! Dense complex linear algebra for the small Hilbert spaces used here
//! (dimension 16 at most): labeled state vectors, Hermitian operators,
//! eigendecomposition, fidelity and phase extraction.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on Σ|a|² = 1 when a state is constructed.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance on M = M† (scaled by max(1, max|M_ij|)).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on U†U = I for `unitary_fidelity` inputs.
pub const UNITARY_TOL: f64 = 1e-8;
/// Below this population a level's phase is reported as undefined.
pub const POPULATION_FLOOR: f64 = 1e-6;

const SUPPORTED_DIMS: [usize; 4] = [2, 3, 4, 16];

/// Labels of an ordered level basis. Cheap to clone.
#[derive(Clone, PartialEq, Eq)]
pub struct Basis {
    labels: Arc<[String]>,
}

impl Basis {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Basis {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// Qubit basis `0, 1`.
    pub fn qubit() -> Self {
        Basis::new(["0", "1"])
    }

    /// Lambda system basis `j, e, 2`.
    pub fn lambda() -> Self {
        Basis::new(["j", "e", "2"])
    }

    /// Tripod basis `0, 1, 2, e`.
    pub fn tripod() -> Self {
        Basis::new(TRIPOD_LABELS)
    }

    /// Two-atom tripod basis `00, 01, ..., ee` in row-major pair order
    /// (index = 4·a + b).
    pub fn two_atom() -> Self {
        let mut labels = Vec::with_capacity(16);
        for a in TRIPOD_LABELS {
            for b in TRIPOD_LABELS {
                labels.push(format!("{a}{b}"));
            }
        }
        Basis::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLevel(label.to_string()))
    }

    /// Indices of levels that involve the excited state `e`.
    pub fn excited_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.contains('e'))
            .map(|(k, _)| k)
            .collect()
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels.iter()).finish()
    }
}

pub const TRIPOD_LABELS: [&str; 4] = ["0", "1", "2", "e"];

/// A normalized complex amplitude vector over a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    basis: Basis,
}

impl StateVector {
    /// Builds a state, checking dimension and normalization.
    pub fn new(amplitudes: DVector<C64>, basis: Basis) -> Result<Self> {
        let state = Self::from_raw(amplitudes, basis)?;
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    /// Builds a state, rescaling the amplitudes to unit norm.
    pub fn normalized(amplitudes: DVector<C64>, basis: Basis) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Self::new(amplitudes.unscale(norm), basis)
    }

    /// Wraps amplitudes produced by time integration. The norm is not
    /// checked: propagated states carry their drift, which the trajectory
    /// reports separately.
    pub(crate) fn from_raw(amplitudes: DVector<C64>, basis: Basis) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: amplitudes.len(),
            });
        }
        if !SUPPORTED_DIMS.contains(&basis.len()) {
            return Err(Error::UnsupportedDimension(basis.len()));
        }
        Ok(StateVector { amplitudes, basis })
    }

    /// The basis state `|label⟩`.
    pub fn basis_state(basis: &Basis, label: &str) -> Result<Self> {
        let k = basis.index_of(label)?;
        let mut amps = DVector::zeros(basis.len());
        amps[k] = C64::new(1.0, 0.0);
        Self::new(amps, basis.clone())
    }

    /// Builds a normalized superposition from `(label, amplitude)` pairs.
    pub fn from_labels(basis: &Basis, terms: &[(&str, C64)]) -> Result<Self> {
        let mut amps = DVector::zeros(basis.len());
        for (label, a) in terms {
            amps[basis.index_of(label)?] += *a;
        }
        Self::new(amps, basis.clone())
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn amplitude(&self, label: &str) -> Result<C64> {
        Ok(self.amplitudes[self.basis.index_of(label)?])
    }

    pub fn population(&self, label: &str) -> Result<f64> {
        Ok(self.amplitude(label)?.norm_sqr())
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// The state multiplied by a global phase e^{iβ}.
    pub fn with_global_phase(&self, beta: f64) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.map(|a| a * C64::from_polar(1.0, beta)),
            basis: self.basis.clone(),
        }
    }
}

/// A Hermitian matrix in angular-frequency units (H/ħ).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let asym = max_hermitian_asymmetry(&matrix);
        let scale = matrix.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        Ok(HermitianOperator { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator {
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Spectral norm, bounded from above by the Frobenius norm. Used only
    /// to scale tolerances.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(&self.matrix * psi.amplitudes())
    }
}

pub fn max_hermitian_asymmetry(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order with column-orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn eigenvector(&self, k: usize) -> DVector<C64> {
        self.eigenvectors.column(k).into_owned()
    }

    /// Σ λ_k v_k v_k†.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let v = &self.eigenvectors;
        let lam = DMatrix::from_diagonal(&DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| C64::new(l, 0.0)),
        ));
        v * lam * v.adjoint()
    }
}

/// Eigendecomposition of a Hermitian operator. Degenerate eigenspaces come
/// back with an orthonormal but otherwise arbitrary basis.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = h.dim();
    let eig = nalgebra::SymmetricEigen::try_new(h.matrix.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// arg(⟨level|ψ⟩) in (−π, π], or `None` when the level's population is
/// below [`POPULATION_FLOOR`].
pub fn overlap_phase(psi: &StateVector, level: &str) -> Result<Option<f64>> {
    let a = psi.amplitude(level)?;
    Ok(phase_of(a))
}

pub(crate) fn phase_of(a: C64) -> Option<f64> {
    if a.norm_sqr() > POPULATION_FLOOR {
        Some(wrap_phase(a.arg()))
    } else {
        None
    }
}

/// |Tr(U†V)|/d with no unitarity check. Used for reconstructed gates, which
/// may be slightly non-unitary through leakage.
pub fn trace_fidelity(u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<f64> {
    check_same_square(u, v)?;
    let d = u.nrows() as f64;
    let tr = u
        .iter()
        .zip(v.iter())
        .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b);
    Ok(tr.norm() / d)
}

/// Global-phase-insensitive gate fidelity F = |Tr(U†V)|/d of two unitaries.
pub fn unitary_fidelity(u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<f64> {
    check_same_square(u, v)?;
    for m in [u, v] {
        let dev = unitarity_deviation(m);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { max_deviation: dev });
        }
    }
    Ok(trace_fidelity(u, v)?.min(1.0))
}

/// max |(U†U − I)_ij|.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let p = u.adjoint() * u;
    let n = p.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(id, 0.0)).norm());
        }
    }
    worst
}

fn check_same_square(u: &DMatrix<C64>, v: &DMatrix<C64>) -> Result<()> {
    if !u.is_square() || u.shape() != v.shape() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: v.nrows(),
        });
    }
    Ok(())
}
