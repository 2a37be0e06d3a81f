//! Dense complex linear algebra for the small (dim ≤ 16) operators used
//! throughout the crate.
//!
//! Storage comes from `nalgebra` and the Hermitian eigensolver from `faer`,
//! whose residuals stay at machine precision for the strongly graded spectra
//! of the gate regime (eigenvalues 16 next to 1e−10); this module
//! adds the invariants the physics relies on (Hermiticity, unitarity,
//! normalization) and the unitary exponential `exp(−i·M·t)`, which is always
//! evaluated through the eigendecomposition so that the result is unitary to
//! machine precision.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A state vector (or any complex column vector).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(DVector<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("vector dimension must be at least 1"));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("vector entries must be finite"));
        }
        Ok(Self(DVector::from_vec(entries)))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub(crate) fn from_dvector(v: DVector<Complex64>) -> Self {
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn get(&self, i: usize) -> Complex64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(Self(&self.0 / Complex64::new(n, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    /// `self + factor·other`.
    pub fn add_scaled(&self, factor: Complex64, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0 * factor))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm())))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn overlap(a: &ComplexVector, b: &ComplexVector) -> Result<Complex64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.0.dotc(&b.0))
}

/// Dense Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Checks squareness, finiteness and `max|M − M†| ≤ 1e−12·max(1, ‖M‖_max)`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "Hermitian operator must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("operator entries must be finite"));
        }
        let defect = max_abs(&(&m - m.adjoint()));
        if defect > HERMITIAN_TOL * max_abs(&m).max(1.0) {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (max |M - M†| = {defect:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_real_symmetric(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid("entry count does not match dimension"));
        }
        Self::new(CMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    /// Builds from row-major complex entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid("entry count does not match dimension"));
        }
        Self::new(CMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * Complex64::new(factor, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 - &other.0))
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dims(self.dim(), v.dim())?;
        Ok(ComplexVector(&self.0 * &v.0))
    }

    /// ⟨v|M|v⟩ (real for Hermitian M).
    pub fn expectation(&self, v: &ComplexVector) -> Result<f64> {
        check_dims(self.dim(), v.dim())?;
        Ok(v.0.dotc(&(&self.0 * &v.0)).re)
    }

    /// `[self, other]` as a plain matrix (it is anti-Hermitian).
    pub fn commutator(&self, other: &Self) -> CMatrix {
        &self.0 * &other.0 - &other.0 * &self.0
    }
}

/// Dense unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    /// Checks `max|U†U − I| ≤ 1e−10`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::invalid(
                "unitary operator must be square and non-empty",
            ));
        }
        let n = m.nrows();
        let defect = max_abs(&(m.adjoint() * &m - CMatrix::identity(n, n)));
        if !(defect <= UNITARY_TOL) {
            return Err(Error::invalid(format!(
                "matrix is not unitary (max |U†U - I| = {defect:e})"
            )));
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// Column `k` as a vector.
    pub fn column(&self, k: usize) -> ComplexVector {
        ComplexVector(self.0.column(k).into_owned())
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self(&self.0 * &other.0))
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        check_dims(self.dim(), v.dim())?;
        Ok(ComplexVector(&self.0 * &v.0))
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.0.adjoint() * &self.0 - CMatrix::identity(n, n)))
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: UnitaryOperator,
}

impl Eigensystem {
    /// `exp(−i·M·t)` reassembled from this decomposition.
    pub fn evolution(&self, t: f64) -> UnitaryOperator {
        let v = self.vectors.matrix();
        let mut scaled = v.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambda * t);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
        UnitaryOperator(scaled * v.adjoint())
    }

    /// Indices of eigenvalues within `tol` of `energy`.
    pub fn indices_near(&self, energy: f64, tol: f64) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &l)| (l - energy).abs() <= tol)
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn hermitian_eigensystem(m: &HermitianOperator) -> Result<Eigensystem> {
    let n = m.dim();
    if n == 0 {
        return Err(Error::invalid("eigensystem of a 0x0 matrix"));
    }
    let a = Mat::<faer::c64>::from_fn(n, n, |r, c| {
        let z = m.0[(r, c)];
        faer::c64::new(z.re, z.im)
    });
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::invalid(format!("Hermitian eigensolver failed: {e:?}")))?;
    let (s, u) = (eig.S(), eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort: ties keep solver order
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let values = order.iter().map(|&k| s[k].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| {
        let z = u[(r, order[c])];
        Complex64::new(z.re, z.im)
    });
    Ok(Eigensystem {
        values,
        vectors: UnitaryOperator(vectors),
    })
}

/// `exp(−i·M·t)`.
pub fn expm_i(m: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("non-finite duration {t}")));
    }
    if t == 0.0 {
        return Ok(UnitaryOperator::identity(m.dim()));
    }
    Ok(hermitian_eigensystem(m)?.evolution(t))
}

/// Eigen-decomposition of a normal matrix (e.g. a unitary) through a generic
/// Hermitian combination of its Hermitian and anti-Hermitian parts, which
/// share eigenvectors. Returns (eigenvalues, eigenvector columns).
pub(crate) fn normal_eigen(m: &CMatrix) -> Result<(Vec<Complex64>, UnitaryOperator)> {
    let half = Complex64::new(0.5, 0.0);
    let herm = (m + m.adjoint()) * half;
    let anti = (m - m.adjoint()) * Complex64::new(0.0, -0.5);
    // irrational weight so that distinct eigenvalues stay distinct in the mix
    let mix = herm + anti * Complex64::new(std::f64::consts::FRAC_1_SQRT_2 * 0.913, 0.0);
    let eig = hermitian_eigensystem(&HermitianOperator::new((&mix + mix.adjoint()) * half)?)?;
    let v = eig.vectors.matrix();
    let values = (0..m.nrows())
        .map(|k| {
            let col = v.column(k);
            col.dotc(&(m * col))
        })
        .collect();
    Ok((values, eig.vectors))
}
