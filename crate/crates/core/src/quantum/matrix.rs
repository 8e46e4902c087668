use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{shape, Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for every structural check in the crate.
pub const TOL: f64 = 1e-9;

/// Largest composite dimension `tensor_product` will build unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix. Kets are stored as single columns, operators as
/// square matrices. Entries are always finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(shape("matrix must have at least one row and one column"));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// Callers guarantee nonzero shape and finite entries.
    pub(crate) fn wrap(m: DMatrix<C64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        Self(m)
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(shape("ragged rows"));
        }
        Self::from_dmatrix(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn column(entries: &[C64]) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_column_slice(entries.len(), 1, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    /// `n×n` diagonal matrix with real entries.
    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        Self::wrap(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(d[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    /// Outer product |ψ⟩⟨ψ| of a ket given by its amplitudes.
    pub fn projector_onto(amplitudes: &[C64]) -> Self {
        let n = amplitudes.len();
        Self::wrap(DMatrix::from_fn(n, n, |i, j| {
            amplitudes[i] * amplitudes[j].conj()
        }))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.0[(r, col)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        Self::wrap(self.0.conjugate())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self::wrap(&self.0 * &rhs.0))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::wrap(&self.0 + &rhs.0))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self::wrap(&self.0 - &rhs.0))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::wrap(&self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    /// Tr[self · rhs] without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> Result<C64> {
        if self.cols() != rhs.rows() || self.rows() != rhs.cols() {
            return Err(shape("trace of product needs compatible transposed shapes"));
        }
        let mut acc = C64::default();
        for i in 0..self.rows() {
            for k in 0..self.cols() {
                acc += self.0[(i, k)] * rhs.0[(k, i)];
            }
        }
        Ok(acc)
    }

    /// Largest entrywise modulus of `self − rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        self.same_shape(rhs)?;
        Ok(self
            .0
            .iter()
            .zip(rhs.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.adjoint()).is_ok_and(|d| d <= tol)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(shape("eigenvalues need a square matrix"));
        }
        // symmetrize so round-off asymmetry does not leak into the solver
        let h = (&self.0 + self.0.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(shape(format!(
                "shape mismatch {}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`; `a` indexes the most significant block.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    tensor_product_capped(a, b, DEFAULT_DIM_CAP)
}

pub fn tensor_product_capped(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a.rows().saturating_mul(b.rows());
    let cols = a.cols().saturating_mul(b.cols());
    let dim = rows.max(cols);
    if dim > cap {
        return Err(Error::DimensionLimit { dim, limit: cap });
    }
    Ok(ComplexMatrix::wrap(a.0.kronecker(&b.0)))
}

/// Kronecker product of a non-empty list, left to right.
pub fn tensor_all<'a, I>(factors: I) -> Result<ComplexMatrix>
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    let mut it = factors.into_iter();
    let first = it
        .next()
        .ok_or_else(|| shape("tensor product of an empty list"))?
        .clone();
    it.try_fold(first, |acc, m| tensor_product(&acc, m))
}

/// True iff every entry of U†U deviates from the identity by at most `tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(unitarity_deviation(m)? <= tol)
}

pub fn unitarity_deviation(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(shape(format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let prod = m.adjoint().matmul(m)?;
    prod.max_abs_diff(&ComplexMatrix::identity(m.rows()))
}

/// Largest entry modulus of AB − BA.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(shape(
            "commutator needs two square matrices of the same dimension",
        ));
    }
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    ab.max_abs_diff(&ba)
}
