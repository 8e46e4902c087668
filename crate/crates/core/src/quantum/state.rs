use super::matrix::{c, is_unitary, tensor_all, unitarity_deviation, ComplexMatrix, C64, TOL};
use crate::error::{shape, Error, Result};

/// Normalised ket.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tol(amplitudes, TOL)
    }

    pub fn with_tol(amplitudes: Vec<C64>, tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(shape("state must have at least one amplitude"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm: f64 = amplitudes.iter().map(C64::norm_sqr).sum();
        if (norm - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("squared norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(shape(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = vec![C64::default(); dim];
        v[index] = c(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::projector_onto(&self.amplitudes),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        check_density(&matrix, tol)?;
        Ok(Self { matrix })
    }

    /// Caller guarantees the invariants (outputs of trace- and spectrum-preserving maps).
    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        Ok(PureState::new(amplitudes)?.to_density())
    }

    /// Convex combination Σ q_i |ψ_i⟩⟨ψ_i|.
    pub fn from_ensemble(ensemble: &[(f64, PureState)]) -> Result<Self> {
        let first = ensemble
            .first()
            .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (q, psi) in ensemble {
            if psi.dim() != dim {
                return Err(shape("ensemble states differ in dimension"));
            }
            if *q < -TOL {
                return Err(Error::InvalidState(format!("negative ensemble weight {q}")));
            }
            acc = acc.add(&psi.to_density().matrix.scale(c(*q, 0.0)))?;
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Phase-free comparison: max entry deviation between the two matrices.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .trace_of_product(&self.matrix)
            .map(|z| z.re)
            .unwrap_or(f64::NAN)
    }

    /// Re-checks every invariant at the given tolerance.
    pub fn validate(&self, tol: f64) -> Result<()> {
        check_density(&self.matrix, tol)
    }
}

fn check_density(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(shape("density matrix must be square"));
    }
    if !m.is_hermitian(tol) {
        return Err(Error::InvalidState("density matrix is not Hermitian".into()));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
    }
    let min_ev = m.hermitian_eigenvalues()?[0];
    if min_ev < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
    }
    Ok(())
}

/// Square matrix with U†U = I.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !is_unitary(&matrix, tol)? {
            return Err(Error::NotUnitary {
                deviation: unitarity_deviation(&matrix)?,
            });
        }
        Ok(Self { matrix })
    }

    pub(crate) fn trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::trusted(self.matrix.adjoint())
    }

    /// `self · rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::trusted(self.matrix.matmul(&rhs.matrix)?))
    }

    pub fn tensor(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::trusted(super::matrix::tensor_product(
            &self.matrix,
            &rhs.matrix,
        )?))
    }

    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.dim() {
            return Err(shape("operator and state dimensions differ"));
        }
        let v = self.matrix.matmul(&ComplexMatrix::column(psi.amplitudes())?)?;
        let amps = (0..v.rows()).map(|i| v.get(i, 0)).collect();
        PureState::with_tol(amps, 1e-6)
    }

    pub fn determinant(&self) -> C64 {
        self.matrix.inner().determinant()
    }

    /// True when every column has exactly one entry equal to 1 and zeros elsewhere.
    pub fn is_permutation(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            let ones = (0..n)
                .filter(|&i| (self.matrix.get(i, j) - c(1.0, 0.0)).norm() <= tol)
                .count();
            let zeros = (0..n).filter(|&i| self.matrix.get(i, j).norm() <= tol).count();
            ones == 1 && zeros == n - 1
        })
    }
}

/// U_1 ⊗ … ⊗ U_n.
pub fn tensor_unitaries(locals: &[UnitaryOperator]) -> Result<UnitaryOperator> {
    let m = tensor_all(locals.iter().map(UnitaryOperator::matrix))?;
    Ok(UnitaryOperator::trusted(m))
}

/// ρ → UρU†.
pub fn evolve_density(rho: &DensityMatrix, u: &UnitaryOperator) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(shape(format!(
            "state dim {} vs operator dim {}",
            rho.dim(),
            u.dim()
        )));
    }
    let out = u.matrix().matmul(rho.matrix())?.matmul(&u.matrix().adjoint())?;
    Ok(DensityMatrix::trusted(out))
}
