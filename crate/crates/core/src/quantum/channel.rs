use super::matrix::{c, ComplexMatrix, TOL};
use super::state::{DensityMatrix, UnitaryOperator};
use crate::error::{shape, Error, Result};

/// Trace-preserving Kraus representation ρ → Σ E_i ρ E_i†.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tol(operators, TOL)
    }

    pub fn with_tol(operators: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (k, e) in operators.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::InvalidChannel(format!("operator {k} has the wrong shape")));
            }
            sum = sum.add(&e.adjoint().matmul(e)?)?;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim))?;
        if dev > tol {
            return Err(Error::InvalidChannel(format!(
                "Σ E†E deviates from identity by {dev:.3e}"
            )));
        }
        Ok(Self { operators })
    }

    /// Applies U_i with probability s_i, i.e. E_i = √s_i U_i.
    pub fn from_unitary_mixture(mixture: &[(f64, UnitaryOperator)]) -> Result<Self> {
        check_probabilities(mixture.iter().map(|(p, _)| *p))?;
        let ops = mixture
            .iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, u)| u.matrix().scale(c(p.sqrt(), 0.0)))
            .collect();
        Self::new(ops)
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }
}

pub(crate) fn check_probabilities(probs: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for p in probs {
        if !p.is_finite() || p < -TOL {
            return Err(Error::InvalidMixture(format!("invalid probability {p}")));
        }
        total += p;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidMixture("empty mixture".into()));
    }
    if (total - 1.0).abs() > TOL {
        return Err(Error::InvalidMixture(format!("probabilities sum to {total}")));
    }
    Ok(())
}

pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    if rho.dim() != ch.dim() {
        return Err(shape(format!(
            "state dim {} vs channel dim {}",
            rho.dim(),
            ch.dim()
        )));
    }
    let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for e in &ch.operators {
        out = out.add(&e.matmul(rho.matrix())?.matmul(&e.adjoint())?)?;
    }
    Ok(DensityMatrix::trusted(out))
}
