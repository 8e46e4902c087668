use std::collections::HashSet;

use rand::Rng;

use super::matrix::{ComplexMatrix, TOL};
use super::state::DensityMatrix;
use crate::error::{shape, Error, Result};

/// Complete set of orthogonal projectors with distinct outcome labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    projectors: Vec<ComplexMatrix>,
    labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub probability: f64,
    /// Π ρ Π / p, absent when p ≤ TOL.
    pub post_state: Option<DensityMatrix>,
}

impl MeasurementBasis {
    pub fn new(projectors: Vec<ComplexMatrix>, labels: Vec<String>) -> Result<Self> {
        Self::with_tol(projectors, labels, TOL)
    }

    pub fn with_tol(projectors: Vec<ComplexMatrix>, labels: Vec<String>, tol: f64) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidBasis("no projectors".into()));
        }
        if projectors.len() != labels.len() {
            return Err(Error::InvalidBasis(format!(
                "{} projectors but {} labels",
                projectors.len(),
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidBasis(format!("duplicate label {l:?}")));
            }
        }
        let dim = projectors[0].rows();
        for (k, p) in projectors.iter().enumerate() {
            if !p.is_square() || p.rows() != dim {
                return Err(Error::InvalidBasis(format!("projector {k} has the wrong shape")));
            }
            if !p.is_hermitian(tol) {
                return Err(Error::InvalidBasis(format!("projector {k} is not Hermitian")));
            }
        }
        for i in 0..projectors.len() {
            for j in i..projectors.len() {
                let prod = projectors[i].matmul(&projectors[j])?;
                let expected = if i == j {
                    projectors[i].clone()
                } else {
                    ComplexMatrix::zeros(dim, dim)
                };
                if prod.max_abs_diff(&expected)? > tol {
                    return Err(Error::InvalidBasis(if i == j {
                        format!("projector {i} is not idempotent")
                    } else {
                        format!("projectors {i} and {j} are not orthogonal")
                    }));
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for p in &projectors {
            sum = sum.add(p)?;
        }
        if sum.max_abs_diff(&ComplexMatrix::identity(dim))? > tol {
            return Err(Error::InvalidBasis(
                "projectors do not sum to the identity".into(),
            ));
        }
        Ok(Self { projectors, labels })
    }

    /// Rank-one projectors onto the columns of an orthonormal set of kets.
    pub fn from_kets(kets: &[Vec<super::matrix::C64>], labels: Vec<String>) -> Result<Self> {
        let projectors = kets.iter().map(|k| ComplexMatrix::projector_onto(k)).collect();
        Self::new(projectors, labels)
    }

    /// {|k⟩⟨k|} in the computational basis.
    pub fn computational(dim: usize, labels: Vec<String>) -> Result<Self> {
        let projectors = (0..dim)
            .map(|k| {
                let mut d = vec![0.0; dim];
                d[k] = 1.0;
                ComplexMatrix::diag_real(&d)
            })
            .collect();
        Self::new(projectors, labels)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].rows()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// p(o) = Tr[Π_o ρ] for every outcome, in basis order.
pub fn outcome_probabilities(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    check_dims(rho, basis)?;
    basis
        .projectors
        .iter()
        .map(|p| Ok(p.trace_of_product(rho.matrix())?.re))
        .collect()
}

pub fn measure(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Vec<Outcome>> {
    let probs = outcome_probabilities(rho, basis)?;
    basis
        .projectors
        .iter()
        .zip(&basis.labels)
        .zip(probs)
        .map(|((proj, label), p)| {
            let post_state = if p > TOL {
                let m = proj.matmul(rho.matrix())?.matmul(proj)?;
                Some(DensityMatrix::trusted(m.scale((1.0 / p).into())))
            } else {
                None
            };
            Ok(Outcome {
                label: label.clone(),
                probability: p,
                post_state,
            })
        })
        .collect()
}

/// Draws one outcome label with the Born-rule probabilities. The generator
/// is advanced in place, so a fixed seed gives a fixed outcome sequence.
pub fn sample_outcome<'b, R: Rng + ?Sized>(
    rho: &DensityMatrix,
    basis: &'b MeasurementBasis,
    rng: &mut R,
) -> Result<&'b str> {
    let probs = outcome_probabilities(rho, basis)?;
    let idx = sample_index(&probs, rng);
    Ok(&basis.labels[idx])
}

pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

fn check_dims(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<()> {
    if rho.dim() != basis.dim() {
        return Err(shape(format!(
            "state dim {} vs basis dim {}",
            rho.dim(),
            basis.dim()
        )));
    }
    Ok(())
}
