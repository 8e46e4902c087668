//! Parameterized single-qubit strategy families and finite operator sets.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{c, ComplexMatrix, UnitaryOperator, C64};

const RANGE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyFamily {
    /// U(θ): real rotations, θ ∈ [0, π].
    OneParam,
    /// U(θ, φ), θ ∈ [0, π], φ ∈ [0, π/2].
    TwoParam,
    /// U(θ, φ, λ), θ ∈ [0, π], φ, λ ∈ [0, 2π).
    ThreeParam,
    /// Labeled operators; a point is the single value `index`.
    FiniteSet {
        labels: Vec<String>,
        operators: Vec<UnitaryOperator>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    OneParam,
    TwoParam,
    ThreeParam,
    FiniteSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub name: &'static str,
    pub lo: f64,
    pub hi: f64,
    /// Closed ranges include `hi`; half-open ones are periodic and exclude it.
    pub closed: bool,
}

impl ParamRange {
    const fn closed(name: &'static str, hi: f64) -> Self {
        Self {
            name,
            lo: 0.0,
            hi,
            closed: true,
        }
    }

    const fn periodic(name: &'static str) -> Self {
        Self {
            name,
            lo: 0.0,
            hi: TAU,
            closed: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() || x < self.lo - RANGE_SLACK {
            return false;
        }
        if self.closed {
            x <= self.hi + RANGE_SLACK
        } else {
            x < self.hi
        }
    }

    fn describe(&self) -> String {
        if self.closed {
            format!("[{}, {}]", self.lo, self.hi)
        } else {
            format!("[{}, {})", self.lo, self.hi)
        }
    }
}

/// Parameter values in radians (or a single operator index for finite sets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl StrategyFamily {
    pub fn finite_set(labels: Vec<String>, operators: Vec<UnitaryOperator>) -> Result<Self> {
        if labels.is_empty() || labels.len() != operators.len() {
            return Err(Error::Parameter(format!(
                "finite set needs matching non-empty labels and operators ({} vs {})",
                labels.len(),
                operators.len()
            )));
        }
        let dim = operators[0].dim();
        if operators.iter().any(|u| u.dim() != dim) {
            return Err(Error::Parameter(
                "finite set operators differ in dimension".into(),
            ));
        }
        Ok(Self::FiniteSet { labels, operators })
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            Self::OneParam => FamilyKind::OneParam,
            Self::TwoParam => FamilyKind::TwoParam,
            Self::ThreeParam => FamilyKind::ThreeParam,
            Self::FiniteSet { .. } => FamilyKind::FiniteSet,
        }
    }

    pub fn from_kind_name(name: &str) -> Result<Self> {
        match name {
            "one_param" => Ok(Self::OneParam),
            "two_param" => Ok(Self::TwoParam),
            "three_param" => Ok(Self::ThreeParam),
            other => Err(Error::UnknownName(format!("strategy family {other:?}"))),
        }
    }

    pub fn arity(&self) -> usize {
        self.ranges().len()
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::FiniteSet { operators, .. } => operators[0].dim(),
            _ => 2,
        }
    }

    pub fn ranges(&self) -> Vec<ParamRange> {
        match self {
            Self::OneParam => vec![ParamRange::closed("theta", PI)],
            Self::TwoParam => vec![
                ParamRange::closed("theta", PI),
                ParamRange::closed("phi", FRAC_PI_2),
            ],
            Self::ThreeParam => vec![
                ParamRange::closed("theta", PI),
                ParamRange::periodic("phi"),
                ParamRange::periodic("lambda"),
            ],
            Self::FiniteSet { operators, .. } => {
                vec![ParamRange::closed("index", (operators.len() - 1) as f64)]
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::FiniteSet { .. })
    }

    pub fn operator_count(&self) -> Option<usize> {
        match self {
            Self::FiniteSet { operators, .. } => Some(operators.len()),
            _ => None,
        }
    }

    pub fn label_of(&self, p: &ParamPoint) -> Option<&str> {
        match self {
            Self::FiniteSet { labels, .. } => labels.get(p.0.first()?.round() as usize).map(String::as_str),
            _ => None,
        }
    }

    pub fn check_point(&self, p: &ParamPoint) -> Result<()> {
        let ranges = self.ranges();
        if p.0.len() != ranges.len() {
            return Err(Error::Parameter(format!(
                "expected {} parameters, got {}",
                ranges.len(),
                p.0.len()
            )));
        }
        for (r, &x) in ranges.iter().zip(&p.0) {
            if !r.contains(x) {
                return Err(Error::OutOfRange {
                    name: r.name,
                    value: x,
                    range: r.describe(),
                });
            }
        }
        if self.is_finite() && (p.0[0] - p.0[0].round()).abs() > RANGE_SLACK {
            return Err(Error::Parameter(format!(
                "operator index {} is not an integer",
                p.0[0]
            )));
        }
        Ok(())
    }
}

/// Row-major entries of U(θ, φ, λ), unchecked.
pub(crate) fn u3_entries(theta: f64, phi: f64, lambda: f64) -> [C64; 4] {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = |x: f64| C64::from_polar(1.0, x);
    [e(phi) * co, e(-lambda) * s, -e(lambda) * s, e(-phi) * co]
}

fn u3(theta: f64, phi: f64, lambda: f64) -> UnitaryOperator {
    let [a, b, cc, d] = u3_entries(theta, phi, lambda);
    let m = ComplexMatrix::from_rows(&[vec![a, b], vec![cc, d]]).expect("finite 2x2 entries");
    UnitaryOperator::new(m).expect("closed-form SU(2) element")
}

/// The family's 2×2 matrix at `p`.
pub fn param_unitary(family: &StrategyFamily, p: &ParamPoint) -> Result<UnitaryOperator> {
    family.check_point(p)?;
    let v = &p.0;
    Ok(match family {
        StrategyFamily::OneParam => u3(v[0], 0.0, 0.0),
        StrategyFamily::TwoParam => u3(v[0], v[1], 0.0),
        StrategyFamily::ThreeParam => u3(v[0], v[1], v[2]),
        StrategyFamily::FiniteSet { operators, .. } => operators[v[0].round() as usize].clone(),
    })
}

/// Unitary realizing a classical strategy label within the family's context:
/// `C`/`D` for the parameterized families, the set's own labels otherwise.
pub fn classical_embedding(family: &StrategyFamily, label: &str) -> Result<UnitaryOperator> {
    match family {
        StrategyFamily::FiniteSet { labels, operators } => labels
            .iter()
            .position(|l| l == label)
            .map(|k| operators[k].clone())
            .ok_or_else(|| Error::UnknownName(format!("strategy {label:?} not in operator set"))),
        _ => {
            let theta = match label {
                "C" => 0.0,
                "D" => PI,
                other => {
                    return Err(Error::UnknownName(format!(
                        "classical strategy {other:?} (expected C or D)"
                    )))
                }
            };
            let mut v = vec![0.0; family.arity()];
            v[0] = theta;
            param_unitary(family, &ParamPoint(v))
        }
    }
}

/// Uniform grid, lexicographic with the first parameter slowest. Closed
/// ranges include both endpoints, periodic ones drop the right endpoint.
/// Finite sets enumerate every index regardless of `resolution`.
pub fn parameter_grid(family: &StrategyFamily, resolution: usize) -> Result<Vec<ParamPoint>> {
    if let Some(n) = family.operator_count() {
        return Ok((0..n).map(|k| ParamPoint(vec![k as f64])).collect());
    }
    if resolution < 2 {
        return Err(Error::Parameter(format!("grid resolution {resolution} < 2")));
    }
    let axes: Vec<Vec<f64>> = family
        .ranges()
        .iter()
        .map(|r| {
            let steps = if r.closed { resolution - 1 } else { resolution };
            let h = (r.hi - r.lo) / steps as f64;
            (0..resolution).map(|k| r.lo + h * k as f64).collect()
        })
        .collect();
    let total = resolution.pow(axes.len() as u32);
    Ok((0..total)
        .map(|mut idx| {
            let mut v = vec![0.0; axes.len()];
            for (d, axis) in axes.iter().enumerate().rev() {
                v[d] = axis[idx % resolution];
                idx /= resolution;
            }
            ParamPoint(v)
        })
        .collect())
}

/// Fixed operators referenced by name in game files and on the command line.
pub fn named_operator(name: &str) -> Result<UnitaryOperator> {
    let r = |x: f64| c(x, 0.0);
    let rows = match name {
        "I" | "N" | "UC" => vec![vec![r(1.0), r(0.0)], vec![r(0.0), r(1.0)]],
        "X" | "F" => vec![vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]],
        "UD" => vec![vec![r(0.0), r(1.0)], vec![r(-1.0), r(0.0)]],
        "UQ" => vec![vec![c(0.0, 1.0), r(0.0)], vec![r(0.0), c(0.0, -1.0)]],
        "UQstar" | "H" => vec![
            vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
            vec![r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
        ],
        other => return Err(Error::UnknownName(format!("operator {other:?}"))),
    };
    UnitaryOperator::from_rows(&rows)
}
