//! Halfspace and vertex descriptions of polytopes.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::dot;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// One linear row `coeffs . x >= rhs` (or `= rhs` among equalities).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl Row {
    pub fn new(coeffs: Vec<Rational>, rhs: Rational) -> Self {
        Row { coeffs, rhs }
    }

    /// `coeffs . x - rhs`.
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) - &self.rhs
    }

    pub fn slack_f64(&self, x: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(a, xi)| crate::scalar::rational_to_f64(a) * xi)
            .sum::<f64>()
            - crate::scalar::rational_to_f64(&self.rhs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Scales to coprime integer coefficients, preserving direction.
    pub fn normalized(&self) -> Row {
        let (coeffs, rhs) = primitive(&self.coeffs, &self.rhs);
        Row { coeffs, rhs }
    }
}

/// Scales `(coeffs, rhs)` by a positive factor to coprime integers.
pub(crate) fn primitive(coeffs: &[Rational], rhs: &Rational) -> (Vec<Rational>, Rational) {
    use num::integer::Integer;
    use num::BigInt;
    let mut lcm = BigInt::from(1);
    for q in coeffs.iter().chain(std::iter::once(rhs)) {
        lcm = lcm.lcm(q.denom());
    }
    let mut g = BigInt::from(0);
    let ints: Vec<BigInt> = coeffs
        .iter()
        .chain(std::iter::once(rhs))
        .map(|q| (q * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    for v in &ints {
        g = g.gcd(v);
    }
    if g.is_zero() {
        return (coeffs.to_vec(), rhs.clone());
    }
    let mut out: Vec<Rational> = ints
        .into_iter()
        .map(|v| Rational::from_integer(v / &g))
        .collect();
    let r = out.pop().expect("rhs present");
    (out, r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRep {
    dim: usize,
    inequalities: Vec<Row>,
    equalities: Vec<Row>,
}

impl HRep {
    pub fn new(dim: usize, inequalities: Vec<Row>, equalities: Vec<Row>) -> Result<Self> {
        for row in inequalities.iter().chain(&equalities) {
            if row.coeffs.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.coeffs.len(),
                });
            }
            if row.is_zero() {
                return Err(Error::InvalidPolytope("all-zero row".into()));
            }
        }
        Ok(HRep {
            dim,
            inequalities,
            equalities,
        })
    }

    /// Like [`HRep::new`] but silently drops all-zero rows that hold trivially
    /// and reports [`Error::EmptyPolytope`] for ones that cannot hold.
    pub fn new_pruned(dim: usize, inequalities: Vec<Row>, equalities: Vec<Row>) -> Result<Self> {
        let mut ineq = Vec::new();
        for row in inequalities {
            if row.is_zero() {
                if row.rhs.is_positive() {
                    return Err(Error::EmptyPolytope);
                }
            } else {
                ineq.push(row);
            }
        }
        let mut eq = Vec::new();
        for row in equalities {
            if row.is_zero() {
                if !row.rhs.is_zero() {
                    return Err(Error::EmptyPolytope);
                }
            } else {
                eq.push(row);
            }
        }
        HRep::new(dim, ineq, eq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inequalities(&self) -> &[Row] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[Row] {
        &self.equalities
    }

    /// Index of the first violated row, inequalities first.
    pub fn first_violation(&self, x: &[Rational]) -> Option<usize> {
        let ni = self.inequalities.len();
        self.inequalities
            .iter()
            .position(|r| r.slack(x).is_negative())
            .or_else(|| {
                self.equalities
                    .iter()
                    .position(|r| !r.slack(x).is_zero())
                    .map(|i| ni + i)
            })
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim && self.first_violation(x).is_none()
    }

    pub fn contains_f64(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim
            && self.inequalities.iter().all(|r| r.slack_f64(x) >= -tol)
            && self.equalities.iter().all(|r| r.slack_f64(x).abs() <= tol)
    }

    /// The same set with the given extra rows.
    pub fn with_rows(&self, inequalities: Vec<Row>, equalities: Vec<Row>) -> Result<HRep> {
        let mut ineq = self.inequalities.clone();
        ineq.extend(inequalities);
        let mut eq = self.equalities.clone();
        eq.extend(equalities);
        HRep::new(self.dim, ineq, eq)
    }

    pub fn to_json(&self) -> HRepFile {
        let conv = |rows: &[Row]| {
            rows.iter()
                .map(|r| RowFile {
                    coeffs: r.coeffs.iter().map(|q| q.to_string()).collect(),
                    rhs: r.rhs.to_string(),
                })
                .collect()
        };
        HRepFile {
            dim: self.dim,
            inequalities: conv(&self.inequalities),
            equalities: conv(&self.equalities),
        }
    }

    pub fn from_json(file: &HRepFile) -> Result<Self> {
        let conv = |rows: &[RowFile]| -> Result<Vec<Row>> {
            rows.iter()
                .map(|r| {
                    Ok(Row {
                        coeffs: r.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?,
                        rhs: parse_rational(&r.rhs)?,
                    })
                })
                .collect()
        };
        HRep::new(file.dim, conv(&file.inequalities)?, conv(&file.equalities)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFile {
    pub coeffs: Vec<String>,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRepFile {
    pub dim: usize,
    pub inequalities: Vec<RowFile>,
    #[serde(default)]
    pub equalities: Vec<RowFile>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VRep {
    dim: usize,
    vertices: Vec<Vec<Rational>>,
}

impl VRep {
    /// Builds a vertex list, dropping repeated points.
    pub fn new(dim: usize, points: Vec<Vec<Rational>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut vertices = Vec::new();
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if seen.insert(p.clone()) {
                vertices.push(p);
            }
        }
        Ok(VRep { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn to_json(&self) -> VRepFile {
        VRepFile {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|v| v.iter().map(|q| q.to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(file: &VRepFile) -> Result<Self> {
        let pts = file
            .vertices
            .iter()
            .map(|v| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        VRep::new(file.dim, pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VRepFile {
    pub dim: usize,
    pub vertices: Vec<Vec<String>>,
}
