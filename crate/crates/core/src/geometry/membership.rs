//! Convex-hull membership with local models or separating hyperplanes, and
//! polytope equality by mutual inclusion.

use num::{One, Signed, Zero};

use super::hrep::{HRep, Row, VRep};
use super::linalg::dot;
use super::lp::{lp_optimize, Direction, LpStatus};
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, rationalize, Rational, DEFAULT_DENOMINATOR_BOUND};

/// Convex weights over the vertices of a [`VRep`], by vertex index.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub weights: Vec<(usize, Rational)>,
}

impl LocalModel {
    pub fn point(&self, v: &VRep) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); v.dim()];
        for (k, w) in &self.weights {
            for (o, x) in out.iter_mut().zip(&v.vertices()[*k]) {
                if !x.is_zero() {
                    *o += w * x;
                }
            }
        }
        out
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().map(|(_, w)| w.clone()).sum()
    }
}

/// `coeffs . v >= rhs` on every vertex while the tested point violates it.
#[derive(Debug, Clone, PartialEq)]
pub struct Separation {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// `residual` is the largest coordinate deviation between the model's
    /// point and the tested point (zero for exact input).
    Member { model: LocalModel, residual: f64 },
    Refused(Separation),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

fn check_dim(point_len: usize, v: &VRep) -> Result<()> {
    if point_len != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: point_len,
        });
    }
    if v.is_empty() {
        return Err(Error::InvalidPolytope("no vertices".into()));
    }
    Ok(())
}

fn weights_from(lambda: &[Rational]) -> LocalModel {
    LocalModel {
        weights: lambda
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(k, w)| (k, w.clone()))
            .collect(),
    }
}

/// Exact membership of a rational point in the convex hull of `v`.
pub fn membership_lp(point: &[Rational], v: &VRep) -> Result<Membership> {
    check_dim(point.len(), v)?;
    let k = v.len();
    let inequalities = (0..k)
        .map(|i| {
            let mut c = vec![Rational::zero(); k];
            c[i] = Rational::one();
            Row::new(c, Rational::zero())
        })
        .collect();
    let mut equalities = Vec::new();
    for (j, pj) in point.iter().enumerate() {
        let c: Vec<Rational> = v.vertices().iter().map(|p| p[j].clone()).collect();
        if c.iter().all(Zero::is_zero) {
            if !pj.is_zero() {
                // No vertex reaches this coordinate.
                let mut coeffs = vec![Rational::zero(); v.dim()];
                coeffs[j] = if pj.is_positive() { -Rational::one() } else { Rational::one() };
                return Ok(Membership::Refused(Separation {
                    coeffs,
                    rhs: Rational::zero(),
                }));
            }
            continue;
        }
        equalities.push((j, Row::new(c, pj.clone())));
    }
    let h = HRep::new(
        k,
        inequalities,
        std::iter::once(Row::new(vec![Rational::one(); k], Rational::one()))
            .chain(equalities.iter().map(|(_, r)| r.clone()))
            .collect(),
    )?;
    let res = lp_optimize(&vec![Rational::zero(); k], &h, Direction::Min)?;
    match res.status {
        LpStatus::Optimal => Ok(Membership::Member {
            model: weights_from(&res.primal.expect("verified")),
            residual: 0.0,
        }),
        LpStatus::Infeasible => {
            let farkas = res.dual.expect("verified");
            // mu_0 on normalization, mu_j on coordinate rows.
            let mu0 = farkas.equality[0].clone();
            let mut coeffs = vec![Rational::zero(); v.dim()];
            for ((j, _), m) in equalities.iter().zip(&farkas.equality[1..]) {
                coeffs[*j] = -m.clone();
            }
            let sep = Separation { coeffs, rhs: mu0 };
            debug_assert!(v.vertices().iter().all(|p| dot(&sep.coeffs, p) >= sep.rhs));
            debug_assert!(dot(&sep.coeffs, point) < sep.rhs);
            Ok(Membership::Refused(sep))
        }
        LpStatus::Unbounded => unreachable!("zero objective"),
    }
}

/// Membership of a floating-point point: exact convex weights minimizing the
/// largest deviation from the rationalized point. Accepted when the
/// deviation from the original doubles is at most `tolerance`; otherwise the
/// exact test on the rationalized point supplies a separation.
pub fn membership_lp_f64(point: &[f64], v: &VRep, tolerance: f64) -> Result<Membership> {
    check_dim(point.len(), v)?;
    let target: Vec<Rational> = point
        .iter()
        .map(|&x| rationalize(x, DEFAULT_DENOMINATOR_BOUND))
        .collect();
    let k = v.len();
    // Variables: lambda_0..lambda_{k-1}, t.
    let n = k + 1;
    let mut inequalities = Vec::new();
    for i in 0..n {
        let mut c = vec![Rational::zero(); n];
        c[i] = Rational::one();
        inequalities.push(Row::new(c, Rational::zero()));
    }
    for (j, pj) in target.iter().enumerate() {
        let col: Vec<Rational> = v.vertices().iter().map(|p| p[j].clone()).collect();
        let mut up = col.clone();
        up.push(Rational::one());
        inequalities.push(Row::new(up, pj.clone()));
        let mut down: Vec<Rational> = col.iter().map(|x| -x).collect();
        down.push(Rational::one());
        inequalities.push(Row::new(down, -pj.clone()));
    }
    let mut norm = vec![Rational::one(); k];
    norm.push(Rational::zero());
    let h = HRep::new(n, inequalities, vec![Row::new(norm, Rational::one())])?;
    let mut objective = vec![Rational::zero(); n];
    objective[k] = Rational::one();
    let res = lp_optimize(&objective, &h, Direction::Min)?;
    let lambda = res.primal.expect("the residual problem is always feasible");
    let model = weights_from(&lambda[..k]);
    let reproduced = model.point(v);
    let residual = reproduced
        .iter()
        .zip(point)
        .map(|(q, &x)| (rational_to_f64(q) - x).abs())
        .fold(0.0, f64::max);
    if residual <= tolerance {
        return Ok(Membership::Member { model, residual });
    }
    match membership_lp(&target, v)? {
        Membership::Member { model, .. } => Ok(Membership::Member { model, residual }),
        refused => Ok(refused),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolytopeComparison {
    Equal,
    /// `witness` lies in the first polytope but not the second when
    /// `in_first`, and the other way round otherwise.
    Unequal { witness: Vec<Rational>, in_first: bool },
}

impl PolytopeComparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, PolytopeComparison::Equal)
    }
}

/// A point of `p` violating some row of `q`, if any.
pub fn inclusion_witness(p: &HRep, q: &HRep) -> Result<Option<Vec<Rational>>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let below = |row: &Row, dir: Direction| -> Result<Option<Vec<Rational>>> {
        let res = lp_optimize(&row.coeffs, p, dir)?;
        match res.status {
            LpStatus::Infeasible => Ok(None),
            LpStatus::Optimal => {
                let x = res.primal.expect("verified");
                let v = row.slack(&x);
                let bad = match dir {
                    Direction::Min => v.is_negative(),
                    Direction::Max => v.is_positive(),
                };
                Ok(bad.then_some(x))
            }
            LpStatus::Unbounded => {
                let x = res.primal.expect("verified");
                let r = res.ray.expect("verified");
                let step = dot(&row.coeffs, &r).abs();
                let t = row.slack(&x).abs() / step + Rational::one();
                Ok(Some(x.iter().zip(&r).map(|(a, b)| a + &t * b).collect()))
            }
        }
    };
    for row in q.inequalities() {
        if let Some(x) = below(row, Direction::Min)? {
            return Ok(Some(x));
        }
    }
    for row in q.equalities() {
        for dir in [Direction::Min, Direction::Max] {
            if let Some(x) = below(row, dir)? {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}

pub fn polytope_equal(p: &HRep, q: &HRep) -> Result<PolytopeComparison> {
    if let Some(w) = inclusion_witness(p, q)? {
        return Ok(PolytopeComparison::Unequal {
            witness: w,
            in_first: true,
        });
    }
    if let Some(w) = inclusion_witness(q, p)? {
        return Ok(PolytopeComparison::Unequal {
            witness: w,
            in_first: false,
        });
    }
    Ok(PolytopeComparison::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn row(c: &[i64], r: i64) -> Row {
        Row::new(c.iter().map(|&v| int(v)).collect(), int(r))
    }

    fn square() -> HRep {
        HRep::new(
            2,
            vec![row(&[1, 0], 0), row(&[0, 1], 0), row(&[-1, 0], -1), row(&[0, -1], -1)],
            vec![],
        )
        .unwrap()
    }

    fn triangle() -> HRep {
        HRep::new(2, vec![row(&[1, 0], 0), row(&[0, 1], 0), row(&[-1, -1], -1)], vec![]).unwrap()
    }

    #[test]
    fn square_and_triangle_differ() {
        match polytope_equal(&square(), &triangle()).unwrap() {
            PolytopeComparison::Unequal { witness, in_first } => {
                assert!(in_first);
                assert!(square().contains(&witness) && !triangle().contains(&witness));
            }
            PolytopeComparison::Equal => panic!("should differ"),
        }
        assert!(polytope_equal(&square(), &square()).unwrap().is_equal());
    }

    #[test]
    fn hull_membership_and_refusal() {
        let v = VRep::new(
            2,
            vec![vec![int(0), int(0)], vec![int(1), int(0)], vec![int(0), int(1)]],
        )
        .unwrap();
        match membership_lp(&[rat(1, 4), rat(1, 4)], &v).unwrap() {
            Membership::Member { model, .. } => {
                assert_eq!(model.point(&v), vec![rat(1, 4), rat(1, 4)]);
                assert_eq!(model.total_weight(), int(1));
            }
            _ => panic!("inside"),
        }
        match membership_lp(&[int(1), int(1)], &v).unwrap() {
            Membership::Refused(sep) => {
                assert!(v.vertices().iter().all(|p| dot(&sep.coeffs, p) >= sep.rhs));
                assert!(dot(&sep.coeffs, &[int(1), int(1)]) < sep.rhs);
            }
            _ => panic!("outside"),
        }
        assert!(membership_lp_f64(&[0.3, 0.3], &v, 1e-9).unwrap().is_member());
        assert!(!membership_lp_f64(&[0.6, 0.6], &v, 1e-9).unwrap().is_member());
    }
}
