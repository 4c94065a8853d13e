//! Exact linear programming over an [`HRep`] with checked certificates.
//!
//! Every result carries a certificate that is re-verified in rational
//! arithmetic before it is returned:
//!
//! * optimal: a primal point and multipliers `y >= 0`, `mu` with
//!   `A^T y + E^T mu = c'` and `b.y + d.mu = c'.x`, where `c' = c` when
//!   minimizing and `-c` when maximizing;
//! * infeasible: `y >= 0`, `mu` with `A^T y + E^T mu = 0` and `b.y + d.mu > 0`;
//! * unbounded: a feasible point and a direction `r` with `A r >= 0`,
//!   `E r = 0`, `c'.r < 0`.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::hrep::HRep;
use super::linalg::dot;
use super::simplex::{self, SimplexOutcome, StandardForm};
use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

/// Multipliers for the inequality and equality rows of an [`HRep`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub inequality: Vec<Rational>,
    pub equality: Vec<Rational>,
}

impl DualCertificate {
    /// `A^T y + E^T mu`.
    pub fn combination(&self, h: &HRep) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); h.dim()];
        let rows = h.inequalities().iter().zip(&self.inequality);
        let eqs = h.equalities().iter().zip(&self.equality);
        for (row, w) in rows.chain(eqs) {
            if w.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&row.coeffs) {
                if !a.is_zero() {
                    *o += w * a;
                }
            }
        }
        out
    }

    /// `b.y + d.mu`.
    pub fn bound(&self, h: &HRep) -> Rational {
        let rows = h.inequalities().iter().zip(&self.inequality);
        let eqs = h.equalities().iter().zip(&self.equality);
        rows.chain(eqs)
            .filter(|(_, w)| !w.is_zero())
            .fold(Rational::zero(), |acc, (row, w)| acc + w * &row.rhs)
    }
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub direction: Direction,
    /// Optimal objective value in the requested direction.
    pub optimum: Option<Rational>,
    /// Optimal point, or a feasible point for unbounded problems.
    pub primal: Option<Vec<Rational>>,
    /// Dual certificate for optimal problems, Farkas certificate for
    /// infeasible ones.
    pub dual: Option<DualCertificate>,
    pub ray: Option<Vec<Rational>>,
}

impl LpResult {
    /// Re-checks the attached certificate against `objective` and `h`.
    pub fn verify(&self, objective: &[Rational], h: &HRep) -> Result<()> {
        let fail = |m: &str| Err(Error::Certificate(m.to_string()));
        let c = signed_objective(objective, self.direction);
        match self.status {
            LpStatus::Optimal => {
                let (Some(x), Some(dual), Some(opt)) = (&self.primal, &self.dual, &self.optimum) else {
                    return fail("missing optimal certificate");
                };
                if !h.contains(x) {
                    return fail("primal point violates a row");
                }
                if dual.inequality.iter().any(Signed::is_negative) {
                    return fail("negative inequality multiplier");
                }
                if dual.combination(h) != c {
                    return fail("dual combination differs from objective");
                }
                let value = dot(objective, x);
                if &value != opt {
                    return fail("reported optimum differs from primal value");
                }
                if dual.bound(h) != dot(&c, x) {
                    return fail("duality gap is nonzero");
                }
                Ok(())
            }
            LpStatus::Infeasible => {
                let Some(dual) = &self.dual else {
                    return fail("missing Farkas certificate");
                };
                if dual.inequality.iter().any(Signed::is_negative) {
                    return fail("negative Farkas multiplier");
                }
                if dual.combination(h).iter().any(|v| !v.is_zero()) {
                    return fail("Farkas combination is not zero");
                }
                if !dual.bound(h).is_positive() {
                    return fail("Farkas bound is not positive");
                }
                Ok(())
            }
            LpStatus::Unbounded => {
                let (Some(x), Some(r)) = (&self.primal, &self.ray) else {
                    return fail("missing unbounded certificate");
                };
                if !h.contains(x) {
                    return fail("unbounded base point infeasible");
                }
                if h.inequalities().iter().any(|row| dot(&row.coeffs, r).is_negative())
                    || h.equalities().iter().any(|row| !dot(&row.coeffs, r).is_zero())
                {
                    return fail("ray leaves the polyhedron");
                }
                if !dot(&c, r).is_negative() {
                    return fail("ray does not improve the objective");
                }
                Ok(())
            }
        }
    }
}

fn signed_objective(objective: &[Rational], dir: Direction) -> Vec<Rational> {
    match dir {
        Direction::Min => objective.to_vec(),
        Direction::Max => objective.iter().map(|v| -v).collect(),
    }
}

/// How each original coordinate is represented by nonnegative columns.
enum VarMap {
    /// `x_j = lower + z_col`; `row` is the inequality supplying the bound.
    Shifted { col: usize, lower: Rational, row: usize },
    /// `x_j = z_pos - z_neg`.
    Split { pos: usize, neg: usize },
}

enum RowKind {
    Inequality(usize),
    Equality(usize),
}

struct Standardized {
    vars: Vec<VarMap>,
    rows: Vec<(RowKind, bool)>,
    bound_rows: Vec<bool>,
}

fn standardize(c: &[Rational], h: &HRep) -> (StandardForm<Rational>, Standardized) {
    let n = h.dim();
    let ineq = h.inequalities();
    let mut best: Vec<Option<(usize, Rational)>> = vec![None; n];
    for (i, row) in ineq.iter().enumerate() {
        let mut nz = row.coeffs.iter().enumerate().filter(|(_, a)| !a.is_zero());
        let (Some((j, a)), None) = (nz.next(), nz.next()) else {
            continue;
        };
        if !a.is_positive() {
            continue;
        }
        let lower = &row.rhs / a;
        if best[j].as_ref().is_none_or(|(_, l)| lower > *l) {
            best[j] = Some((i, lower));
        }
    }
    let mut bound_rows = vec![false; ineq.len()];
    let mut vars = Vec::with_capacity(n);
    let mut ncols = 0;
    for b in best {
        match b {
            Some((row, lower)) => {
                bound_rows[row] = true;
                vars.push(VarMap::Shifted { col: ncols, lower, row });
                ncols += 1;
            }
            None => {
                vars.push(VarMap::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }
    let lower_point: Vec<Rational> = vars
        .iter()
        .map(|v| match v {
            VarMap::Shifted { lower, .. } => lower.clone(),
            VarMap::Split { .. } => Rational::zero(),
        })
        .collect();
    let slack_start = ncols;
    let general: Vec<usize> = (0..ineq.len()).filter(|&i| !bound_rows[i]).collect();
    ncols += general.len();

    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    let mut initial_basis = Vec::new();
    let mut rows = Vec::new();
    let expand = |coeffs: &[Rational], sign: &Rational, out: &mut Vec<Rational>| {
        for (a, v) in coeffs.iter().zip(&vars) {
            if a.is_zero() {
                continue;
            }
            match v {
                VarMap::Shifted { col, .. } => out[*col] = a * sign,
                VarMap::Split { pos, neg } => {
                    out[*pos] = a * sign;
                    out[*neg] = -(a * sign);
                }
            }
        }
    };
    for (k, &i) in general.iter().enumerate() {
        let row = &ineq[i];
        let shifted = &row.rhs - dot(&row.coeffs, &lower_point);
        let negate = !shifted.is_positive();
        let sign = if negate { -Rational::one() } else { Rational::one() };
        let mut r = vec![Rational::zero(); ncols];
        expand(&row.coeffs, &sign, &mut r);
        r[slack_start + k] = -sign.clone();
        matrix.push(r);
        rhs.push(shifted * &sign);
        initial_basis.push(if negate { Some(slack_start + k) } else { None });
        rows.push((RowKind::Inequality(i), negate));
    }
    for (i, row) in h.equalities().iter().enumerate() {
        let shifted = &row.rhs - dot(&row.coeffs, &lower_point);
        let negate = shifted.is_negative();
        let sign = if negate { -Rational::one() } else { Rational::one() };
        let mut r = vec![Rational::zero(); ncols];
        expand(&row.coeffs, &sign, &mut r);
        matrix.push(r);
        rhs.push(shifted * &sign);
        initial_basis.push(None);
        rows.push((RowKind::Equality(i), negate));
    }
    let mut cost = vec![Rational::zero(); ncols];
    expand(c, &Rational::one(), &mut cost);
    let form = StandardForm {
        matrix,
        rhs,
        cost,
        initial_basis,
    };
    (
        form,
        Standardized {
            vars,
            rows,
            bound_rows,
        },
    )
}

impl Standardized {
    fn point(&self, z: &[Rational]) -> Vec<Rational> {
        self.vars
            .iter()
            .map(|v| match v {
                VarMap::Shifted { col, lower, .. } => lower + &z[*col],
                VarMap::Split { pos, neg } => &z[*pos] - &z[*neg],
            })
            .collect()
    }

    fn direction(&self, z: &[Rational]) -> Vec<Rational> {
        self.vars
            .iter()
            .map(|v| match v {
                VarMap::Shifted { col, .. } => z[*col].clone(),
                VarMap::Split { pos, neg } => &z[*pos] - &z[*neg],
            })
            .collect()
    }

    /// Maps standard-form row multipliers back to the original rows and
    /// assigns bound-row multipliers so that `A^T y + E^T mu = target`.
    fn certificate(&self, h: &HRep, pi: &[Rational], target: &[Rational]) -> DualCertificate {
        let mut y = vec![Rational::zero(); h.inequalities().len()];
        let mut mu = vec![Rational::zero(); h.equalities().len()];
        for ((kind, negate), p) in self.rows.iter().zip(pi) {
            let v = if *negate { -p } else { p.clone() };
            match kind {
                RowKind::Inequality(i) => y[*i] = v,
                RowKind::Equality(i) => mu[*i] = v,
            }
        }
        let partial = DualCertificate {
            inequality: y.clone(),
            equality: mu.clone(),
        }
        .combination(h);
        for (j, v) in self.vars.iter().enumerate() {
            if let VarMap::Shifted { row, .. } = v {
                let a = &h.inequalities()[*row].coeffs[j];
                y[*row] = (&target[j] - &partial[j]) / a;
            }
        }
        debug_assert_eq!(self.bound_rows.len(), y.len());
        DualCertificate {
            inequality: y,
            equality: mu,
        }
    }
}

/// Optimizes `objective . x` over `h`. Errors only on a dimension mismatch
/// or if a certificate fails its own check.
pub fn lp_optimize(objective: &[Rational], h: &HRep, direction: Direction) -> Result<LpResult> {
    if objective.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: objective.len(),
        });
    }
    let c = signed_objective(objective, direction);
    let (form, std) = standardize(&c, h);
    let result = match simplex::solve(form) {
        SimplexOutcome::Optimal { z, duals, .. } => {
            let x = std.point(&z);
            LpResult {
                status: LpStatus::Optimal,
                direction,
                optimum: Some(dot(objective, &x)),
                primal: Some(x),
                dual: Some(std.certificate(h, &duals, &c)),
                ray: None,
            }
        }
        SimplexOutcome::Infeasible { duals } => LpResult {
            status: LpStatus::Infeasible,
            direction,
            optimum: None,
            primal: None,
            dual: Some(std.certificate(h, &duals, &vec![Rational::zero(); h.dim()])),
            ray: None,
        },
        SimplexOutcome::Unbounded { ray } => {
            let zero = vec![Rational::zero(); h.dim()];
            let base = lp_optimize(&zero, h, Direction::Min)?
                .primal
                .ok_or_else(|| Error::Certificate("unbounded problem without feasible point".into()))?;
            LpResult {
                status: LpStatus::Unbounded,
                direction,
                optimum: None,
                primal: Some(base),
                dual: None,
                ray: Some(std.direction(&ray)),
            }
        }
        SimplexOutcome::IterationLimit => unreachable!("exact simplex has no iteration cap"),
    };
    result.verify(objective, h)?;
    Ok(result)
}

/// A feasible point, or a Farkas certificate of emptiness.
pub fn feasible_point(h: &HRep) -> Result<std::result::Result<Vec<Rational>, DualCertificate>> {
    let zero = vec![Rational::zero(); h.dim()];
    let res = lp_optimize(&zero, h, Direction::Min)?;
    Ok(match res.status {
        LpStatus::Infeasible => Err(res.dual.expect("verified")),
        _ => Ok(res.primal.expect("verified")),
    })
}
