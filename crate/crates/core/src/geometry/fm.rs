//! Fourier–Motzkin projection with exact redundancy removal.
//!
//! Equalities are used first to substitute out as many eliminated
//! coordinates as possible, pivoting on caller-preferred columns first and
//! then on the other eliminated columns from the highest index down. Which
//! coordinates survive substitution matters a lot for the row growth that
//! follows. The remaining coordinates are eliminated one at
//! a time in greedy order; after each step, rows are pruned by the history
//! rule (a combination of more than `k + 1` rows after `k` steps is never
//! needed) and then by an LP redundancy test. A row is dropped only when a
//! floating-point LP suggests it is implied and an exact LP on the suggested
//! support confirms it. Histories are reset after each LP pass so the
//! history rule is only applied relative to a complete description.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num::bigint::BigInt;
use num::integer::Integer;
use num::{Signed, ToPrimitive, Zero};

use super::hrep::{primitive, HRep, Row};
use super::linalg::{rank, rref};
use super::lp::feasible_point;
use super::simplex::{self, SimplexOutcome, StandardForm};
use crate::error::{Error, Result};
use crate::scalar::Rational;

pub const DEFAULT_ROW_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FmOptions {
    /// Largest number of rows allowed at any intermediate step.
    pub row_cap: usize,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions {
            row_cap: DEFAULT_ROW_CAP,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FmStats {
    pub eliminated_by_equalities: usize,
    pub eliminated_by_combination: usize,
    pub peak_rows: usize,
    pub lp_tests: usize,
    pub lp_removed: usize,
}

/// Integer row `coeffs . x >= rhs` with the set of rows it derives from.
#[derive(Clone)]
struct IRow {
    coeffs: Vec<BigInt>,
    rhs: BigInt,
    history: FixedBitSet,
}

fn to_integer_row(coeffs: &[Rational], rhs: &Rational) -> (Vec<BigInt>, BigInt) {
    let (c, r) = primitive(coeffs, rhs);
    (c.iter().map(|q| q.to_integer()).collect(), r.to_integer())
}

fn normalize(coeffs: &mut [BigInt], rhs: &mut BigInt) {
    let mut g = BigInt::zero();
    for v in coeffs.iter().chain(std::iter::once(&*rhs)) {
        if !v.is_zero() {
            g = g.gcd(v);
            if g == BigInt::from(1) {
                return;
            }
        }
    }
    if g.is_zero() || g == BigInt::from(1) {
        return;
    }
    for v in coeffs.iter_mut() {
        *v = &*v / &g;
    }
    *rhs = &*rhs / &g;
}

pub fn fm_project(h: &HRep, keep: &[usize]) -> Result<HRep> {
    fm_project_with(h, keep, FmOptions::default()).map(|(p, _)| p)
}

/// Projects `h` onto the coordinates `keep`, in that order.
pub fn fm_project_with(h: &HRep, keep: &[usize], options: FmOptions) -> Result<(HRep, FmStats)> {
    fm_project_preferring(h, keep, options, &[])
}

/// As [`fm_project_with`], substituting equalities on the columns listed in
/// `pivot_preference` before any others. A good choice leaves free the
/// coordinates that appear in few inequalities.
pub fn fm_project_preferring(
    h: &HRep,
    keep: &[usize],
    options: FmOptions,
    pivot_preference: &[usize],
) -> Result<(HRep, FmStats)> {
    let n = h.dim();
    if keep.iter().any(|&j| j >= n) {
        return Err(Error::InvalidPolytope("kept coordinate out of range".into()));
    }
    let mut is_kept = vec![false; n];
    for &j in keep {
        if is_kept[j] {
            return Err(Error::InvalidPolytope("kept coordinate listed twice".into()));
        }
        is_kept[j] = true;
    }
    if feasible_point(h)?.is_err() {
        return Err(Error::EmptyPolytope);
    }
    let mut stats = FmStats::default();

    // Row-reduce the equalities with eliminated columns first, preferred
    // ones leading, then the rest from the latest index down.
    let mut ineqs: Vec<Row> = h.inequalities().to_vec();
    let mut listed = vec![false; n];
    let preferred: Vec<usize> = pivot_preference
        .iter()
        .copied()
        .filter(|&j| j < n && !is_kept[j] && !std::mem::replace(&mut listed[j], true))
        .collect();
    let perm: Vec<usize> = preferred
        .iter()
        .copied()
        .chain((0..n).rev().filter(|&j| !is_kept[j] && !listed[j]))
        .chain(keep.iter().copied())
        .chain((0..n).filter(|&j| is_kept[j] && !keep.contains(&j)))
        .collect();
    let permuted: Vec<Vec<Rational>> = h
        .equalities()
        .iter()
        .map(|r| {
            let mut v: Vec<Rational> = perm.iter().map(|&j| r.coeffs[j].clone()).collect();
            v.push(r.rhs.clone());
            v
        })
        .collect();
    let eq_rref = rref(permuted);
    if eq_rref.pivots.last() == Some(&n) {
        return Err(Error::EmptyPolytope);
    }
    let mut kept_eqs: Vec<Row> = Vec::new();
    for (prow, &pc) in eq_rref.rows.iter().zip(&eq_rref.pivots) {
        let mut coeffs = vec![Rational::zero(); n];
        for (k, &j) in perm.iter().enumerate() {
            coeffs[j] = prow[k].clone();
        }
        let eq = Row::new(coeffs, prow[n].clone());
        let j = perm[pc];
        if is_kept[j] {
            kept_eqs.push(eq);
            continue;
        }
        stats.eliminated_by_equalities += 1;
        for row in ineqs.iter_mut() {
            if row.coeffs[j].is_zero() {
                continue;
            }
            let f = row.coeffs[j].clone();
            for (a, e) in row.coeffs.iter_mut().zip(&eq.coeffs) {
                if !e.is_zero() {
                    *a -= &f * e;
                }
            }
            row.rhs -= &f * &eq.rhs;
        }
    }

    // Express dependent kept coordinates through free kept ones.
    let kept_matrix: Vec<Vec<Rational>> = kept_eqs
        .iter()
        .map(|r| {
            let mut v = r.coeffs.clone();
            v.push(r.rhs.clone());
            v
        })
        .collect();
    let reduced = rref(kept_matrix);
    if reduced.pivots.last() == Some(&n) {
        return Err(Error::EmptyPolytope);
    }
    let mut dependent = vec![false; n];
    for &p in &reduced.pivots {
        dependent[p] = true;
    }
    for (row, &p) in reduced.rows.iter().zip(&reduced.pivots) {
        for ineq in ineqs.iter_mut() {
            if ineq.coeffs[p].is_zero() {
                continue;
            }
            let f = ineq.coeffs[p].clone();
            for (a, e) in ineq.coeffs.iter_mut().zip(&row[..n]) {
                if !e.is_zero() {
                    *a -= &f * e;
                }
            }
            ineq.rhs -= &f * &row[n];
        }
    }

    // Working coordinates: free kept ones, then the ones left to eliminate.
    let free_kept: Vec<usize> = keep.iter().copied().filter(|&j| !dependent[j]).collect();
    let mut to_elim: Vec<usize> = (0..n)
        .filter(|&j| !is_kept[j] && ineqs.iter().any(|r| !r.coeffs[j].is_zero()))
        .collect();
    let mut work: Vec<usize> = free_kept.clone();
    work.extend(&to_elim);
    let col_of: HashMap<usize, usize> = work.iter().enumerate().map(|(c, &j)| (j, c)).collect();

    let mut rows: Vec<IRow> = Vec::new();
    for r in &ineqs {
        let restricted: Vec<Rational> = work.iter().map(|&j| r.coeffs[j].clone()).collect();
        debug_assert!((0..n).all(|j| col_of.contains_key(&j) || r.coeffs[j].is_zero()));
        let (coeffs, rhs) = to_integer_row(&restricted, &r.rhs);
        rows.push(IRow {
            coeffs,
            rhs,
            history: FixedBitSet::new(),
        });
    }
    rows = clean(rows)?.0;
    let mut origin = reset_histories(&mut rows);
    let mut eliminated_since_reset: Vec<usize> = Vec::new();
    stats.peak_rows = rows.len();

    while !to_elim.is_empty() {
        let pick = to_elim
            .iter()
            .enumerate()
            .min_by_key(|(_, &j)| {
                let c = col_of[&j];
                let p = rows.iter().filter(|r| r.coeffs[c].is_positive()).count();
                let q = rows.iter().filter(|r| r.coeffs[c].is_negative()).count();
                (p * q) as i64 - (p + q) as i64
            })
            .map(|(i, _)| i)
            .expect("nonempty");
        let var = to_elim.swap_remove(pick);
        let c = col_of[&var];
        let (pos, rest): (Vec<IRow>, Vec<IRow>) = rows.into_iter().partition(|r| r.coeffs[c].is_positive());
        let (neg, zero): (Vec<IRow>, Vec<IRow>) = rest.into_iter().partition(|r| r.coeffs[c].is_negative());
        eliminated_since_reset.push(c);
        let k = eliminated_since_reset.len();
        let mut next = zero;
        for p in &pos {
            for q in &neg {
                let mut hist = p.history.clone();
                hist.union_with(&q.history);
                let size = hist.count_ones(..);
                if size > k + 1 || !is_extreme(&hist, size, &origin, &eliminated_since_reset) {
                    continue;
                }
                let fp = -&q.coeffs[c];
                let fq = &p.coeffs[c];
                let mut coeffs: Vec<BigInt> = p
                    .coeffs
                    .iter()
                    .zip(&q.coeffs)
                    .map(|(a, b)| &fp * a + fq * b)
                    .collect();
                coeffs[c] = BigInt::zero();
                let mut rhs = &fp * &p.rhs + fq * &q.rhs;
                normalize(&mut coeffs, &mut rhs);
                next.push(IRow {
                    coeffs,
                    rhs,
                    history: hist,
                });
                if next.len() > options.row_cap {
                    return Err(Error::SizeGuard(format!(
                        "more than {} rows after eliminating {} coordinates",
                        options.row_cap,
                        stats.eliminated_by_combination + 1
                    )));
                }
            }
        }
        stats.eliminated_by_combination += 1;
        rows = drop_trivial(next)?;
        stats.peak_rows = stats.peak_rows.max(rows.len());
        let before = rows.len();
        let (cleaned, lossy) = clean(rows)?;
        rows = lp_prune(cleaned, &mut stats);
        if lossy || rows.len() < before {
            origin = reset_histories(&mut rows);
            eliminated_since_reset.clear();
        }
    }
    if stats.eliminated_by_combination == 0 {
        rows = lp_prune(rows, &mut stats);
    }

    // Back to the kept coordinate order.
    let pos_in_keep: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    let out_dim = keep.len();
    let mut inequalities = Vec::new();
    for r in rows {
        let mut coeffs = vec![Rational::zero(); out_dim];
        for (cidx, &j) in free_kept.iter().enumerate() {
            coeffs[pos_in_keep[&j]] = Rational::from_integer(r.coeffs[cidx].clone());
        }
        inequalities.push(Row::new(coeffs, Rational::from_integer(r.rhs)));
    }
    let equalities = reduced
        .rows
        .iter()
        .map(|row| {
            let coeffs: Vec<Rational> = keep.iter().map(|&j| row[j].clone()).collect();
            let (c, r) = primitive(&coeffs, &row[n]);
            Row::new(c, r)
        })
        .collect();
    let out = HRep::new_pruned(out_dim, inequalities, equalities)?;
    Ok((out, stats))
}

/// Makes the current rows the new origin of all histories and returns them.
fn reset_histories(rows: &mut [IRow]) -> Vec<Vec<BigInt>> {
    let m = rows.len();
    for (i, r) in rows.iter_mut().enumerate() {
        let mut h = FixedBitSet::with_capacity(m);
        h.insert(i);
        r.history = h;
    }
    rows.iter().map(|r| r.coeffs.clone()).collect()
}

/// Whether a combination of the origin rows in `hist` is an extreme ray of
/// the cone of multipliers cancelling the eliminated columns: the rows,
/// restricted to those columns, must have rank `|hist| - 1`.
fn is_extreme(hist: &FixedBitSet, size: usize, origin: &[Vec<BigInt>], eliminated: &[usize]) -> bool {
    if size <= 2 {
        return true;
    }
    let m: Vec<Vec<Rational>> = hist
        .ones()
        .map(|i| {
            eliminated
                .iter()
                .map(|&c| Rational::from_integer(origin[i][c].clone()))
                .collect()
        })
        .collect();
    rank(&m) == size - 1
}

/// Drops rows with no coefficients that hold trivially; fails on ones that
/// cannot hold.
fn drop_trivial(rows: Vec<IRow>) -> Result<Vec<IRow>> {
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        if r.coeffs.iter().all(Zero::is_zero) {
            if r.rhs.is_positive() {
                return Err(Error::EmptyPolytope);
            }
        } else {
            out.push(r);
        }
    }
    Ok(out)
}

/// Drops trivially true rows, detects trivially false ones, and keeps only
/// the strongest row among those with equal coefficients. The flag reports
/// whether a dropped row differed from its survivor in anything but being an
/// exact copy, which invalidates the history rule until the next reset.
fn clean(rows: Vec<IRow>) -> Result<(Vec<IRow>, bool)> {
    let mut best: HashMap<Vec<BigInt>, usize> = HashMap::new();
    let mut out: Vec<IRow> = Vec::new();
    let mut lossy = false;
    for r in rows {
        if r.coeffs.iter().all(Zero::is_zero) {
            if r.rhs.is_positive() {
                return Err(Error::EmptyPolytope);
            }
            continue;
        }
        match best.get(&r.coeffs) {
            Some(&k) => {
                let cur = &out[k];
                if r.rhs != cur.rhs || r.history != cur.history {
                    lossy = true;
                }
                if r.rhs > cur.rhs || (r.rhs == cur.rhs && r.history.count_ones(..) < cur.history.count_ones(..)) {
                    out[k] = r;
                }
            }
            None => {
                best.insert(r.coeffs.clone(), out.len());
                out.push(r);
            }
        }
    }
    Ok((out, lossy))
}

fn big_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Removes rows implied by the others. Each removal is certified by an
/// exact nonnegative combination of remaining rows.
fn lp_prune(rows: Vec<IRow>, stats: &mut FmStats) -> Vec<IRow> {
    if rows.len() <= 1 {
        return rows;
    }
    let dim = rows[0].coeffs.len();
    let fl: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|r| {
            let scale = r
                .coeffs
                .iter()
                .chain(std::iter::once(&r.rhs))
                .map(|v| big_to_f64(v).abs())
                .fold(0.0, f64::max)
                .max(1.0);
            (
                r.coeffs.iter().map(|v| big_to_f64(v) / scale).collect(),
                big_to_f64(&r.rhs) / scale,
            )
        })
        .collect();
    let mut alive = vec![true; rows.len()];
    for i in (0..rows.len()).rev() {
        let others: Vec<usize> = (0..rows.len()).filter(|&k| k != i && alive[k]).collect();
        if others.is_empty() {
            break;
        }
        stats.lp_tests += 1;
        let Some(support) = float_implied(&fl, i, &others, dim) else {
            continue;
        };
        if exact_implied(&rows, i, &support) {
            alive[i] = false;
            stats.lp_removed += 1;
        }
    }
    rows.into_iter()
        .zip(alive)
        .filter_map(|(r, a)| a.then_some(r))
        .collect()
}

/// Farkas test in floating point: is row `i` a nonnegative combination of
/// `others` with at least its right-hand side? Returns the support found.
fn float_implied(fl: &[(Vec<f64>, f64)], i: usize, others: &[usize], dim: usize) -> Option<Vec<usize>> {
    let (target, target_rhs) = &fl[i];
    let mut matrix = Vec::with_capacity(dim);
    let mut rhs = Vec::with_capacity(dim);
    for (k, &t) in target.iter().enumerate().take(dim) {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        matrix.push(others.iter().map(|&j| sign * fl[j].0[k]).collect::<Vec<f64>>());
        rhs.push(sign * t);
    }
    let cost: Vec<f64> = others.iter().map(|&j| -fl[j].1).collect();
    let problem = StandardForm {
        matrix,
        rhs,
        cost,
        initial_basis: vec![None; dim],
    };
    match simplex::solve(problem) {
        SimplexOutcome::Optimal { z, value, .. } if -value >= target_rhs - 1e-7 => Some(
            z.iter()
                .enumerate()
                .filter(|(_, v)| **v > 1e-12)
                .map(|(k, _)| others[k])
                .collect(),
        ),
        SimplexOutcome::Unbounded { .. } => None,
        _ => None,
    }
}

fn exact_implied(rows: &[IRow], i: usize, support: &[usize]) -> bool {
    let target = &rows[i];
    let dim = target.coeffs.len();
    let mut matrix = Vec::with_capacity(dim);
    let mut rhs = Vec::with_capacity(dim);
    for k in 0..dim {
        let negate = target.coeffs[k].is_negative();
        let s = |v: &BigInt| {
            let q = Rational::from_integer(v.clone());
            if negate {
                -q
            } else {
                q
            }
        };
        matrix.push(support.iter().map(|&j| s(&rows[j].coeffs[k])).collect::<Vec<_>>());
        rhs.push(s(&target.coeffs[k]));
    }
    let cost: Vec<Rational> = support
        .iter()
        .map(|&j| -Rational::from_integer(rows[j].rhs.clone()))
        .collect();
    let problem = StandardForm {
        matrix,
        rhs,
        cost,
        initial_basis: vec![None; dim],
    };
    match simplex::solve(problem) {
        SimplexOutcome::Optimal { z, .. } => {
            // Re-check the combination directly.
            let mut lhs = Rational::zero();
            let mut acc = vec![Rational::zero(); dim];
            for (w, &j) in z.iter().zip(support) {
                if w.is_zero() {
                    continue;
                }
                for (a, v) in acc.iter_mut().zip(&rows[j].coeffs) {
                    *a += w * Rational::from_integer(v.clone());
                }
                lhs += w * Rational::from_integer(rows[j].rhs.clone());
            }
            acc.iter()
                .zip(&target.coeffs)
                .all(|(a, t)| *a == Rational::from_integer(t.clone()))
                && lhs >= Rational::from_integer(target.rhs.clone())
        }
        _ => false,
    }
}

/// Points of `h` projected onto `keep`, for tests and diagnostics.
pub fn project_point(x: &[Rational], keep: &[usize]) -> Vec<Rational> {
    keep.iter().map(|&j| x[j].clone()).collect()
}

/// Whether `y` (over `keep`) extends to a point of `h`: LP feasibility of
/// `h` with the kept coordinates fixed.
pub fn lifts(h: &HRep, keep: &[usize], y: &[Rational]) -> Result<bool> {
    let n = h.dim();
    let mut eqs = Vec::new();
    for (&j, v) in keep.iter().zip(y) {
        let mut c = vec![Rational::zero(); n];
        c[j] = Rational::from_integer(1.into());
        eqs.push(Row::new(c, v.clone()));
    }
    let fixed = h.with_rows(Vec::new(), eqs)?;
    Ok(feasible_point(&fixed)?.is_ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn row(c: &[i64], r: i64) -> Row {
        Row::new(c.iter().map(|&v| int(v)).collect(), int(r))
    }

    fn cube(d: usize) -> HRep {
        let mut rows = Vec::new();
        for i in 0..d {
            let mut lo = vec![0; d];
            lo[i] = 1;
            rows.push(row(&lo, 0));
            let mut hi = vec![0; d];
            hi[i] = -1;
            rows.push(row(&hi, -1));
        }
        HRep::new(d, rows, vec![]).unwrap()
    }

    #[test]
    fn square_to_interval() {
        let p = fm_project(&cube(2), &[0]).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.inequalities().len(), 2);
        assert!(p.contains(&[int(0)]) && p.contains(&[int(1)]));
        assert!(!p.contains(&[rat(-1, 10)]) && !p.contains(&[rat(11, 10)]));
    }

    #[test]
    fn cube_to_square() {
        let p = fm_project(&cube(3), &[2, 0]).unwrap();
        assert_eq!(p.inequalities().len(), 4);
        assert!(p.contains(&[int(1), int(0)]));
    }

    #[test]
    fn triangle_shadow() {
        // x, y >= 0, x + y <= 1, keep y
        let h = HRep::new(2, vec![row(&[1, 0], 0), row(&[0, 1], 0), row(&[-1, -1], -1)], vec![]).unwrap();
        let p = fm_project(&h, &[1]).unwrap();
        assert_eq!(p.inequalities().len(), 2);
        assert!(p.contains(&[int(1)]) && !p.contains(&[rat(3, 2)]));
    }

    #[test]
    fn equalities_are_used_and_kept() {
        // x + y = 1, z = x, all >= 0; keep (y, z)
        let h = HRep::new(
            3,
            vec![row(&[1, 0, 0], 0), row(&[0, 1, 0], 0), row(&[0, 0, 1], 0)],
            vec![row(&[1, 1, 0], 1), row(&[1, 0, -1], 0)],
        )
        .unwrap();
        let p = fm_project(&h, &[1, 2]).unwrap();
        assert_eq!(p.equalities().len(), 1);
        assert!(p.contains(&[rat(1, 3), rat(2, 3)]));
        assert!(!p.contains(&[rat(1, 3), rat(1, 3)]));
    }

    #[test]
    fn empty_input_is_reported() {
        let h = HRep::new(1, vec![row(&[1], 1), row(&[-1], 0)], vec![]).unwrap();
        assert!(matches!(fm_project(&h, &[0]), Err(Error::EmptyPolytope)));
    }

    #[test]
    fn row_cap_is_enforced() {
        let opts = FmOptions { row_cap: 1 };
        assert!(matches!(fm_project_with(&cube(2), &[0], opts), Err(Error::SizeGuard(_))));
    }
}
