//! Double description: extreme rays of pointed cones, and from them facet and
//! vertex enumeration for polytopes.

use fixedbitset::FixedBitSet;
use num::{BigInt, Integer, One, Signed, Zero};

use super::hrep::{primitive, HRep, Row, VRep};
use super::linalg::{dot, nullspace, rref, solve};
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Intermediate ray count beyond which enumeration gives up.
pub const DD_RAY_LIMIT: usize = 100_000;

struct Ray {
    v: Vec<BigInt>,
    tight: FixedBitSet,
}

fn to_integers(v: &[Rational]) -> Vec<BigInt> {
    let (p, _) = primitive(v, &Rational::zero());
    p.iter().map(|q| q.to_integer()).collect()
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Extreme rays of `{z : rows . z >= 0}`. The rows must have full column
/// rank, so that the cone is pointed.
pub fn extreme_rays(rows: &[Vec<Rational>], dim: usize) -> Result<Vec<Vec<Rational>>> {
    if dim == 0 {
        return Ok(Vec::new());
    }
    // Pick `dim` independent rows greedily.
    let mut basis_rows: Vec<usize> = Vec::new();
    let mut acc: Vec<Vec<Rational>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut trial = acc.clone();
        trial.push(r.clone());
        let reduced = rref(trial);
        if reduced.rank() > acc.len() {
            acc = reduced.rows;
            basis_rows.push(i);
            if basis_rows.len() == dim {
                break;
            }
        }
    }
    if basis_rows.len() < dim {
        return Err(Error::InvalidPolytope("cone is not pointed".into()));
    }
    let h0: Vec<Vec<Rational>> = basis_rows.iter().map(|&i| rows[i].clone()).collect();
    let irows: Vec<Vec<BigInt>> = rows.iter().map(|r| to_integers(r)).collect();
    let m = rows.len();
    let mut rays: Vec<Ray> = Vec::new();
    for k in 0..dim {
        let mut e = vec![Rational::zero(); dim];
        e[k] = Rational::one();
        let v = solve(&h0, &e).expect("basis rows are invertible");
        let mut tight = FixedBitSet::with_capacity(m);
        for (kk, &i) in basis_rows.iter().enumerate() {
            if kk != k {
                tight.insert(i);
            }
        }
        rays.push(Ray {
            v: to_integers(&v),
            tight,
        });
    }
    let mut processed = FixedBitSet::with_capacity(m);
    for &i in &basis_rows {
        processed.insert(i);
    }

    // Greedy order: next is the row whose cut creates the fewest rays.
    loop {
        let mut best: Option<(i64, usize, Vec<BigInt>)> = None;
        for (i, row) in irows.iter().enumerate() {
            if processed.contains(i) {
                continue;
            }
            let vals: Vec<BigInt> = rays.iter().map(|r| idot(row, &r.v)).collect();
            let p = vals.iter().filter(|v| v.is_positive()).count() as i64;
            let n = vals.iter().filter(|v| v.is_negative()).count() as i64;
            let score = p * n - n;
            if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                best = Some((score, i, vals));
            }
        }
        let Some((_, i, vals)) = best else {
            break;
        };
        processed.insert(i);
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        for (k, val) in vals.iter().enumerate() {
            if val.is_zero() {
                rays[k].tight.insert(i);
            }
        }
        if neg.is_empty() {
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let mut common = rays[p].tight.clone();
                common.intersect_with(&rays[n].tight);
                if common.count_ones(..) + 2 < dim {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|k| k == p || k == n || !common.is_subset(&rays[k].tight));
                if !adjacent {
                    continue;
                }
                let mut v: Vec<BigInt> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| &vals[p] * a - &vals[n] * b)
                    .collect();
                make_primitive(&mut v);
                let mut tight = common;
                tight.insert(i);
                fresh.push(Ray { v, tight });
            }
        }
        let mut keep_flags = vec![true; rays.len()];
        for &n in &neg {
            keep_flags[n] = false;
        }
        let mut next: Vec<Ray> = rays
            .into_iter()
            .zip(keep_flags)
            .filter_map(|(r, k)| k.then_some(r))
            .collect();
        next.extend(fresh);
        if next.len() > DD_RAY_LIMIT {
            return Err(Error::SizeGuard(format!(
                "double description exceeded {DD_RAY_LIMIT} intermediate rays"
            )));
        }
        rays = next;
    }
    Ok(rays
        .into_iter()
        .map(|r| r.v.into_iter().map(Rational::from_integer).collect())
        .collect())
}

/// Affine hull of a point set: equality rows, and a set of coordinates that
/// parametrize the hull injectively.
pub(crate) fn affine_hull(points: &[Vec<Rational>], dim: usize) -> (Vec<Row>, Vec<usize>) {
    let Some(p0) = points.first() else {
        return (Vec::new(), Vec::new());
    };
    let diffs: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let coords = if diffs.is_empty() {
        Vec::new()
    } else {
        rref(diffs.clone()).pivots
    };
    let eqs = nullspace(&diffs, dim)
        .into_iter()
        .map(|w| {
            let rhs = dot(&w, p0);
            let (coeffs, rhs) = primitive(&w, &rhs);
            Row::new(coeffs, rhs)
        })
        .collect();
    (eqs, coords)
}

/// Irredundant H-representation of the convex hull of `v`.
pub fn facet_enumeration(v: &VRep) -> Result<HRep> {
    let n = v.dim();
    let pts = v.vertices();
    if pts.is_empty() {
        return Err(Error::InvalidPolytope("no vertices".into()));
    }
    let (equalities, coords) = affine_hull(pts, n);
    let k = coords.len();
    let lifted: Vec<Vec<Rational>> = pts
        .iter()
        .map(|p| {
            let mut u = Vec::with_capacity(k + 1);
            u.push(Rational::from_integer(1.into()));
            u.extend(coords.iter().map(|&j| p[j].clone()));
            u
        })
        .collect();
    let rays = extreme_rays(&lifted, k + 1)?;
    let mut inequalities = Vec::new();
    for a in rays {
        if a[1..].iter().all(Zero::is_zero) {
            // Only the trivial `1 >= 0` row; occurs for single points.
            continue;
        }
        let mut coeffs = vec![Rational::zero(); n];
        for (t, &j) in coords.iter().enumerate() {
            coeffs[j] = a[t + 1].clone();
        }
        inequalities.push(Row::new(coeffs, -a[0].clone()).normalized());
    }
    HRep::new(n, inequalities, equalities)
}

/// Vertices of a bounded H-polytope. Equalities are solved first so the
/// enumeration runs in the dimension of the affine hull.
pub fn vertex_enumeration(h: &HRep) -> Result<VRep> {
    let n = h.dim();
    let e: Vec<Vec<Rational>> = h.equalities().iter().map(|r| r.coeffs.clone()).collect();
    let d: Vec<Rational> = h.equalities().iter().map(|r| r.rhs.clone()).collect();
    let x0 = if e.is_empty() {
        vec![Rational::zero(); n]
    } else {
        solve(&e, &d).ok_or(Error::EmptyPolytope)?
    };
    let basis = if e.is_empty() {
        (0..n)
            .map(|j| {
                let mut v = vec![Rational::zero(); n];
                v[j] = Rational::from_integer(1.into());
                v
            })
            .collect()
    } else {
        nullspace(&e, n)
    };
    let k = basis.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut s_row = vec![Rational::zero(); k + 1];
    s_row[0] = Rational::from_integer(1.into());
    rows.push(s_row);
    for r in h.inequalities() {
        let slack0 = &r.rhs - dot(&r.coeffs, &x0);
        let coeffs: Vec<Rational> = basis.iter().map(|b| dot(&r.coeffs, b)).collect();
        if coeffs.iter().all(Zero::is_zero) {
            if slack0.is_positive() {
                return Err(Error::EmptyPolytope);
            }
            continue;
        }
        let mut v = Vec::with_capacity(k + 1);
        v.push(-slack0);
        v.extend(coeffs);
        rows.push(v);
    }
    if rref(rows.clone()).rank() < k + 1 {
        return Err(Error::InvalidPolytope("polyhedron contains a line".into()));
    }
    let rays = extreme_rays(&rows, k + 1)?;
    let mut vertices = Vec::new();
    for r in rays {
        if r[0].is_zero() {
            return Err(Error::InvalidPolytope("polyhedron is unbounded".into()));
        }
        let t: Vec<Rational> = r[1..].iter().map(|x| x / &r[0]).collect();
        let mut x = x0.clone();
        for (tj, b) in t.iter().zip(&basis) {
            if tj.is_zero() {
                continue;
            }
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += tj * bi;
            }
        }
        vertices.push(x);
    }
    VRep::new(n, vertices)
}
