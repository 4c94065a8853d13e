//! Two-phase tableau simplex on standard form `min c.z, M z = h, z >= 0`.
//!
//! Generic over the number type: exact rationals use Bland's rule and
//! terminate unconditionally; `f64` uses Dantzig's rule with tolerances and
//! an iteration cap, and is only used as a filter whose verdicts are
//! re-checked exactly.

use num::{Signed, Zero};

use crate::scalar::Rational;

pub(crate) trait LpNum: Clone + num::Num + Signed + PartialOrd + std::fmt::Debug {
    const EXACT: bool;
    fn eps() -> Self;
}

impl LpNum for Rational {
    const EXACT: bool = true;
    fn eps() -> Self {
        Rational::zero()
    }
}

impl LpNum for f64 {
    const EXACT: bool = false;
    fn eps() -> Self {
        1e-9
    }
}

fn is_pos<T: LpNum>(x: &T) -> bool {
    *x > T::eps()
}

fn is_neg<T: LpNum>(x: &T) -> bool {
    *x < -T::eps()
}

fn is_nz<T: LpNum>(x: &T) -> bool {
    if T::EXACT {
        !x.is_zero()
    } else {
        x.abs() > T::eps() * T::eps()
    }
}

/// A standard-form problem. `initial_basis[r]` may name a column that is a
/// unit vector on row `r` (a slack); rows without one get an artificial.
pub(crate) struct StandardForm<T> {
    pub matrix: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub cost: Vec<T>,
    pub initial_basis: Vec<Option<usize>>,
}

pub(crate) enum SimplexOutcome<T> {
    Optimal {
        z: Vec<T>,
        value: T,
        /// Row multipliers: `M^T duals <= cost`, `rhs . duals = value`.
        duals: Vec<T>,
    },
    Infeasible {
        /// `M^T duals <= 0` and `rhs . duals > 0`.
        duals: Vec<T>,
    },
    Unbounded {
        /// `M ray = 0`, `ray >= 0`, `cost . ray < 0`.
        ray: Vec<T>,
    },
    /// Iteration cap hit, or a floating-point breakdown.
    IterationLimit,
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    reduced: Vec<T>,
    objective: T,
    basis: Vec<usize>,
    ncols: usize,
    banned: Vec<bool>,
}

impl<T: LpNum> Tableau<T> {
    fn pivot(&mut self, r: usize, q: usize) {
        let inv = T::one() / self.rows[r][q].clone();
        let nz: Vec<usize> = (0..self.ncols)
            .filter(|&j| is_nz(&self.rows[r][j]))
            .collect();
        for &j in &nz {
            self.rows[r][j] = self.rows[r][j].clone() * inv.clone();
        }
        self.rows[r][q] = T::one();
        self.rhs[r] = self.rhs[r].clone() * inv;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || !is_nz(&self.rows[i][q]) {
                continue;
            }
            let f = self.rows[i][q].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] = row[j].clone() - f.clone() * prow[j].clone();
            }
            row[q] = T::zero();
            self.rhs[i] = self.rhs[i].clone() - f * prhs.clone();
            if !T::EXACT && self.rhs[i] < T::zero() && self.rhs[i] > -T::eps() {
                self.rhs[i] = T::zero();
            }
        }
        if is_nz(&self.reduced[q]) {
            let f = self.reduced[q].clone();
            for &j in &nz {
                self.reduced[j] = self.reduced[j].clone() - f.clone() * prow[j].clone();
            }
            self.reduced[q] = T::zero();
            self.objective = self.objective.clone() + f * prhs;
        }
        self.basis[r] = q;
    }

    fn set_costs(&mut self, cost: &[T]) {
        self.reduced = cost.to_vec();
        self.objective = T::zero();
        for r in 0..self.rows.len() {
            let cb = cost[self.basis[r]].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..self.ncols {
                if is_nz(&self.rows[r][j]) {
                    self.reduced[j] = self.reduced[j].clone() - cb.clone() * self.rows[r][j].clone();
                }
            }
            self.objective = self.objective.clone() + cb * self.rhs[r].clone();
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = (0..self.ncols).filter(|&j| !self.banned[j] && is_neg(&self.reduced[j]));
        if bland {
            candidates.min()
        } else {
            candidates.min_by(|&a, &b| {
                self.reduced[a]
                    .partial_cmp(&self.reduced[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            })
        }
    }

    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for r in 0..self.rows.len() {
            let a = &self.rows[r][q];
            if !is_pos(a) {
                continue;
            }
            let ratio = self.rhs[r].clone() / a.clone();
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let better = if T::EXACT {
                        ratio < bratio || (ratio == bratio && self.basis[r] < self.basis[br])
                    } else {
                        ratio < bratio.clone() - T::eps()
                            || (ratio <= bratio.clone() + T::eps() && self.basis[r] < self.basis[br])
                    };
                    if better {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Runs to optimality. `Err(q)` reports an unbounded entering column.
    fn run(&mut self, max_iter: usize) -> Result<(), Option<usize>> {
        let mut iter = 0;
        while let Some(q) = self.entering(T::EXACT) {
            if iter >= max_iter {
                return Err(None);
            }
            iter += 1;
            match self.leaving(q) {
                Some(r) => self.pivot(r, q),
                None => return Err(Some(q)),
            }
        }
        Ok(())
    }

    fn duals(&self, id_cols: &[usize], cost: &[T]) -> Vec<T> {
        id_cols
            .iter()
            .map(|&j| cost[j].clone() - self.reduced[j].clone())
            .collect()
    }
}

pub(crate) fn solve<T: LpNum>(problem: StandardForm<T>) -> SimplexOutcome<T> {
    let StandardForm {
        mut matrix,
        rhs,
        cost,
        initial_basis,
    } = problem;
    let m = matrix.len();
    let n = cost.len();
    debug_assert!(rhs.iter().all(|h| *h >= T::zero()));

    let mut id_cols = Vec::with_capacity(m);
    let mut artificial_count = 0;
    for (r, slot) in initial_basis.iter().enumerate() {
        match slot {
            Some(j) => id_cols.push(*j),
            None => {
                id_cols.push(n + artificial_count);
                artificial_count += 1;
            }
        }
        let _ = r;
    }
    let ncols = n + artificial_count;
    for (r, row) in matrix.iter_mut().enumerate() {
        row.resize(ncols, T::zero());
        if id_cols[r] >= n {
            row[id_cols[r]] = T::one();
        }
    }
    let mut tab = Tableau {
        rows: matrix,
        rhs,
        reduced: Vec::new(),
        objective: T::zero(),
        basis: id_cols.clone(),
        ncols,
        banned: vec![false; ncols],
    };
    let max_iter = if T::EXACT { usize::MAX } else { 50 * (m + ncols) + 1000 };

    // Phase 1.
    let mut phase1_cost = vec![T::zero(); ncols];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = T::one();
    }
    if artificial_count > 0 {
        tab.set_costs(&phase1_cost);
        match tab.run(max_iter) {
            Ok(()) => {}
            Err(None) => return SimplexOutcome::IterationLimit,
            // Only rounding can make phase 1 look unbounded.
            Err(Some(_)) if !T::EXACT => return SimplexOutcome::IterationLimit,
            Err(Some(_)) => unreachable!("phase 1 is bounded below by zero"),
        }
        if is_pos(&tab.objective) {
            return SimplexOutcome::Infeasible {
                duals: tab.duals(&id_cols, &phase1_cost),
            };
        }
        // Drive zero-level artificials out where possible; rows where no real
        // column is available are linearly dependent and stay inert.
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            if let Some(q) = (0..n).find(|&j| is_nz(&tab.rows[r][j])) {
                tab.pivot(r, q);
            }
        }
        for j in n..ncols {
            tab.banned[j] = true;
        }
    }

    // Phase 2.
    let mut full_cost = cost;
    full_cost.resize(ncols, T::zero());
    tab.set_costs(&full_cost);
    match tab.run(max_iter) {
        Ok(()) => {
            let mut z = vec![T::zero(); n];
            for (r, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    z[b] = tab.rhs[r].clone();
                }
            }
            SimplexOutcome::Optimal {
                z,
                value: tab.objective.clone(),
                duals: tab.duals(&id_cols, &full_cost),
            }
        }
        Err(None) => SimplexOutcome::IterationLimit,
        Err(Some(q)) => {
            let mut ray = vec![T::zero(); n];
            ray[q] = T::one();
            for (r, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    ray[b] = -tab.rows[r][q].clone();
                }
            }
            SimplexOutcome::Unbounded { ray }
        }
    }
}
