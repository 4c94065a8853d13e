//! See-saw search for quantum values of a tripartite functional with rank-1
//! projective measurements.
//!
//! The state step takes the lowest eigenvector of the Bell operator. The
//! measurement step re-optimizes one orthonormal basis at a time with the
//! state and every other basis fixed. Each basis is improved by Jacobi
//! sweeps: for a pair of basis vectors the best rotation inside their span
//! solves a 2x2 eigenproblem, and the current pair is one of the
//! candidates, so no step can increase the objective.

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::inequalities::{evaluate, LinearFunctional};
use crate::quantum::{behavior_from_quantum, eigh, ComplexVector, HermitianMatrix, PartyMeasurements};

/// Lowest value any reported quantum optimum may take; anything below is
/// treated as a bug.
pub const SANITY_BOUND: f64 = -2.0004;

/// Slack for the monotonicity assertion.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// A functional in operator form for fixed measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct BellOperator {
    pub matrix: HermitianMatrix,
}

fn check_parties(f: &LinearFunctional, parties: &[PartyMeasurements]) -> Result<()> {
    let s = f.scenario();
    let counts: Vec<Vec<usize>> = parties.iter().map(PartyMeasurements::outcome_counts).collect();
    if counts.as_slice() != s.outputs() {
        return Err(Error::Optimizer(format!(
            "measurements with outcome counts {counts:?} do not match {s}"
        )));
    }
    Ok(())
}

/// `sum coef * (E_1 (x) ... (x) E_n)` with identities on parties a term
/// does not mention.
pub fn bell_operator(f: &LinearFunctional, parties: &[PartyMeasurements]) -> Result<BellOperator> {
    check_parties(f, parties)?;
    let dim: usize = parties.iter().map(PartyMeasurements::local_dim).product();
    let mut total = DMatrix::<Complex64>::zeros(dim, dim);
    for t in f.terms() {
        let mut op = DMatrix::<Complex64>::identity(1, 1);
        for (p, party) in parties.iter().enumerate() {
            let factor = match t.spec.parties.iter().position(|&q| q == p) {
                Some(k) => party.element(t.spec.inputs[k], t.spec.outputs[k]).matrix().clone(),
                None => DMatrix::identity(party.local_dim(), party.local_dim()),
            };
            op = op.kronecker(&factor);
        }
        total += op * Complex64::new(crate::scalar::rational_to_f64(&t.coef), 0.0);
    }
    Ok(BellOperator {
        matrix: HermitianMatrix::new(total)?,
    })
}

/// Multiplies by a phase making the first entry of non-negligible modulus
/// real and positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = z.conj() / z.norm();
        for e in v.iter_mut() {
            *e *= phase;
        }
    }
}

/// Lowest eigenvector of `m` and its eigenvalue. Within a degenerate lowest
/// eigenspace the candidate eigenvector with the largest leading real
/// component (after phase fixing) is returned.
pub fn optimal_state(m: &BellOperator) -> (ComplexVector, f64) {
    let (values, vectors) = m.matrix.eigh();
    let lowest = values[0];
    let mut best: Option<DVector<Complex64>> = None;
    for (k, &v) in values.iter().enumerate() {
        if v > lowest + 1e-12 {
            break;
        }
        let mut col = vectors.column(k).into_owned();
        fix_phase(&mut col);
        let better = match &best {
            None => true,
            Some(b) => col
                .iter()
                .zip(b.iter())
                .find(|(x, y)| (x.re - y.re).abs() > 1e-12)
                .is_some_and(|(x, y)| x.re > y.re),
        };
        if better {
            best = Some(col);
        }
    }
    let psi = ComplexVector::from_dvector(best.expect("nonempty spectrum"));
    let value = psi.expectation(&m.matrix);
    (psi, value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub seeds: usize,
    /// See-saw rounds per seed; 0 returns the starting point.
    pub max_iterations: usize,
    /// Stop once a round improves the value by less than this.
    pub tolerance: f64,
    pub rng_seed: u64,
    /// Jacobi sweeps per basis update.
    pub sweeps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seeds: 50,
            max_iterations: 2000,
            tolerance: 1e-9,
            rng_seed: 2024,
            sweeps: 8,
        }
    }
}

/// Measurement bases: `bases[p][x]` is a unitary whose columns are the
/// outcome vectors of party `p` on input `x`.
pub type Bases = Vec<Vec<DMatrix<Complex64>>>;

#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub state: ComplexVector,
    pub bases: Bases,
    pub measurements: Vec<PartyMeasurements>,
    /// Value re-evaluated from the induced behavior.
    pub value: f64,
    /// Value after every round, starting with the initial point.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: SeesawRun,
    /// Final value of every seed, in seed order.
    pub per_seed: Vec<f64>,
}

/// Recovers orthonormal bases from rank-1 projective measurements.
pub fn bases_from_measurements(parties: &[PartyMeasurements]) -> Result<Bases> {
    parties
        .iter()
        .map(|party| {
            party
                .povms()
                .iter()
                .map(|povm| {
                    let d = povm.dim();
                    if povm.num_outcomes() != d {
                        return Err(Error::Optimizer(format!(
                            "{} outcomes in dimension {d} is not a basis measurement",
                            povm.num_outcomes()
                        )));
                    }
                    let cols: Vec<DVector<Complex64>> = povm
                        .elements()
                        .iter()
                        .map(|e| {
                            let (vals, vecs) = e.eigh();
                            if (vals[d - 1] - 1.0).abs() > 1e-8 || vals[..d - 1].iter().any(|v| v.abs() > 1e-8) {
                                return Err(Error::Optimizer("measurement is not rank-1 projective".into()));
                            }
                            Ok(vecs.column(d - 1).into_owned())
                        })
                        .collect::<Result<_>>()?;
                    Ok(DMatrix::from_columns(&cols))
                })
                .collect()
        })
        .collect()
}

pub fn measurements_from_bases(bases: &Bases) -> Result<Vec<PartyMeasurements>> {
    bases.iter().map(|b| PartyMeasurements::from_bases(b)).collect()
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian
/// matrix, with the usual phase correction.
pub fn random_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let rk = r[(k, k)];
        if rk.norm() > 0.0 {
            let phase = rk / rk.norm();
            for i in 0..d {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

/// `tr_rest[(I_p (x) O_rest) |psi><psi|]` for the subsystem `p`.
fn reduced_operator(psi: &DVector<Complex64>, dims: &[usize], p: usize, rest: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    // rest acts on the full space with identity on p; apply and trace out.
    let dim: usize = dims.iter().product();
    let phi = rest * psi;
    let dp = dims[p];
    let inner: usize = dims[p + 1..].iter().product();
    let outer: usize = dims[..p].iter().product();
    let mut r = DMatrix::<Complex64>::zeros(dp, dp);
    debug_assert_eq!(phi.len(), dim);
    // tr((E (x) O) rho) = sum over rest indices of psi* (E (x) I) phi.
    for o in 0..outer {
        for i in 0..inner {
            for a in 0..dp {
                let ia = (o * dp + a) * inner + i;
                for b in 0..dp {
                    let ib = (o * dp + b) * inner + i;
                    // <a|R|b> with <psi|(|b><a| (x) I)|phi> = psi_b* phi_a.
                    r[(a, b)] += phi[ia] * psi[ib].conj();
                }
            }
        }
    }
    r
}

/// Operators `Q_o` such that the value, as a function of the basis of
/// `(party, input)`, is `sum_o <u_o|Q_o|u_o>` plus a constant.
fn local_operators(
    f: &LinearFunctional,
    parties: &[PartyMeasurements],
    psi: &DVector<Complex64>,
    party: usize,
    input: usize,
) -> Vec<DMatrix<Complex64>> {
    let dims: Vec<usize> = parties.iter().map(PartyMeasurements::local_dim).collect();
    let dp = dims[party];
    let mut qs = vec![DMatrix::<Complex64>::zeros(dp, dp); dp];
    for t in f.terms() {
        let Some(k) = t.spec.parties.iter().position(|&q| q == party) else {
            continue;
        };
        if t.spec.inputs[k] != input {
            continue;
        }
        let outcome = t.spec.outputs[k];
        let mut op = DMatrix::<Complex64>::identity(1, 1);
        for (p, pm) in parties.iter().enumerate() {
            let factor = if p == party {
                DMatrix::identity(dp, dp)
            } else {
                match t.spec.parties.iter().position(|&q| q == p) {
                    Some(j) => pm.element(t.spec.inputs[j], t.spec.outputs[j]).matrix().clone(),
                    None => DMatrix::identity(pm.local_dim(), pm.local_dim()),
                }
            };
            op = op.kronecker(&factor);
        }
        let r = reduced_operator(psi, &dims, party, &op);
        qs[outcome] += r * Complex64::new(crate::scalar::rational_to_f64(&t.coef), 0.0);
    }
    // <u|R|u> = tr(|u><u| R) holds for R as built; symmetrize rounding.
    qs.into_iter().map(|q| (&q + q.adjoint()).scale(0.5)).collect()
}

fn basis_objective(qs: &[DMatrix<Complex64>], u: &DMatrix<Complex64>) -> f64 {
    qs.iter()
        .enumerate()
        .map(|(k, q)| {
            let col = u.column(k);
            col.dotc(&(q * col)).re
        })
        .sum()
}

/// Jacobi sweeps over column pairs; never increases the objective.
fn improve_basis(qs: &[DMatrix<Complex64>], u: &mut DMatrix<Complex64>, sweeps: usize) {
    let d = u.ncols();
    for _ in 0..sweeps {
        let before = basis_objective(qs, u);
        for i in 0..d {
            for j in i + 1..d {
                let v = DMatrix::from_columns(&[u.column(i).into_owned(), u.column(j).into_owned()]);
                let diff = &qs[i] - &qs[j];
                let small = v.adjoint() * diff * &v;
                let (_, e) = eigh(&small);
                let r = e.column(0).into_owned();
                // Current value is the (0,0) entry; keep the pair unless the
                // rotation is a strict improvement.
                let current = small[(0, 0)].re;
                let rotated = r.dotc(&(&small * &r)).re;
                if rotated >= current {
                    continue;
                }
                let rp = DVector::from_vec(vec![-r[1].conj(), r[0].conj()]);
                let ui = &v * &r;
                let uj = &v * &rp;
                u.set_column(i, &ui);
                u.set_column(j, &uj);
            }
        }
        if before - basis_objective(qs, u) < 1e-15 {
            break;
        }
    }
}

/// Value of `f` on the behavior induced by a state and measurements.
pub fn quantum_value(f: &LinearFunctional, psi: &ComplexVector, parties: &[PartyMeasurements]) -> Result<f64> {
    let beh = behavior_from_quantum(psi, parties)?;
    evaluate(f, &beh)
}

/// One see-saw run from the given bases.
pub fn seesaw_from(f: &LinearFunctional, start: Bases, cfg: &SearchConfig) -> Result<SeesawRun> {
    let mut bases = start;
    let mut parties = measurements_from_bases(&bases)?;
    check_parties(f, &parties)?;
    let (mut psi, mut value) = optimal_state(&bell_operator(f, &parties)?);
    let mut history = vec![value];
    for _ in 0..cfg.max_iterations {
        let start_value = value;
        for p in 0..bases.len() {
            for x in 0..bases[p].len() {
                let qs = local_operators(f, &parties, psi.entries(), p, x);
                improve_basis(&qs, &mut bases[p][x], cfg.sweeps);
                parties[p] = PartyMeasurements::from_bases(&bases[p])?;
                let after = psi.expectation(&bell_operator(f, &parties)?.matrix);
                if after > value + MONOTONE_SLACK {
                    return Err(Error::Optimizer(format!(
                        "measurement step raised the value from {value} to {after}"
                    )));
                }
                value = after;
            }
        }
        let (next_psi, next_value) = optimal_state(&bell_operator(f, &parties)?);
        if next_value > value + MONOTONE_SLACK {
            return Err(Error::Optimizer(format!(
                "state step raised the value from {value} to {next_value}"
            )));
        }
        psi = next_psi;
        value = next_value;
        history.push(value);
        if start_value - value < cfg.tolerance {
            break;
        }
    }
    let checked = quantum_value(f, &psi, &parties)?;
    if (checked - value).abs() > 1e-10 {
        return Err(Error::Optimizer(format!(
            "operator value {value} disagrees with behavior value {checked}"
        )));
    }
    if checked < SANITY_BOUND {
        return Err(Error::Optimizer(format!(
            "value {checked} is below the sanity bound {SANITY_BOUND}"
        )));
    }
    Ok(SeesawRun {
        state: psi,
        bases,
        measurements: parties,
        value: checked,
        history,
    })
}

/// Random bases for every party and input of the functional's scenario.
pub fn random_bases<R: rand::Rng + ?Sized>(f: &LinearFunctional, rng: &mut R) -> Result<Bases> {
    f.scenario()
        .outputs()
        .iter()
        .map(|party| {
            let d = party[0];
            if party.iter().any(|&o| o != d) {
                return Err(Error::Optimizer(
                    "basis measurements need the same outcome count on every input".into(),
                ));
            }
            Ok(party.iter().map(|_| random_unitary(d, rng)).collect())
        })
        .collect()
}

/// Best see-saw run over `cfg.seeds` random starting bases.
pub fn seesaw(f: &LinearFunctional, cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.seeds == 0 {
        return Err(Error::Optimizer("at least one seed is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut best: Option<SeesawRun> = None;
    let mut per_seed = Vec::with_capacity(cfg.seeds);
    for _ in 0..cfg.seeds {
        let start = random_bases(f, &mut rng)?;
        let run = seesaw_from(f, start, cfg)?;
        per_seed.push(run.value);
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    Ok(SearchResult {
        best: best.expect("at least one seed"),
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::{functional_s, MarginalSpec, Term};
    use crate::quantum::shipped_point;
    use crate::scalar::int;
    use crate::scenario::Scenario;

    #[test]
    fn diagonal_operator_state() {
        let m = BellOperator {
            matrix: HermitianMatrix::from_real_diagonal(&[1.0, -1.0]),
        };
        let (psi, v) = optimal_state(&m);
        assert!((v + 1.0).abs() < 1e-12);
        assert!((psi.entries()[1].norm() - 1.0).abs() < 1e-12);
        let id = BellOperator {
            matrix: HermitianMatrix::identity(3),
        };
        assert!((optimal_state(&id).1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_term_operator_is_projector() {
        let s = Scenario::tripartite_2_333_2();
        let f = LinearFunctional::new(
            s,
            vec![Term {
                coef: int(1),
                spec: MarginalSpec::new(vec![0], vec![0], vec![0]),
            }],
        )
        .unwrap();
        let id2 = DMatrix::<Complex64>::identity(2, 2);
        let id3 = DMatrix::<Complex64>::identity(3, 3);
        let bases = vec![vec![id2.clone(), id2.clone()], vec![id3.clone(), id3.clone(), id3], vec![id2.clone(), id2]];
        let m = bell_operator(&f, &measurements_from_bases(&bases).unwrap()).unwrap();
        let (vals, _) = m.matrix.eigh();
        assert!(vals.iter().all(|v| v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12));
        assert_eq!(vals.iter().filter(|v| (*v - 1.0).abs() < 1e-12).count(), 6);
    }

    #[test]
    fn operator_matches_behavior_on_random_states() {
        let f = functional_s();
        let (_, parties) = shipped_point().unwrap();
        let m = bell_operator(&f, &parties).unwrap();
        assert!(m.matrix.min_eigenvalue() <= -2.0001);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let psi = ComplexVector::new(
                (0..12)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    })
                    .collect(),
            )
            .normalized()
            .unwrap();
            let a = psi.expectation(&m.matrix);
            let b = quantum_value(&f, &psi, &parties).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_iterations_keep_the_seed_value() {
        let f = functional_s();
        let (_, parties) = shipped_point().unwrap();
        let bases = bases_from_measurements(&parties).unwrap();
        let cfg = SearchConfig {
            max_iterations: 0,
            ..SearchConfig::default()
        };
        let run = seesaw_from(&f, bases, &cfg).unwrap();
        let direct = bell_operator(&f, &parties).unwrap().matrix.min_eigenvalue();
        assert!((run.value - direct).abs() < 1e-10);
        assert_eq!(run.history.len(), 1);
    }

    #[test]
    fn basis_step_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let qs: Vec<DMatrix<Complex64>> = (0..3)
            .map(|_| {
                let a = random_unitary(3, &mut rng);
                let d = DMatrix::from_diagonal(&DVector::from_fn(3, |i, _| Complex64::new(i as f64 - 1.0, 0.0)));
                &a * d * a.adjoint()
            })
            .collect();
        let mut u = random_unitary(3, &mut rng);
        let before = basis_objective(&qs, &u);
        improve_basis(&qs, &mut u, 10);
        assert!(basis_objective(&qs, &u) <= before + 1e-12);
        let gram = u.adjoint() * &u;
        assert!((gram - DMatrix::<Complex64>::identity(3, 3)).norm() < 1e-10);
    }
}
