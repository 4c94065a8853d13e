//! Local, non-signaling and hidden-influence polytopes over full behavior
//! coordinates.

use fixedbitset::FixedBitSet;
use num::{One, Signed, Zero};
use rand::Rng;

use super::dd::facet_enumeration;
use super::linalg::nullspace;
use super::hrep::{HRep, Row, VRep};
use crate::behavior::{Behavior, DeterministicStrategy, RationalBehavior};
use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::scenario::Scenario;

/// Vertices of the local polytope of a bipartite scenario, one per joint
/// deterministic strategy in [`DeterministicStrategy::enumerate`] order.
pub fn local_vertices(scenario: &Scenario) -> Result<VRep> {
    if scenario.num_parties() != 2 {
        return Err(Error::InvalidScenario(format!(
            "local vertices need a bipartite scenario, got {scenario}"
        )));
    }
    let pts = DeterministicStrategy::enumerate(scenario)
        .iter()
        .map(|s| s.behavior::<Rational>(scenario).into_table())
        .collect();
    VRep::new(scenario.coordinate_count(), pts)
}

fn unit_row(dim: usize, j: usize) -> Row {
    let mut c = vec![Rational::zero(); dim];
    c[j] = Rational::one();
    Row::new(c, Rational::zero())
}

/// Rows of the non-signaling polytope: positivity, normalization of every
/// input block, and independence of each marginal from every omitted
/// party's input.
pub fn ns_hrep(scenario: &Scenario) -> HRep {
    let dim = scenario.coordinate_count();
    let inequalities = (0..dim).map(|j| unit_row(dim, j)).collect();
    let mut equalities = Vec::new();
    for x in scenario.input_tuples() {
        let mut c = vec![Rational::zero(); dim];
        for a in scenario.output_tuples(&x) {
            c[scenario.index(&x, &a)] = Rational::one();
        }
        equalities.push(Row::new(c, Rational::one()));
    }
    for q in 0..scenario.num_parties() {
        for x in scenario.input_tuples() {
            if x[q] == 0 {
                continue;
            }
            let mut x0 = x.clone();
            x0[q] = 0;
            // Output tuples of the remaining parties, with party q's slot zero.
            let mut rest = x.clone();
            rest[q] = 0;
            for a in scenario.output_tuples(&rest) {
                if a[q] != 0 {
                    continue;
                }
                let mut c = vec![Rational::zero(); dim];
                let mut aq = a.clone();
                for v in 0..scenario.num_outputs(q, x[q]) {
                    aq[q] = v;
                    c[scenario.index(&x, &aq)] += Rational::one();
                }
                for v in 0..scenario.num_outputs(q, 0) {
                    aq[q] = v;
                    c[scenario.index(&x0, &aq)] -= Rational::one();
                }
                equalities.push(Row::new(c, Rational::zero()));
            }
        }
    }
    HRep::new(dim, inequalities, equalities).expect("rows are well formed")
}

/// Facets of a bipartite local polytope other than those equivalent to
/// positivity of a single coordinate.
pub fn nontrivial_local_facets(scenario: &Scenario) -> Result<Vec<Row>> {
    let v = local_vertices(scenario)?;
    let h = facet_enumeration(&v)?;
    let tight_set = |row: &Row| {
        let mut s = FixedBitSet::with_capacity(v.len());
        for (k, p) in v.vertices().iter().enumerate() {
            if row.slack(p).is_zero() {
                s.insert(k);
            }
        }
        s
    };
    let positivity: Vec<FixedBitSet> = (0..v.dim())
        .map(|j| tight_set(&unit_row(v.dim(), j)))
        .collect();
    Ok(h.inequalities()
        .iter()
        .filter(|row| !positivity.contains(&tight_set(row)))
        .cloned()
        .collect())
}

/// The two parties other than `conditioned`, in order.
fn outer_parties(scenario: &Scenario, conditioned: usize) -> Result<[usize; 2]> {
    if scenario.num_parties() != 3 || conditioned >= 3 {
        return Err(Error::InvalidScenario(format!(
            "conditioned locality needs three parties and a valid party index, got {scenario} and {conditioned}"
        )));
    }
    let v: Vec<usize> = (0..3).filter(|&p| p != conditioned).collect();
    Ok([v[0], v[1]])
}

/// Each nontrivial local facet of the outer pair, applied to every
/// unnormalized conditioned block `P(. b . | . y .)`.
pub fn lifted_locality_rows(scenario: &Scenario, conditioned: usize) -> Result<Vec<Row>> {
    let [p, q] = outer_parties(scenario, conditioned)?;
    let outer = scenario.restrict(&[p, q])?;
    let facets = nontrivial_local_facets(&outer)?;
    let dim = scenario.coordinate_count();
    let full = |xo: &[usize], ao: &[usize], y: usize, b: usize| {
        let mut x = vec![0; 3];
        let mut a = vec![0; 3];
        x[p] = xo[0];
        x[q] = xo[1];
        a[p] = ao[0];
        a[q] = ao[1];
        x[conditioned] = y;
        a[conditioned] = b;
        scenario.index(&x, &a)
    };
    let mut rows = Vec::new();
    for y in 0..scenario.num_inputs(conditioned) {
        for b in 0..scenario.num_outputs(conditioned, y) {
            for f in &facets {
                let mut c = vec![Rational::zero(); dim];
                for (j, (xo, ao)) in outer.coordinates().iter().enumerate() {
                    if !f.coeffs[j].is_zero() {
                        c[full(xo, ao, y, b)] += &f.coeffs[j];
                    }
                }
                // Context weight P(b|y), read at the outer parties' first inputs.
                if !f.rhs.is_zero() {
                    for ao in outer.output_tuples(&[0, 0]) {
                        c[full(&[0, 0], &ao, y, b)] -= &f.rhs;
                    }
                }
                rows.push(Row::new(c, Rational::zero()).normalized());
            }
        }
    }
    Ok(rows)
}

/// Non-signaling rows plus conditioned locality of the outer pair for every
/// input/output context of `conditioned`.
pub fn hi_hrep(scenario: &Scenario, conditioned: usize) -> Result<HRep> {
    let ns = ns_hrep(scenario);
    let lifted = lifted_locality_rows(scenario, conditioned)?;
    ns.with_rows(lifted, Vec::new())
}

/// Random exact points of the non-signaling polytope: the uniform behavior
/// moved a random fraction of the way to the boundary along a random
/// direction of the affine hull.
pub struct NsSampler {
    scenario: Scenario,
    center: Vec<Rational>,
    basis: Vec<Vec<Rational>>,
}

impl NsSampler {
    pub fn new(scenario: &Scenario) -> Self {
        let h = ns_hrep(scenario);
        let e: Vec<Vec<Rational>> = h.equalities().iter().map(|r| r.coeffs.clone()).collect();
        NsSampler {
            scenario: scenario.clone(),
            center: Behavior::<Rational>::uniform(scenario.clone()).into_table(),
            basis: nullspace(&e, h.dim()),
        }
    }

    /// Dimension of the affine hull.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RationalBehavior {
        let n = self.center.len();
        let mut d = vec![Rational::zero(); n];
        for b in &self.basis {
            let w = Rational::from_integer(rng.gen_range(-20i64..=20).into());
            if w.is_zero() {
                continue;
            }
            for (di, bi) in d.iter_mut().zip(b) {
                if !bi.is_zero() {
                    *di += &w * bi;
                }
            }
        }
        // Largest step keeping every coordinate nonnegative.
        let reach = self
            .center
            .iter()
            .zip(&d)
            .filter(|(_, di)| di.is_negative())
            .map(|(c, di)| -(c / di))
            .min();
        let table = match reach {
            None => self.center.clone(),
            Some(t) => {
                let frac = Rational::new(rng.gen_range(1i64..=99).into(), 100.into());
                let step = t * frac;
                self.center.iter().zip(&d).map(|(c, di)| c + &step * di).collect()
            }
        };
        Behavior::new(self.scenario.clone(), table).expect("point of the non-signaling polytope")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::linalg::rank;
    use crate::scalar::int;

    #[test]
    fn vertex_counts() {
        let s = Scenario::new(vec![vec![2, 2], vec![2, 2]]).unwrap();
        assert_eq!(local_vertices(&s).unwrap().len(), 16);
        let s = Scenario::new(vec![vec![2, 2], vec![3, 3, 3]]).unwrap();
        assert_eq!(local_vertices(&s).unwrap().len(), 108);
        assert!(local_vertices(&Scenario::uniform(3, 2, 2).unwrap()).is_err());
    }

    #[test]
    fn ns_affine_dimension_222() {
        let s = Scenario::uniform(3, 2, 2).unwrap();
        let h = ns_hrep(&s);
        let eqs: Vec<Vec<Rational>> = h.equalities().iter().map(|r| r.coeffs.clone()).collect();
        assert_eq!(s.coordinate_count() - rank(&eqs), 26);
    }

    #[test]
    fn chsh_scenario_has_eight_ch_facets() {
        let s = Scenario::new(vec![vec![2, 2], vec![2, 2]]).unwrap();
        let facets = nontrivial_local_facets(&s).unwrap();
        assert_eq!(facets.len(), 8);
        let v = local_vertices(&s).unwrap();
        for f in &facets {
            assert!(v.vertices().iter().all(|p| f.slack(p) >= int(0)));
        }
    }

    #[test]
    fn deterministic_points_satisfy_hi_rows() {
        let s = Scenario::tripartite_2_333_2();
        let h = hi_hrep(&s, 1).unwrap();
        assert_eq!(h.inequalities().len(), 144 + 72);
        for strat in DeterministicStrategy::enumerate(&s).iter().step_by(7) {
            assert!(h.contains(strat.behavior::<Rational>(&s).table()));
        }
    }
}
