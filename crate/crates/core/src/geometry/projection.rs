//! Projection of tripartite polytopes onto the pair marginals that involve
//! the conditioned party, eliminating every joint coordinate.

use num::{One, Zero};

use super::fm::{fm_project_preferring, FmOptions, FmStats};
use super::hrep::{HRep, Row};
use super::polytopes::{hi_hrep, ns_hrep};
use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::scenario::Scenario;

/// Marginal coordinates `P(a_p a_m | x_p x_m)` read at `x_q = 0`, then
/// `P(a_m a_q | x_m x_q)` read at `x_p = 0`, where `m` is the conditioned
/// party and `p < q` the outer ones.
#[derive(Debug, Clone)]
pub struct MarginalMap {
    scenario: Scenario,
    conditioned: usize,
    pairs: [[usize; 2]; 2],
    /// For each marginal coordinate, the joint coordinates summed into it.
    sums: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl MarginalMap {
    pub fn new(scenario: &Scenario, conditioned: usize) -> Result<Self> {
        if scenario.num_parties() != 3 || conditioned >= 3 {
            return Err(Error::InvalidScenario(format!(
                "marginal projection needs three parties, got {scenario}"
            )));
        }
        let outer: Vec<usize> = (0..3).filter(|&p| p != conditioned).collect();
        let pairs = [
            sorted([outer[0], conditioned]),
            sorted([conditioned, outer[1]]),
        ];
        let mut sums = Vec::new();
        let mut labels = Vec::new();
        for pair in pairs {
            let omitted = (0..3).find(|p| !pair.contains(p)).expect("three parties");
            let sub = scenario.restrict(&pair)?;
            for (xs, as_) in sub.coordinates() {
                let mut x = vec![0; 3];
                x[pair[0]] = xs[0];
                x[pair[1]] = xs[1];
                let mut cells = Vec::new();
                for v in 0..scenario.num_outputs(omitted, 0) {
                    let mut a = vec![0; 3];
                    a[pair[0]] = as_[0];
                    a[pair[1]] = as_[1];
                    a[omitted] = v;
                    cells.push(scenario.index(&x, &a));
                }
                sums.push(cells);
                labels.push(format!(
                    "P{}{}({}{}|{}{})",
                    crate::scenario::party_name(pair[0]),
                    crate::scenario::party_name(pair[1]),
                    as_[0],
                    as_[1],
                    xs[0],
                    xs[1]
                ));
            }
        }
        Ok(MarginalMap {
            scenario: scenario.clone(),
            conditioned,
            pairs,
            sums,
            labels,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn conditioned(&self) -> usize {
        self.conditioned
    }

    pub fn pairs(&self) -> [[usize; 2]; 2] {
        self.pairs
    }

    pub fn dim(&self) -> usize {
        self.sums.len()
    }

    /// Joint coordinates summed into each marginal coordinate.
    pub fn cells(&self) -> &[Vec<usize>] {
        &self.sums
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Marginal coordinates of a joint point.
    pub fn project(&self, x: &[Rational]) -> Vec<Rational> {
        self.sums
            .iter()
            .map(|cells| cells.iter().map(|&j| x[j].clone()).sum())
            .collect()
    }

    pub fn project_f64(&self, x: &[f64]) -> Vec<f64> {
        self.sums
            .iter()
            .map(|cells| cells.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// Rows `sum of joint cells = value` fixing every marginal coordinate.
    pub fn fixing_rows(&self, marginals: &[Rational]) -> Vec<Row> {
        let n = self.scenario.coordinate_count();
        self.sums
            .iter()
            .zip(marginals)
            .map(|(cells, v)| {
                let mut c = vec![Rational::zero(); n];
                for &j in cells {
                    c[j] = Rational::one();
                }
                Row::new(c, v.clone())
            })
            .collect()
    }

    /// `h` over joint coordinates extended by marginal coordinates tied to
    /// their sums; the marginals occupy the trailing indices.
    pub fn extend(&self, h: &HRep) -> Result<HRep> {
        let n = h.dim();
        let m = self.dim();
        let pad = |r: &Row| {
            let mut c = r.coeffs.clone();
            c.resize(n + m, Rational::zero());
            Row::new(c, r.rhs.clone())
        };
        let inequalities = h.inequalities().iter().map(pad).collect();
        let mut equalities: Vec<Row> = h.equalities().iter().map(pad).collect();
        for (k, cells) in self.sums.iter().enumerate() {
            let mut c = vec![Rational::zero(); n + m];
            for &j in cells {
                c[j] = Rational::one();
            }
            c[n + k] = -Rational::one();
            equalities.push(Row::new(c, Rational::zero()));
        }
        HRep::new(n + m, inequalities, equalities)
    }

    /// Fourier–Motzkin projection of `h` onto the marginal coordinates.
    pub fn project_hrep(&self, h: &HRep, options: FmOptions) -> Result<(HRep, FmStats)> {
        let ext = self.extend(h)?;
        let n = h.dim();
        let keep: Vec<usize> = (n..n + self.dim()).collect();
        let preference: Vec<usize> = (0..n).collect();
        fm_project_preferring(&ext, &keep, options, &preference)
    }
}

fn sorted(mut p: [usize; 2]) -> [usize; 2] {
    p.sort_unstable();
    p
}

/// A projected polytope with the statistics of its elimination.
pub type Projected = (HRep, FmStats);

/// Projected hidden-influence and non-signaling polytopes.
pub fn projected_polytopes(
    scenario: &Scenario,
    conditioned: usize,
    options: FmOptions,
) -> Result<(MarginalMap, Projected, Projected)> {
    let map = MarginalMap::new(scenario, conditioned)?;
    let hi = map.project_hrep(&hi_hrep(scenario, conditioned)?, options)?;
    let ns = map.project_hrep(&ns_hrep(scenario), options)?;
    Ok((map, hi, ns))
}
