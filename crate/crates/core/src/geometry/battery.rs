//! Does conditioned locality constrain the observable pair marginals beyond
//! non-signaling? Compares the projections of the hidden-influence and the
//! non-signaling polytopes onto the marginals of [`MarginalMap`].
//!
//! The hidden-influence polytope is the non-signaling one with extra rows,
//! so its projection is always contained in the other. Equality is decided
//! by projecting only the non-signaling polytope, enumerating its vertices
//! and lifting each vertex into the hidden-influence polytope with an exact
//! LP. A vertex that fails to lift comes with a Farkas certificate, which
//! reads as an inequality on the marginals valid for every hidden-influence
//! behavior and violated by that non-signaling vertex.

use std::collections::HashSet;
use std::fmt;

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dd::vertex_enumeration;
use super::fm::FmOptions;
use super::hrep::{HRep, Row};
use super::linalg::{dot, solve};
use super::lp::{feasible_point, lp_optimize, Direction, LpStatus};
use super::polytopes::{hi_hrep, ns_hrep};
use super::projection::MarginalMap;
use crate::behavior::{DeterministicStrategy, DoubleBehavior};
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Rational};
use crate::scenario::Scenario;

/// One entry of the summary table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn mark(self) -> &'static str {
        match self {
            Verdict::Yes => "✓",
            Verdict::No => "✗",
            Verdict::Unknown => "?",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unknown => "unknown",
        })
    }
}

/// `coeffs . m >= rhs` over marginal coordinates, valid on the projected
/// hidden-influence polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalInequality {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

impl MarginalInequality {
    pub fn slack(&self, m: &[Rational]) -> Rational {
        dot(&self.coeffs, m) - &self.rhs
    }

    pub fn slack_f64(&self, m: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(m)
            .map(|(c, x)| rational_to_f64(c) * x)
            .sum::<f64>()
            - rational_to_f64(&self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coincidence {
    /// Every vertex of the projected non-signaling polytope lifts.
    Equal { facets: usize, vertices: usize },
    /// `witness` is a projected non-signaling vertex violating `inequality`.
    Separated {
        witness: Vec<Rational>,
        inequality: MarginalInequality,
    },
}

impl Coincidence {
    pub fn is_equal(&self) -> bool {
        matches!(self, Coincidence::Equal { .. })
    }
}

/// Exact LP lift of marginal values `m` into `h`: `Ok(point)` or a valid
/// marginal inequality violated by `m`.
pub fn lift_marginals(
    map: &MarginalMap,
    h: &HRep,
    m: &[Rational],
) -> Result<std::result::Result<Vec<Rational>, MarginalInequality>> {
    let fixing = map.fixing_rows(m);
    let k = h.equalities().len();
    let mut equalities = h.equalities().to_vec();
    equalities.extend(fixing);
    let lifted = HRep::new(h.dim(), h.inequalities().to_vec(), equalities)?;
    match feasible_point(&lifted)? {
        Ok(x) => Ok(Ok(x)),
        Err(farkas) => {
            // A^T y + E^T mu + M^T nu = 0 and b.y + d.mu + m.nu > 0, hence
            // (-nu) . Mx >= b.y + d.mu on h.
            let nu = &farkas.equality[k..];
            let rhs = dot(&farkas.inequality, &rhs_of(h.inequalities()))
                + dot(&farkas.equality[..k], &rhs_of(h.equalities()));
            let ineq = MarginalInequality {
                coeffs: nu.iter().map(|v| -v).collect(),
                rhs,
            };
            if !ineq.slack(m).is_negative() {
                return Err(Error::Certificate("lift refusal does not separate".into()));
            }
            Ok(Err(ineq))
        }
    }
}

fn rhs_of(rows: &[Row]) -> Vec<Rational> {
    rows.iter().map(|r| r.rhs.clone()).collect()
}

/// Decides whether the projected hidden-influence and non-signaling
/// polytopes coincide. Size guards of the projection or of the vertex
/// enumeration surface as [`Error::SizeGuard`].
pub fn projection_coincidence(
    scenario: &Scenario,
    conditioned: usize,
    options: FmOptions,
) -> Result<(MarginalMap, HRep, Coincidence)> {
    let map = MarginalMap::new(scenario, conditioned)?;
    let (proj_ns, _) = map.project_hrep(&ns_hrep(scenario), options)?;
    let vertices = vertex_enumeration(&proj_ns)?;
    let hi = hi_hrep(scenario, conditioned)?;
    // Deterministic behaviors lie in every polytope considered here, so
    // vertices they project onto need no LP.
    let deterministic: HashSet<Vec<Rational>> = DeterministicStrategy::enumerate(scenario)
        .iter()
        .map(|d| map.project(d.behavior::<Rational>(scenario).table()))
        .collect();
    for v in vertices.vertices() {
        if deterministic.contains(v) {
            continue;
        }
        if let Err(inequality) = lift_marginals(&map, &hi, v)? {
            return Ok((
                map,
                proj_ns,
                Coincidence::Separated {
                    witness: v.clone(),
                    inequality,
                },
            ));
        }
    }
    let facets = proj_ns.inequalities().len();
    Ok((
        map,
        proj_ns,
        Coincidence::Equal {
            facets,
            vertices: vertices.len(),
        },
    ))
}

/// An LP comparison along one marginal direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalGap {
    pub coeffs: Vec<Rational>,
    pub ns_min: Rational,
    pub hi_min: Rational,
    /// Marginals of the non-signaling minimizer.
    pub ns_point: Vec<Rational>,
}

impl DirectionalGap {
    pub fn separates(&self) -> bool {
        self.ns_min < self.hi_min
    }

    pub fn inequality(&self) -> MarginalInequality {
        MarginalInequality {
            coeffs: self.coeffs.clone(),
            rhs: self.hi_min.clone(),
        }
    }
}

/// Minimizes `coeffs . m` over both polytopes with certified LPs.
pub fn directional_gap(
    map: &MarginalMap,
    ns: &HRep,
    hi: &HRep,
    coeffs: &[Rational],
) -> Result<DirectionalGap> {
    let objective = map.pull_back(coeffs);
    let solve_min = |h: &HRep| -> Result<(Rational, Vec<Rational>)> {
        let res = lp_optimize(&objective, h, Direction::Min)?;
        match res.status {
            LpStatus::Optimal => Ok((
                res.optimum.expect("verified"),
                res.primal.expect("verified"),
            )),
            other => Err(Error::InvalidPolytope(format!(
                "bounded polytope gave LP status {other:?}"
            ))),
        }
    };
    let (ns_min, x) = solve_min(ns)?;
    let (hi_min, _) = solve_min(hi)?;
    Ok(DirectionalGap {
        coeffs: coeffs.to_vec(),
        ns_min,
        hi_min,
        ns_point: map.project(&x),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub fm: FmOptions,
    /// Random marginal directions tried when the projection is too large.
    pub directions: usize,
    pub seed: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            fm: FmOptions::default(),
            directions: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub scenario: Scenario,
    pub conditioned: usize,
    pub ns_violation: Verdict,
    pub quantum_violation: Verdict,
    /// `"projection"` when the exact coincidence test decided the row,
    /// otherwise `"lp-directions"`.
    pub method: &'static str,
    /// Valid inequalities found violated by some non-signaling behavior.
    pub separating: Vec<MarginalInequality>,
    /// A non-signaling marginal point outside the projected hidden-influence
    /// polytope.
    pub witness: Option<Vec<Rational>>,
    pub diagnostics: Vec<String>,
}

/// Minimizes each nonzero direction over both polytopes, recording every
/// direction along which the non-signaling minimum is strictly lower.
fn try_directions(
    map: &MarginalMap,
    ns: &HRep,
    hi: &HRep,
    directions: &[Vec<Rational>],
    report: &mut BatteryReport,
) -> Result<()> {
    let mut tried = 0;
    for (k, c) in directions.iter().enumerate() {
        if c.iter().all(Zero::is_zero) {
            continue;
        }
        tried += 1;
        let gap = directional_gap(map, ns, hi, c)?;
        if gap.separates() {
            report.diagnostics.push(format!(
                "direction {k}: non-signaling minimum {} below hidden-influence minimum {}",
                gap.ns_min, gap.hi_min
            ));
            if report.witness.is_none() {
                report.witness = Some(gap.ns_point.clone());
            }
            report.separating.push(gap.inequality());
            report.ns_violation = Verdict::Yes;
        }
    }
    if report.ns_violation == Verdict::Unknown {
        report
            .diagnostics
            .push(format!("no separation along {tried} directions"));
    }
    Ok(())
}

/// Fills one row of the summary table. `extra_directions` are tried
/// before any projection (for instance a known inequality); `quantum` is a
/// behavior whose marginals are tested against every certified inequality.
pub fn scenario_battery(
    scenario: &Scenario,
    conditioned: usize,
    extra_directions: &[Vec<Rational>],
    quantum: Option<&DoubleBehavior>,
    options: BatteryOptions,
) -> Result<BatteryReport> {
    let mut report = BatteryReport {
        scenario: scenario.clone(),
        conditioned,
        ns_violation: Verdict::Unknown,
        quantum_violation: Verdict::Unknown,
        method: "lp-directions",
        separating: Vec::new(),
        witness: None,
        diagnostics: Vec::new(),
    };
    let map = MarginalMap::new(scenario, conditioned)?;
    if let Some(q) = quantum {
        if q.scenario() != scenario {
            return Err(Error::InvalidBehavior(format!(
                "quantum point over {} for scenario {scenario}",
                q.scenario()
            )));
        }
    }

    // Supplied directions are cheap LPs; a separation there settles the
    // question without attempting a projection that may not fit in memory.
    let ns = ns_hrep(scenario);
    let hi = hi_hrep(scenario, conditioned)?;
    if !extra_directions.is_empty() {
        try_directions(&map, &ns, &hi, extra_directions, &mut report)?;
    }
    if report.ns_violation == Verdict::Unknown {
        match projection_coincidence(scenario, conditioned, options.fm) {
            Ok((_, proj_ns, Coincidence::Equal { facets, vertices })) => {
                report.method = "projection";
                report.ns_violation = Verdict::No;
                // Quantum behaviors are non-signaling, so nothing can violate.
                report.quantum_violation = Verdict::No;
                report.diagnostics.push(format!(
                    "projected non-signaling polytope: {facets} facets, {} equalities, {vertices} vertices, all lift",
                    proj_ns.equalities().len()
                ));
                return Ok(report);
            }
            Ok((_, _, Coincidence::Separated { witness, inequality })) => {
                report.method = "projection";
                report.ns_violation = Verdict::Yes;
                report.witness = Some(witness);
                report.separating.push(inequality);
                report
                    .diagnostics
                    .push("a projected non-signaling vertex does not lift".into());
            }
            Err(Error::SizeGuard(msg)) => {
                report.diagnostics.push(format!("projection skipped: {msg}"));
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                let random: Vec<Vec<Rational>> = (0..options.directions)
                    .map(|_| {
                        (0..map.dim())
                            .map(|_| Rational::from_integer(rng.gen_range(-1i64..=1).into()))
                            .collect()
                    })
                    .collect();
                try_directions(&map, &ns, &hi, &random, &mut report)?;
            }
            Err(e) => return Err(e),
        }
    }

    if let Some(q) = quantum {
        let m = map.project_f64(q.table());
        let worst = report
            .separating
            .iter()
            .map(|ineq| ineq.slack_f64(&m))
            .fold(f64::INFINITY, f64::min);
        if worst < -1e-9 {
            report.quantum_violation = Verdict::Yes;
            report
                .diagnostics
                .push(format!("quantum point violates a certified inequality by {:.3e}", -worst));
        } else if worst.is_finite() {
            report
                .diagnostics
                .push(format!("quantum point satisfies every certified inequality (slack {worst:.3e})"));
        }
    }
    Ok(report)
}

impl MarginalMap {
    /// Joint-coordinate objective `M^T c` for marginal coefficients `c`.
    pub fn pull_back(&self, coeffs: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.scenario().coordinate_count()];
        for (cells, c) in self.cells().iter().zip(coeffs) {
            if c.is_zero() {
                continue;
            }
            for &j in cells {
                out[j] += c;
            }
        }
        out
    }

    /// Marginal coefficients `c` with `M^T c = joint`, when the joint
    /// functional depends on the marginals alone in this linear way.
    pub fn push_forward(&self, joint: &[Rational]) -> Option<Vec<Rational>> {
        let n = self.scenario().coordinate_count();
        let system: Vec<Vec<Rational>> = (0..n)
            .map(|j| {
                self.cells()
                    .iter()
                    .map(|cells| {
                        if cells.contains(&j) {
                            Rational::from_integer(1.into())
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        solve(&system, joint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pull_back_and_push_forward_agree() {
        let s = Scenario::uniform(3, 2, 2).unwrap();
        let map = MarginalMap::new(&s, 1).unwrap();
        let c: Vec<Rational> = (0..map.dim())
            .map(|k| Rational::from_integer(((k % 5) as i64 - 2).into()))
            .collect();
        let joint = map.pull_back(&c);
        let back = map.push_forward(&joint).unwrap();
        assert_eq!(map.pull_back(&back), joint);
    }

    #[test]
    fn ns_vertex_lifts_into_hi_when_local() {
        let s = Scenario::uniform(3, 2, 2).unwrap();
        let map = MarginalMap::new(&s, 1).unwrap();
        let hi = hi_hrep(&s, 1).unwrap();
        let beh = crate::behavior::Behavior::<Rational>::uniform(s);
        let m = map.project(beh.table());
        assert!(lift_marginals(&map, &hi, &m).unwrap().is_ok());
    }
}
