//! Linear functionals on behaviors: the tripartite inequality `S`, the
//! rewritten form `I` with its conditioned CH bracket, and an exact check
//! that `I = S + 2` modulo the non-signaling equalities.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::geometry::linalg::solve;
use crate::geometry::ns_hrep;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::scenario::{party_index, party_name, Scenario};

const S_JSON: &str = include_str!("../../../../data/ineq_S.json");

/// A marginal probability `P_parties(outputs | inputs)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarginalSpec {
    pub parties: Vec<usize>,
    pub outputs: Vec<usize>,
    pub inputs: Vec<usize>,
}

impl MarginalSpec {
    pub fn new(parties: Vec<usize>, outputs: Vec<usize>, inputs: Vec<usize>) -> Self {
        MarginalSpec {
            parties,
            outputs,
            inputs,
        }
    }

    fn validate(&self, s: &Scenario) -> Result<()> {
        let n = self.parties.len();
        let ok = n > 0
            && self.outputs.len() == n
            && self.inputs.len() == n
            && self.parties.windows(2).all(|w| w[0] < w[1])
            && self.parties.iter().zip(&self.inputs).zip(&self.outputs).all(|((&p, &x), &a)| {
                p < s.num_parties() && x < s.num_inputs(p) && a < s.num_outputs(p, x)
            });
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidFunctional(format!("marginal {self} does not fit {s}")))
        }
    }

    pub fn involves(&self, party: usize) -> bool {
        self.parties.contains(&party)
    }

    /// Joint coordinates summed into this marginal, omitted parties' inputs
    /// fixed to 0.
    pub fn joint_cells(&self, s: &Scenario) -> Vec<usize> {
        let mut inputs = vec![0; s.num_parties()];
        for (&p, &x) in self.parties.iter().zip(&self.inputs) {
            inputs[p] = x;
        }
        s.output_tuples(&inputs)
            .into_iter()
            .filter(|a| self.parties.iter().zip(&self.outputs).all(|(&p, &o)| a[p] == o))
            .map(|a| s.index(&inputs, &a))
            .collect()
    }
}

impl std::fmt::Display for MarginalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let names: String = self.parties.iter().map(|&p| party_name(p)).collect();
        let digits = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<String>();
        write!(f, "P_{}({}|{})", names, digits(&self.outputs), digits(&self.inputs))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: Rational,
    pub spec: MarginalSpec,
}

/// `sum coef * marginal` over a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunctional {
    scenario: Scenario,
    terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermFile {
    pub coef: String,
    pub parties: Vec<String>,
    pub outputs: Vec<usize>,
    pub inputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalFile {
    pub scenario: Scenario,
    pub terms: Vec<TermFile>,
}

impl LinearFunctional {
    pub fn new(scenario: Scenario, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.coef.is_zero() {
                return Err(Error::InvalidFunctional(format!("zero coefficient on {}", t.spec)));
            }
            t.spec.validate(&scenario)?;
        }
        Ok(LinearFunctional { scenario, terms })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn from_json(file: &FunctionalFile) -> Result<Self> {
        let terms = file
            .terms
            .iter()
            .map(|t| {
                Ok(Term {
                    coef: parse_rational(&t.coef)?,
                    spec: MarginalSpec::new(
                        t.parties.iter().map(|p| party_index(p)).collect::<Result<_>>()?,
                        t.outputs.clone(),
                        t.inputs.clone(),
                    ),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        LinearFunctional::new(file.scenario.clone(), terms)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> FunctionalFile {
        FunctionalFile {
            scenario: self.scenario.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermFile {
                    coef: t.coef.to_string(),
                    parties: t.spec.parties.iter().map(|&p| party_name(p)).collect(),
                    outputs: t.spec.outputs.clone(),
                    inputs: t.spec.inputs.clone(),
                })
                .collect(),
        }
    }

    /// Coefficients over joint coordinates; marginals are expanded with
    /// omitted inputs fixed to 0.
    pub fn joint_vector(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.scenario.coordinate_count()];
        for t in &self.terms {
            for j in t.spec.joint_cells(&self.scenario) {
                v[j] += &t.coef;
            }
        }
        v
    }

    fn needs_nonsignaling(&self) -> bool {
        let n = self.scenario.num_parties();
        self.terms.iter().any(|t| t.spec.parties.len() < n)
    }

    /// Copy with the coefficient of term `k` shifted by `delta`; a term
    /// whose coefficient becomes zero is dropped.
    pub fn perturbed(&self, k: usize, delta: &Rational) -> Result<Self> {
        let mut terms = self.terms.clone();
        let t = terms
            .get_mut(k)
            .ok_or_else(|| Error::InvalidFunctional(format!("no term {k}")))?;
        t.coef += delta;
        terms.retain(|t| !t.coef.is_zero());
        LinearFunctional::new(self.scenario.clone(), terms)
    }
}

/// The 24-term tripartite functional, loaded from the shipped coefficient
/// file.
pub fn functional_s() -> LinearFunctional {
    LinearFunctional::from_json_str(S_JSON).expect("shipped coefficient file is valid")
}

/// Value of `f` on `beh`; marginals with omitted parties need a
/// non-signaling behavior.
pub fn evaluate<T: Scalar>(f: &LinearFunctional, beh: &Behavior<T>) -> Result<T> {
    if beh.scenario() != f.scenario() {
        return Err(Error::InvalidFunctional(format!(
            "functional over {} applied to behavior over {}",
            f.scenario(),
            beh.scenario()
        )));
    }
    if f.needs_nonsignaling() {
        beh.require_nonsignaling()?;
    }
    let table = beh.table();
    let mut total = T::zero();
    for t in &f.terms {
        let m: T = t
            .spec
            .joint_cells(f.scenario())
            .into_iter()
            .fold(T::zero(), |acc, j| acc + table[j].clone());
        total = total + T::from_rational(&t.coef) * m;
    }
    Ok(total)
}

/// CH expression of a bipartite behavior over parties 0 and 1:
/// `1 - P_0(0|1) - P_1(0|0) + P(00|00) + P(00|10) - P(00|01) + P(00|11)`.
pub fn ch_bracket<T: Scalar>(beh: &Behavior<T>) -> Result<T> {
    let s = beh.scenario();
    let ok = s.num_parties() == 2
        && s.num_inputs(0) >= 2
        && s.num_inputs(1) >= 2;
    if !ok {
        return Err(Error::InvalidBehavior(format!(
            "CH bracket needs two parties with two inputs each, got {s}"
        )));
    }
    let p = |x: usize, z: usize| {
        s.output_tuples(&[x, z])
            .iter()
            .filter(|a| a[0] == 0 && a[1] == 0)
            .fold(T::zero(), |acc, a| acc + beh.prob(&[x, z], a).clone())
    };
    // Single marginals read at the other party's input 0.
    let pa = beh.marginal_at(&[0], &[1, 0])?.probs[0].clone();
    let pc = beh.marginal_at(&[1], &[0, 0])?.probs[0].clone();
    Ok(T::one() - pa - pc + p(0, 0) + p(1, 0) - p(0, 1) + p(1, 1))
}

/// Inputs and outputs `(x y z | a b c)` of the twenty joint probabilities
/// leading `I`.
const I_JOINT_TERMS: [([usize; 3], [usize; 3]); 20] = [
    ([1, 0, 1], [0, 0, 0]),
    ([0, 1, 1], [0, 0, 0]),
    ([0, 1, 1], [0, 1, 0]),
    ([1, 0, 0], [0, 0, 0]),
    ([0, 0, 0], [0, 0, 0]),
    ([0, 0, 0], [0, 1, 0]),
    ([1, 2, 1], [1, 1, 0]),
    ([1, 2, 1], [1, 2, 0]),
    ([0, 1, 0], [1, 2, 0]),
    ([1, 2, 0], [1, 2, 0]),
    ([1, 2, 0], [0, 0, 1]),
    ([1, 2, 0], [0, 1, 1]),
    ([1, 2, 1], [0, 0, 1]),
    ([0, 1, 0], [0, 0, 1]),
    ([0, 1, 0], [0, 1, 1]),
    ([0, 0, 1], [0, 0, 1]),
    ([0, 0, 1], [0, 1, 1]),
    ([0, 1, 1], [1, 2, 1]),
    ([1, 0, 0], [1, 1, 1]),
    ([1, 0, 1], [1, 1, 1]),
];

/// Conditioning context of the bracket: `B` answers 2 on input 0.
const BRACKET_B_INPUT: usize = 0;
const BRACKET_B_OUTPUT: usize = 2;

fn require_2_333_2(s: &Scenario) -> Result<()> {
    if *s != Scenario::tripartite_2_333_2() {
        return Err(Error::InvalidFunctional(format!(
            "I is defined on {{[2 2] [3 3 3] [2 2]}}, not {s}"
        )));
    }
    Ok(())
}

/// `I` on a non-signaling behavior of `{[2 2] [3 3 3] [2 2]}`.
pub fn evaluate_i<T: Scalar>(beh: &Behavior<T>) -> Result<T> {
    require_2_333_2(beh.scenario())?;
    beh.require_nonsignaling()?;
    let mut total = T::zero();
    for (x, a) in I_JOINT_TERMS {
        total = total + beh.prob(&x, &a).clone();
    }
    let cond = beh.conditioned(1, BRACKET_B_INPUT, BRACKET_B_OUTPUT)?;
    if let Some(ac) = &cond.behavior {
        total = total + cond.context.weight.clone() * ch_bracket(ac)?;
    }
    Ok(total)
}

/// Labels and joint-coordinate vectors of the nonnegative pieces of `I`:
/// the twenty probabilities and the weighted bracket, the latter expanded
/// as joint probabilities at `b = 2, y = 0`.
pub fn i_terms() -> Vec<(String, Vec<Rational>)> {
    let s = Scenario::tripartite_2_333_2();
    let n = s.coordinate_count();
    let digits = |v: &[usize]| v.iter().map(|d| d.to_string()).collect::<String>();
    let mut out = Vec::new();
    for (x, a) in I_JOINT_TERMS {
        let mut v = vec![Rational::zero(); n];
        v[s.index(&x, &a)] = Rational::one();
        out.push((format!("P_ABC({}|{})", digits(&a), digits(&x)), v));
    }
    let mut v = vec![Rational::zero(); n];
    let y = BRACKET_B_INPUT;
    let b = BRACKET_B_OUTPUT;
    let mut add = |x: usize, z: usize, a: Option<usize>, c: Option<usize>, sign: i64| {
        for av in 0..2 {
            for cv in 0..2 {
                if a.is_some_and(|a| a != av) || c.is_some_and(|c| c != cv) {
                    continue;
                }
                v[s.index(&[x, y, z], &[av, b, cv])] += Rational::from_integer(sign.into());
            }
        }
    };
    add(0, 0, None, None, 1);
    add(1, 0, Some(0), None, -1);
    add(0, 0, None, Some(0), -1);
    add(0, 0, Some(0), Some(0), 1);
    add(1, 0, Some(0), Some(0), 1);
    add(0, 1, Some(0), Some(0), -1);
    add(1, 1, Some(0), Some(0), 1);
    out.push(("P_B(2|0) x CH_AC|B".to_string(), v));
    out
}

/// Why a piece of `I` is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermStatus {
    Probability,
    /// Weighted CH expression, nonnegative under conditioned locality.
    ConditionedCh,
}

/// Exact witness that `I - S - 2` vanishes on the non-signaling subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCertificate {
    pub terms: Vec<(String, TermStatus)>,
    /// Coefficients of `I - S` over joint coordinates.
    pub residual: Vec<Rational>,
    /// Constant on the right: `I - S` equals this on the subspace.
    pub constant: Rational,
    /// Multipliers of the non-signaling and normalization equalities, in
    /// [`ns_hrep`] order.
    pub combination: Vec<Rational>,
}

impl DecompositionCertificate {
    /// Re-checks `residual = sum combination_i * E_i` and
    /// `constant = sum combination_i * d_i` exactly.
    pub fn check(&self) -> Result<()> {
        let h = ns_hrep(&Scenario::tripartite_2_333_2());
        let eqs = h.equalities();
        if eqs.len() != self.combination.len() {
            return Err(Error::DecompositionFailed("combination length".into()));
        }
        let mut acc = vec![Rational::zero(); h.dim()];
        let mut rhs = Rational::zero();
        for (row, l) in eqs.iter().zip(&self.combination) {
            if l.is_zero() {
                continue;
            }
            for (a, c) in acc.iter_mut().zip(&row.coeffs) {
                if !c.is_zero() {
                    *a += l * c;
                }
            }
            rhs += l * &row.rhs;
        }
        if acc != self.residual || rhs != self.constant {
            return Err(Error::DecompositionFailed(
                "stated combination does not reproduce the residual".into(),
            ));
        }
        Ok(())
    }
}

/// Certificate for `I = S + 2` with the shipped `S`.
pub fn verify_decomposition() -> Result<DecompositionCertificate> {
    verify_decomposition_of(&functional_s())
}

/// Certificate for `I = s + 2`; fails when `I - s - 2` is not a
/// combination of the equality constraints.
pub fn verify_decomposition_of(s_functional: &LinearFunctional) -> Result<DecompositionCertificate> {
    let scenario = Scenario::tripartite_2_333_2();
    if *s_functional.scenario() != scenario {
        return Err(Error::InvalidFunctional(format!(
            "functional over {} instead of {scenario}",
            s_functional.scenario()
        )));
    }
    let pieces = i_terms();
    let n = scenario.coordinate_count();
    let mut residual = vec![Rational::zero(); n];
    for (_, v) in &pieces {
        for (r, c) in residual.iter_mut().zip(v) {
            *r += c;
        }
    }
    for (r, c) in residual.iter_mut().zip(s_functional.joint_vector()) {
        *r -= c;
    }
    let constant = Rational::from_integer(2.into());

    // Solve E^T lambda = residual, d . lambda = constant.
    let h = ns_hrep(&scenario);
    let eqs = h.equalities();
    let mut system: Vec<Vec<Rational>> = (0..n)
        .map(|j| eqs.iter().map(|r| r.coeffs[j].clone()).collect())
        .collect();
    system.push(eqs.iter().map(|r| r.rhs.clone()).collect());
    let mut target = residual.clone();
    target.push(constant.clone());
    let combination = solve(&system, &target).ok_or_else(|| {
        Error::DecompositionFailed("I - S - 2 is not in the span of the equality constraints".into())
    })?;
    let terms = pieces
        .into_iter()
        .enumerate()
        .map(|(k, (label, _))| {
            let status = if k < I_JOINT_TERMS.len() {
                TermStatus::Probability
            } else {
                TermStatus::ConditionedCh
            };
            (label, status)
        })
        .collect();
    let cert = DecompositionCertificate {
        terms,
        residual,
        constant,
        combination,
    };
    cert.check()?;
    Ok(cert)
}
