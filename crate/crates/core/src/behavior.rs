//! Behaviors `P(outputs | inputs)` over a scenario, their marginals and
//! non-signaling deficit, and conditioning on one party's input/output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{NumericMode, Rational, Scalar};
use crate::scenario::{mixed_radix_tuples, Scenario};

/// A full conditional probability table.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior<T> {
    scenario: Scenario,
    table: Vec<T>,
}

pub type DoubleBehavior = Behavior<f64>;
pub type RationalBehavior = Behavior<Rational>;

/// Distribution of a subset of parties' outputs at fixed inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal<T> {
    pub parties: Vec<usize>,
    pub inputs: Vec<usize>,
    shape: Vec<usize>,
    pub probs: Vec<T>,
}

impl<T> Marginal<T> {
    pub fn get(&self, outputs: &[usize]) -> &T {
        let idx = outputs
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&a, &n)| acc * n + a);
        &self.probs[idx]
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }
}

/// The conditioned party's input and output, with its marginal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningContext<T> {
    pub party: usize,
    pub input: usize,
    pub output: usize,
    pub weight: T,
}

/// Result of conditioning: `behavior` is `None` when the weight falls below
/// the conditioning threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedBehavior<T> {
    pub context: ConditioningContext<T>,
    pub behavior: Option<Behavior<T>>,
}

impl<T> ConditionedBehavior<T> {
    pub fn is_flagged_empty(&self) -> bool {
        self.behavior.is_none()
    }
}

impl<T: Scalar> Behavior<T> {
    /// Validates length, positivity and per-input normalization within the
    /// numeric mode's tolerance.
    pub fn new(scenario: Scenario, table: Vec<T>) -> Result<Self> {
        let beh = Behavior { scenario, table };
        beh.validate()?;
        Ok(beh)
    }

    /// Builds from a table without checking positivity or normalization.
    /// Used for affine points of the normalization subspace.
    pub fn from_table_unchecked(scenario: Scenario, table: Vec<T>) -> Result<Self> {
        if table.len() != scenario.coordinate_count() {
            return Err(Error::DimensionMismatch {
                expected: scenario.coordinate_count(),
                found: table.len(),
            });
        }
        Ok(Behavior { scenario, table })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> T) -> Result<Self> {
        let table = scenario
            .coordinates()
            .iter()
            .map(|(x, a)| f(x, a))
            .collect();
        Behavior::new(scenario, table)
    }

    /// Every input's outputs uniformly distributed.
    pub fn uniform(scenario: Scenario) -> Self {
        let mut table = Vec::with_capacity(scenario.coordinate_count());
        for inputs in scenario.input_tuples() {
            let n = scenario.block_len(&inputs);
            let p = T::one() / T::from_usize(n);
            table.extend(std::iter::repeat_n(p, n));
        }
        Behavior { scenario, table }
    }

    fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if self.table.len() != s.coordinate_count() {
            return Err(Error::DimensionMismatch {
                expected: s.coordinate_count(),
                found: self.table.len(),
            });
        }
        let tol = T::tolerance();
        for inputs in s.input_tuples() {
            let off = s.block_offset(&inputs);
            let block = &self.table[off..off + s.block_len(&inputs)];
            let mut sum = T::zero();
            for (k, p) in block.iter().enumerate() {
                if *p < -tol.clone() {
                    return Err(Error::InvalidBehavior(format!(
                        "negative entry {:e} at inputs {inputs:?}, output #{k}",
                        p.to_f64()
                    )));
                }
                sum = sum + p.clone();
            }
            if (sum.clone() - T::one()).abs() > tol {
                return Err(Error::InvalidBehavior(format!(
                    "inputs {inputs:?} sum to {:e}",
                    sum.to_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn into_table(self) -> Vec<T> {
        self.table
    }

    pub fn prob(&self, inputs: &[usize], outputs: &[usize]) -> &T {
        &self.table[self.scenario.index(inputs, outputs)]
    }

    /// Sums out the parties not in `parties` at the full input tuple
    /// `full_inputs`. No non-signaling assumption is made.
    pub fn marginal_at(&self, parties: &[usize], full_inputs: &[usize]) -> Result<Marginal<T>> {
        let s = &self.scenario;
        check_party_subset(s, parties)?;
        if full_inputs.len() != s.num_parties()
            || full_inputs
                .iter()
                .enumerate()
                .any(|(p, &x)| x >= s.num_inputs(p))
        {
            return Err(Error::InvalidBehavior(format!(
                "input tuple {full_inputs:?} out of range"
            )));
        }
        let shape: Vec<usize> = parties
            .iter()
            .map(|&p| s.num_outputs(p, full_inputs[p]))
            .collect();
        let mut probs = vec![T::zero(); shape.iter().product()];
        let off = s.block_offset(full_inputs);
        for (k, outputs) in s.output_tuples(full_inputs).iter().enumerate() {
            let idx = parties
                .iter()
                .zip(&shape)
                .fold(0, |acc, (&p, &n)| acc * n + outputs[p]);
            probs[idx] = probs[idx].clone() + self.table[off + k].clone();
        }
        Ok(Marginal {
            parties: parties.to_vec(),
            inputs: parties.iter().map(|&p| full_inputs[p]).collect(),
            shape,
            probs,
        })
    }

    /// Input-independent marginal of `parties` at their `inputs`. Requires
    /// the behavior to be non-signaling within tolerance.
    pub fn marginal(&self, parties: &[usize], inputs: &[usize]) -> Result<Marginal<T>> {
        self.require_nonsignaling()?;
        self.marginal_fixing_omitted(parties, inputs)
    }

    /// Marginal with every omitted party's input fixed to 0.
    pub(crate) fn marginal_fixing_omitted(
        &self,
        parties: &[usize],
        inputs: &[usize],
    ) -> Result<Marginal<T>> {
        if parties.len() != inputs.len() {
            return Err(Error::InvalidBehavior(
                "one input per marginal party required".into(),
            ));
        }
        let mut full = vec![0; self.scenario.num_parties()];
        for (&p, &x) in parties.iter().zip(inputs) {
            if p >= full.len() {
                return Err(Error::InvalidBehavior(format!("no party {p}")));
            }
            full[p] = x;
        }
        self.marginal_at(parties, &full)
    }

    pub fn require_nonsignaling(&self) -> Result<()> {
        let deficit = self.nonsignaling_deficit();
        if deficit > T::tolerance() {
            return Err(Error::Signaling {
                deficit: deficit.to_f64(),
                tolerance: T::tolerance().to_f64(),
            });
        }
        Ok(())
    }

    /// Largest change of any marginal over all-but-one parties when the
    /// omitted party switches input. Zero exactly when the non-signaling
    /// equalities hold.
    pub fn nonsignaling_deficit(&self) -> T {
        let s = &self.scenario;
        let n = s.num_parties();
        let mut worst = T::zero();
        if n < 2 {
            return worst;
        }
        for omitted in 0..n {
            let others: Vec<usize> = (0..n).filter(|&p| p != omitted).collect();
            let other_radices: Vec<usize> = others.iter().map(|&p| s.num_inputs(p)).collect();
            for other_inputs in mixed_radix_tuples(&other_radices) {
                let mut reference: Option<Vec<T>> = None;
                for x in 0..s.num_inputs(omitted) {
                    let mut full = vec![0; n];
                    for (&p, &xi) in others.iter().zip(&other_inputs) {
                        full[p] = xi;
                    }
                    full[omitted] = x;
                    let probs = self
                        .marginal_at(&others, &full)
                        .expect("valid parties")
                        .probs;
                    match &reference {
                        None => reference = Some(probs),
                        Some(r) => {
                            for (a, b) in r.iter().zip(&probs) {
                                let d = (a.clone() - b.clone()).abs();
                                if d > worst {
                                    worst = d;
                                }
                            }
                        }
                    }
                }
            }
        }
        worst
    }

    /// The behavior of `parties` alone, with every omitted party's input
    /// fixed to 0. Only meaningful for non-signaling behaviors.
    pub fn marginal_behavior(&self, parties: &[usize]) -> Result<Behavior<T>> {
        let sub = self.scenario.restrict(parties)?;
        let mut table = vec![T::zero(); sub.coordinate_count()];
        for xs in sub.input_tuples() {
            let mut full = vec![0; self.scenario.num_parties()];
            for (&p, &x) in parties.iter().zip(&xs) {
                full[p] = x;
            }
            let m = self.marginal_at(parties, &full)?;
            for (k, outs) in sub.output_tuples(&xs).iter().enumerate() {
                table[sub.block_offset(&xs) + k] = m.get(outs).clone();
            }
        }
        Behavior::from_table_unchecked(sub, table)
    }

    /// `P(rest | rest inputs, party input = y, party output = b)` over the
    /// remaining parties, together with the weight `P(b|y)`.
    pub fn conditioned(&self, party: usize, input: usize, output: usize) -> Result<ConditionedBehavior<T>> {
        let s = &self.scenario;
        if party >= s.num_parties() || input >= s.num_inputs(party) || output >= s.num_outputs(party, input) {
            return Err(Error::InvalidBehavior(format!(
                "conditioning context (party {party}, input {input}, output {output}) out of range"
            )));
        }
        self.require_nonsignaling()?;
        let weight = self.marginal_fixing_omitted(&[party], &[input])?.probs[output].clone();
        let context = ConditioningContext {
            party,
            input,
            output,
            weight: weight.clone(),
        };
        if weight <= T::conditioning_threshold() {
            return Ok(ConditionedBehavior {
                context,
                behavior: None,
            });
        }
        let rest: Vec<usize> = (0..s.num_parties()).filter(|&p| p != party).collect();
        let sub = s.restrict(&rest)?;
        let mut table = Vec::with_capacity(sub.coordinate_count());
        for (sub_inputs, sub_outputs) in sub.coordinates() {
            let mut inputs = sub_inputs.clone();
            inputs.insert(party, input);
            let mut outputs = sub_outputs.clone();
            outputs.insert(party, output);
            table.push(self.prob(&inputs, &outputs).clone() / weight.clone());
        }
        Ok(ConditionedBehavior {
            context,
            behavior: Some(Behavior {
                scenario: sub,
                table,
            }),
        })
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, t: &T, other: &Behavior<T>) -> Result<Behavior<T>> {
        if self.scenario != other.scenario {
            return Err(Error::InvalidBehavior("mixing across scenarios".into()));
        }
        let u = T::one() - t.clone();
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| t.clone() * a.clone() + u.clone() * b.clone())
            .collect();
        Ok(Behavior {
            scenario: self.scenario.clone(),
            table,
        })
    }

    pub fn to_double(&self) -> DoubleBehavior {
        Behavior {
            scenario: self.scenario.clone(),
            table: self.table.iter().map(Scalar::to_f64).collect(),
        }
    }

    pub fn to_json(&self) -> BehaviorFile {
        let mut table = BTreeMap::new();
        for ((x, a), p) in self.scenario.coordinates().iter().zip(&self.table) {
            table.insert(coordinate_key(x, a), p.to_text());
        }
        BehaviorFile {
            scenario: self.scenario.outputs().to_vec(),
            mode: T::MODE,
            table,
        }
    }

    /// Reads a behavior file; entries absent from the table are zero.
    pub fn from_json(file: &BehaviorFile) -> Result<Self> {
        if file.mode != T::MODE {
            return Err(Error::Parse(format!(
                "behavior file is in {:?} mode, expected {:?}",
                file.mode,
                T::MODE
            )));
        }
        let scenario = Scenario::new(file.scenario.clone())?;
        let mut table = vec![T::zero(); scenario.coordinate_count()];
        for (key, value) in &file.table {
            let (x, a) = parse_coordinate_key(key)?;
            if !scenario.contains(&x, &a) {
                return Err(Error::Parse(format!("coordinate {key:?} outside scenario")));
            }
            table[scenario.index(&x, &a)] = T::parse_text(value)?;
        }
        Behavior::new(scenario, table)
    }
}

impl RationalBehavior {
    /// Rationalizes every entry with the given denominator bound, then
    /// renormalizes each input block exactly.
    pub fn rationalized(beh: &DoubleBehavior, max_den: u64) -> Result<Self> {
        let s = beh.scenario().clone();
        let mut table: Vec<Rational> = beh
            .table()
            .iter()
            .map(|&p| crate::scalar::rationalize(p.max(0.0), max_den))
            .collect();
        for inputs in s.input_tuples() {
            let off = s.block_offset(&inputs);
            let len = s.block_len(&inputs);
            let sum: Rational = table[off..off + len].iter().cloned().sum();
            for p in &mut table[off..off + len] {
                *p = p.clone() / sum.clone();
            }
        }
        Behavior::new(s, table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFile {
    pub scenario: Vec<Vec<usize>>,
    pub mode: NumericMode,
    pub table: BTreeMap<String, String>,
}

pub fn coordinate_key(inputs: &[usize], outputs: &[usize]) -> String {
    let join = |v: &[usize]| {
        v.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!("{}|{}", join(inputs), join(outputs))
}

fn parse_coordinate_key(key: &str) -> Result<(Vec<usize>, Vec<usize>)> {
    let err = || Error::Parse(format!("bad coordinate key {key:?}"));
    let (x, a) = key.split_once('|').ok_or_else(err)?;
    let parse = |s: &str| {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| err()))
            .collect::<Result<Vec<_>>>()
    };
    Ok((parse(x)?, parse(a)?))
}

fn check_party_subset(s: &Scenario, parties: &[usize]) -> Result<()> {
    if parties.windows(2).any(|w| w[0] >= w[1]) || parties.iter().any(|&p| p >= s.num_parties()) {
        return Err(Error::InvalidBehavior(format!(
            "party subset {parties:?} must be strictly increasing and in range"
        )));
    }
    Ok(())
}

/// A local deterministic strategy: each party's output as a function of its
/// input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    outputs: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    pub fn new(outputs: Vec<Vec<usize>>, scenario: &Scenario) -> Result<Self> {
        let ok = outputs.len() == scenario.num_parties()
            && outputs.iter().enumerate().all(|(p, f)| {
                f.len() == scenario.num_inputs(p)
                    && f.iter()
                        .enumerate()
                        .all(|(x, &a)| a < scenario.num_outputs(p, x))
            });
        if !ok {
            return Err(Error::InvalidBehavior(format!(
                "strategy {outputs:?} does not fit scenario {scenario}"
            )));
        }
        Ok(DeterministicStrategy { outputs })
    }

    pub fn output(&self, party: usize, input: usize) -> usize {
        self.outputs[party][input]
    }

    pub fn outputs(&self) -> &[Vec<usize>] {
        &self.outputs
    }

    /// All strategies of the scenario, in lexicographic order of the
    /// flattened `(party, input)` table.
    pub fn enumerate(scenario: &Scenario) -> Vec<DeterministicStrategy> {
        let radices: Vec<usize> = scenario.outputs().iter().flatten().copied().collect();
        mixed_radix_tuples(&radices)
            .into_iter()
            .map(|flat| {
                let mut it = flat.into_iter();
                let outputs = scenario
                    .outputs()
                    .iter()
                    .map(|party| (0..party.len()).map(|_| it.next().unwrap()).collect())
                    .collect();
                DeterministicStrategy { outputs }
            })
            .collect()
    }

    pub fn behavior<T: Scalar>(&self, scenario: &Scenario) -> Behavior<T> {
        let table = scenario
            .coordinates()
            .iter()
            .map(|(x, a)| {
                let hit = x
                    .iter()
                    .zip(a)
                    .enumerate()
                    .all(|(p, (&xi, &ai))| self.outputs[p][xi] == ai);
                if hit {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        Behavior {
            scenario: scenario.clone(),
            table,
        }
    }
}

/// Exact behavior of a deterministic strategy.
pub fn deterministic_behavior(
    strategy: &DeterministicStrategy,
    scenario: &Scenario,
) -> Result<RationalBehavior> {
    let checked = DeterministicStrategy::new(strategy.outputs.clone(), scenario)?;
    Ok(checked.behavior(scenario))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num::Zero;

    fn s222() -> Scenario {
        Scenario::uniform(3, 2, 2).unwrap()
    }

    fn all_zeros(s: &Scenario) -> RationalBehavior {
        let outputs = s.outputs().iter().map(|p| vec![0; p.len()]).collect();
        deterministic_behavior(&DeterministicStrategy::new(outputs, s).unwrap(), s).unwrap()
    }

    #[test]
    fn deterministic_point_mass_marginal() {
        let s = Scenario::tripartite_2_333_2();
        let beh = all_zeros(&s);
        let m = beh.marginal(&[0, 1], &[0, 0]).unwrap();
        assert_eq!(m.get(&[0, 0]), &int(1));
        assert_eq!(m.probs.iter().filter(|p| p.is_zero()).count(), 5);
    }

    #[test]
    fn uniform_single_party_marginal() {
        let beh = RationalBehavior::uniform(s222());
        for x in 0..2 {
            let m = beh.marginal(&[0], &[x]).unwrap();
            assert_eq!(m.probs, vec![rat(1, 2), rat(1, 2)]);
        }
    }

    #[test]
    fn strategy_count_matches_enumeration() {
        let s = Scenario::tripartite_2_333_2();
        let all = DeterministicStrategy::enumerate(&s);
        assert_eq!(all.len(), 432);
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 432);
    }

    #[test]
    fn deterministic_behaviors_are_nonsignaling() {
        let s = Scenario::tripartite_2_333_2();
        for strat in DeterministicStrategy::enumerate(&s).iter().step_by(7) {
            let beh: RationalBehavior = strat.behavior(&s);
            assert!(beh.nonsignaling_deficit().is_zero());
        }
    }

    #[test]
    fn product_distribution_has_zero_deficit() {
        let s = s222();
        let singles = [[0.3, 0.7], [0.6, 0.4], [0.25, 0.75]];
        let beh = DoubleBehavior::from_fn(s, |_, a| {
            a.iter().enumerate().map(|(p, &ai)| singles[p][ai]).product()
        })
        .unwrap();
        assert_eq!(beh.nonsignaling_deficit(), 0.0);
    }

    #[test]
    fn signaling_from_c_to_a_has_unit_deficit() {
        // A outputs C's input; B and C always output 0.
        let beh = RationalBehavior::from_fn(s222(), |x, a| {
            if a[0] == x[2] && a[1] == 0 && a[2] == 0 {
                int(1)
            } else {
                int(0)
            }
        })
        .unwrap();
        assert_eq!(beh.nonsignaling_deficit(), int(1));
        assert!(matches!(
            beh.marginal(&[0], &[0]),
            Err(Error::Signaling { .. })
        ));
        // Input-specific marginals remain available.
        let m = beh.marginal_at(&[0], &[0, 0, 1]).unwrap();
        assert_eq!(m.probs, vec![int(0), int(1)]);
    }

    #[test]
    fn conditioning_on_certain_and_impossible_outcomes() {
        let s = Scenario::tripartite_2_333_2();
        let beh = all_zeros(&s);
        let c = beh.conditioned(1, 0, 0).unwrap();
        assert_eq!(c.context.weight, int(1));
        let ac = c.behavior.unwrap();
        assert_eq!(ac.scenario().outputs(), &[vec![2, 2], vec![2, 2]]);
        assert_eq!(ac.prob(&[1, 1], &[0, 0]), &int(1));
        let c = beh.conditioned(1, 0, 1).unwrap();
        assert!(c.is_flagged_empty());
        assert!(c.context.weight.is_zero());
    }

    #[test]
    fn conditioned_blocks_reconstruct_ac_marginal() {
        let s = Scenario::tripartite_2_333_2();
        let strategies = DeterministicStrategy::enumerate(&s);
        let a: RationalBehavior = strategies[5].behavior(&s);
        let b: RationalBehavior = strategies[200].behavior(&s);
        let c: RationalBehavior = strategies[431].behavior(&s);
        let beh = a.mix(&rat(1, 3), &b.mix(&rat(2, 5), &c).unwrap()).unwrap();
        for y in 0..3 {
            let mut sum = vec![Rational::zero(); 16];
            for b in 0..3 {
                let cond = beh.conditioned(1, y, b).unwrap();
                if let Some(ac) = cond.behavior {
                    for (acc, p) in sum.iter_mut().zip(ac.table()) {
                        *acc = acc.clone() + cond.context.weight.clone() * p.clone();
                    }
                }
            }
            let mut k = 0;
            for x in 0..2 {
                for z in 0..2 {
                    let m = beh.marginal_at(&[0, 2], &[x, y, z]).unwrap();
                    for v in &m.probs {
                        assert_eq!(&sum[k], v);
                        k += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_unnormalized_tables() {
        let s = s222();
        let n = s.coordinate_count();
        assert!(RationalBehavior::new(s.clone(), vec![int(0); n]).is_err());
        assert!(RationalBehavior::new(s, vec![int(0); n - 1]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = Scenario::tripartite_2_333_2();
        let beh = all_zeros(&s).mix(&rat(1, 3), &RationalBehavior::uniform(s)).unwrap();
        let text = serde_json::to_string(&beh.to_json()).unwrap();
        let file: BehaviorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(RationalBehavior::from_json(&file).unwrap(), beh);
        assert!(DoubleBehavior::from_json(&file).is_err());
    }
}
