//! Bell scenarios and the fixed coordinate order of behavior tables.
//!
//! A scenario lists, for every party, the number of outcomes of each of its
//! inputs. Coordinates of a behavior are ordered row-major over the input
//! tuple first and the output tuple second, both lexicographic with party 0
//! most significant.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Scenario {
    outputs: Vec<Vec<usize>>,
    block_offsets: Vec<usize>,
    coordinate_count: usize,
}

impl Scenario {
    /// `outputs[p][x]` is the number of outcomes of party `p` on input `x`.
    pub fn new(outputs: Vec<Vec<usize>>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidScenario("no parties".into()));
        }
        for (p, party) in outputs.iter().enumerate() {
            if party.is_empty() {
                return Err(Error::InvalidScenario(format!(
                    "party {} has no inputs",
                    party_name(p)
                )));
            }
            if party.contains(&0) {
                return Err(Error::InvalidScenario(format!(
                    "party {} has an input with no outcomes",
                    party_name(p)
                )));
            }
        }
        let mut scenario = Scenario {
            outputs,
            block_offsets: Vec::new(),
            coordinate_count: 0,
        };
        let mut offset = 0;
        for inputs in scenario.input_tuples() {
            scenario.block_offsets.push(offset);
            offset += scenario.block_len(&inputs);
        }
        scenario.coordinate_count = offset;
        Ok(scenario)
    }

    /// The scenario of the tripartite inequality: two binary parties around a
    /// ternary middle party.
    pub fn tripartite_2_333_2() -> Self {
        Scenario::new(vec![vec![2, 2], vec![3, 3, 3], vec![2, 2]]).expect("valid scenario")
    }

    /// Every party with `inputs` inputs of `outcomes` outcomes each.
    pub fn uniform(parties: usize, inputs: usize, outcomes: usize) -> Result<Self> {
        Scenario::new(vec![vec![outcomes; inputs]; parties])
    }

    pub fn outputs(&self) -> &[Vec<usize>] {
        &self.outputs
    }

    pub fn num_parties(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_inputs(&self, party: usize) -> usize {
        self.outputs[party].len()
    }

    pub fn num_outputs(&self, party: usize, input: usize) -> usize {
        self.outputs[party][input]
    }

    pub fn coordinate_count(&self) -> usize {
        self.coordinate_count
    }

    pub fn input_tuple_count(&self) -> usize {
        self.outputs.iter().map(Vec::len).product()
    }

    /// Number of output tuples for a given input tuple.
    pub fn block_len(&self, inputs: &[usize]) -> usize {
        inputs
            .iter()
            .enumerate()
            .map(|(p, &x)| self.outputs[p][x])
            .product()
    }

    /// All input tuples in lexicographic order.
    pub fn input_tuples(&self) -> Vec<Vec<usize>> {
        let radices: Vec<usize> = self.outputs.iter().map(Vec::len).collect();
        mixed_radix_tuples(&radices)
    }

    /// All output tuples for the given input tuple in lexicographic order.
    pub fn output_tuples(&self, inputs: &[usize]) -> Vec<Vec<usize>> {
        let radices: Vec<usize> = inputs
            .iter()
            .enumerate()
            .map(|(p, &x)| self.outputs[p][x])
            .collect();
        mixed_radix_tuples(&radices)
    }

    /// Every `(inputs, outputs)` pair in coordinate order.
    pub fn coordinates(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut coords = Vec::with_capacity(self.coordinate_count);
        for inputs in self.input_tuples() {
            for outputs in self.output_tuples(&inputs) {
                coords.push((inputs.clone(), outputs));
            }
        }
        coords
    }

    pub fn input_tuple_index(&self, inputs: &[usize]) -> usize {
        inputs
            .iter()
            .enumerate()
            .fold(0, |acc, (p, &x)| acc * self.outputs[p].len() + x)
    }

    pub fn block_offset(&self, inputs: &[usize]) -> usize {
        self.block_offsets[self.input_tuple_index(inputs)]
    }

    /// Coordinate index of `P(outputs | inputs)`. Panics on out-of-range labels.
    pub fn index(&self, inputs: &[usize], outputs: &[usize]) -> usize {
        debug_assert!(self.contains(inputs, outputs));
        let within = outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (p, &a)| acc * self.outputs[p][inputs[p]] + a);
        self.block_offset(inputs) + within
    }

    pub fn contains(&self, inputs: &[usize], outputs: &[usize]) -> bool {
        inputs.len() == self.num_parties()
            && outputs.len() == self.num_parties()
            && inputs.iter().zip(outputs).enumerate().all(|(p, (&x, &a))| {
                x < self.outputs[p].len() && a < self.outputs[p][x]
            })
    }

    /// The scenario restricted to a subset of parties, in the given order.
    pub fn restrict(&self, parties: &[usize]) -> Result<Scenario> {
        Scenario::new(parties.iter().map(|&p| self.outputs[p].clone()).collect())
    }

    /// Number of deterministic strategies, `prod_p prod_x outputs[p][x]`.
    pub fn strategy_count(&self) -> usize {
        self.outputs.iter().flatten().product()
    }

    /// Parses the bracket notation `{[2 2] [3 3 3] [2 2]}`.
    pub fn parse_notation(s: &str) -> Result<Scenario> {
        let err = || Error::Parse(format!("bad scenario notation {s:?}"));
        let body = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut parties = Vec::new();
        for chunk in body.split('[').skip(1) {
            let inner = chunk.split(']').next().ok_or_else(err)?;
            let counts = inner
                .split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| err()))
                .collect::<Result<Vec<_>>>()?;
            parties.push(counts);
        }
        if parties.is_empty() {
            return Err(err());
        }
        Scenario::new(parties)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .outputs
            .iter()
            .map(|p| {
                let inner: Vec<String> = p.iter().map(|o| o.to_string()).collect();
                format!("[{}]", inner.join(" "))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

impl TryFrom<Vec<Vec<usize>>> for Scenario {
    type Error = Error;

    fn try_from(value: Vec<Vec<usize>>) -> Result<Self> {
        Scenario::new(value)
    }
}

impl From<Scenario> for Vec<Vec<usize>> {
    fn from(s: Scenario) -> Self {
        s.outputs
    }
}

/// `A`, `B`, `C`, ... for party indices.
pub fn party_name(p: usize) -> String {
    if p < 26 {
        char::from(b'A' + p as u8).to_string()
    } else {
        format!("P{p}")
    }
}

pub fn party_index(name: &str) -> Result<usize> {
    let name = name.trim();
    let bytes = name.as_bytes();
    if bytes.len() == 1 && bytes[0].is_ascii_uppercase() {
        return Ok((bytes[0] - b'A') as usize);
    }
    name.strip_prefix('P')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::Parse(format!("unknown party {name:?}")))
}

/// All tuples `t` with `t[i] < radices[i]`, lexicographic, first index most
/// significant.
pub fn mixed_radix_tuples(radices: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut cur = vec![0; radices.len()];
    loop {
        out.push(cur.clone());
        let mut i = radices.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < radices[i] {
                break;
            }
            cur[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_count_of_the_main_scenario() {
        let s = Scenario::tripartite_2_333_2();
        assert_eq!(s.coordinate_count(), 144);
        assert_eq!(s.input_tuple_count(), 12);
        assert_eq!(s.strategy_count(), 432);
    }

    #[test]
    fn index_is_row_major() {
        let s = Scenario::tripartite_2_333_2();
        assert_eq!(s.index(&[0, 0, 0], &[0, 0, 0]), 0);
        assert_eq!(s.index(&[0, 0, 0], &[0, 0, 1]), 1);
        assert_eq!(s.index(&[0, 0, 0], &[1, 2, 1]), 11);
        assert_eq!(s.index(&[0, 0, 1], &[0, 0, 0]), 12);
        assert_eq!(s.index(&[1, 2, 1], &[1, 2, 1]), 143);
        for (i, (x, a)) in s.coordinates().iter().enumerate() {
            assert_eq!(s.index(x, a), i);
        }
    }

    #[test]
    fn uneven_outputs() {
        let s = Scenario::new(vec![vec![3, 2], vec![2, 2], vec![2, 2]]).unwrap();
        assert_eq!(s.coordinate_count(), (3 + 2) * 4 * 4);
        for (i, (x, a)) in s.coordinates().iter().enumerate() {
            assert_eq!(s.index(x, a), i);
        }
    }

    #[test]
    fn notation_round_trip() {
        let s = Scenario::parse_notation("{[2 2] [3 3 3] [2 2]}").unwrap();
        assert_eq!(s, Scenario::tripartite_2_333_2());
        assert_eq!(s.to_string(), "{[2 2] [3 3 3] [2 2]}");
        assert!(Scenario::parse_notation("{}").is_err());
    }

    #[test]
    fn rejects_empty_counts() {
        assert!(Scenario::new(vec![]).is_err());
        assert!(Scenario::new(vec![vec![]]).is_err());
        assert!(Scenario::new(vec![vec![2, 0]]).is_err());
    }
}
