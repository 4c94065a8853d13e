//! JSON formats for states and rank-1 measurement families.
//!
//! Complex numbers are `[re, im]` pairs. A measurement file lists, per input,
//! the vectors of all but the last outcome; the last outcome completes the
//! POVM to the identity.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{parse_state, ComplexVector, PartyMeasurements};
use crate::error::{Error, Result};
use crate::scenario::{party_index, party_name};

pub const SHIPPED_STATE: &str = include_str!("../../../../data/appendixA_state.json");
pub const SHIPPED_MEASUREMENTS: &str = include_str!("../../../../data/appendixA_measurements.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub amplitudes: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementFile {
    pub party: String,
    pub inputs: Vec<Vec<Vec<[f64; 2]>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(MeasurementFile),
    Many(Vec<MeasurementFile>),
}

pub fn load_state(text: &str) -> Result<(Vec<usize>, ComplexVector)> {
    let file: StateFile = serde_json::from_str(text)?;
    let amps = file
        .amplitudes
        .iter()
        .map(|(k, &[re, im])| (k.clone(), Complex64::new(re, im)))
        .collect();
    let psi = parse_state(&file.dims, &amps)?;
    Ok((file.dims, psi))
}

/// Parses one measurement object or an array of them and returns the
/// parties ordered by name. Every party `A, B, ...` up to the last named
/// one must be present exactly once.
pub fn load_measurements(text: &str) -> Result<Vec<PartyMeasurements>> {
    let files = match serde_json::from_str::<OneOrMany>(text)? {
        OneOrMany::One(f) => vec![f],
        OneOrMany::Many(v) => v,
    };
    let mut by_party: BTreeMap<usize, PartyMeasurements> = BTreeMap::new();
    for file in &files {
        let p = party_index(&file.party)?;
        let dim = file
            .inputs
            .iter()
            .flatten()
            .map(Vec::len)
            .next()
            .ok_or_else(|| Error::Parse(format!("party {} lists no vectors", file.party)))?;
        let inputs: Vec<Vec<ComplexVector>> = file
            .inputs
            .iter()
            .map(|vectors| {
                vectors
                    .iter()
                    .map(|v| ComplexVector::new(v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
                    .collect()
            })
            .collect();
        let m = PartyMeasurements::from_rank1_vectors(&inputs, dim)?;
        if by_party.insert(p, m).is_some() {
            return Err(Error::Parse(format!("party {} listed twice", file.party)));
        }
    }
    let parties: Vec<PartyMeasurements> = by_party.values().cloned().collect();
    if by_party.keys().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::Parse("measurement parties must be A, B, ... without gaps".into()));
    }
    Ok(parties)
}

/// The shipped state and measurements.
pub fn shipped_point() -> Result<(ComplexVector, Vec<PartyMeasurements>)> {
    let (_, psi) = load_state(SHIPPED_STATE)?;
    let parties = load_measurements(SHIPPED_MEASUREMENTS)?;
    Ok((psi, parties))
}

pub fn state_to_json(dims: &[usize], psi: &ComplexVector) -> StateFile {
    let mut amplitudes = BTreeMap::new();
    for (idx, z) in psi.entries().iter().enumerate() {
        if z.norm() == 0.0 {
            continue;
        }
        let mut rem = idx;
        let mut digits = vec![0; dims.len()];
        for (d, &n) in digits.iter_mut().zip(dims).rev() {
            *d = rem % n;
            rem /= n;
        }
        let label: String = digits.iter().map(|d| d.to_string()).collect();
        amplitudes.insert(label, [z.re, z.im]);
    }
    StateFile {
        dims: dims.to_vec(),
        amplitudes,
    }
}

/// Writes projective measurements given by unitary bases, listing all
/// columns but the last.
pub fn measurements_to_json(party: usize, bases: &[DMatrix<Complex64>]) -> MeasurementFile {
    let inputs = bases
        .iter()
        .map(|u| {
            (0..u.ncols().saturating_sub(1))
                .map(|k| u.column(k).iter().map(|z| [z.re, z.im]).collect())
                .collect()
        })
        .collect();
    MeasurementFile {
        party: party_name(party),
        inputs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_state_matches_printed_digits() {
        let file: StateFile = serde_json::from_str(SHIPPED_STATE).unwrap();
        assert_eq!(file.dims, vec![2, 3, 2]);
        assert_eq!(file.amplitudes.len(), 6);
        assert_eq!(file.amplitudes["021"], [0.6769, 0.0]);
        assert_eq!(file.amplitudes["111"], [-0.5782, -0.3330]);

        let (_, psi) = load_state(SHIPPED_STATE).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let norm: f64 = file
            .amplitudes
            .values()
            .map(|[re, im]| re * re + im * im)
            .sum::<f64>()
            .sqrt();
        assert!((psi.entries()[5].norm() - 0.6769 / norm).abs() < 1e-12);
    }

    #[test]
    fn shipped_measurements_have_expected_shape() {
        let parties = load_measurements(SHIPPED_MEASUREMENTS).unwrap();
        assert_eq!(parties.len(), 3);
        assert_eq!(parties[0].outcome_counts(), vec![2, 2]);
        assert_eq!(parties[1].outcome_counts(), vec![3, 3, 3]);
        assert_eq!(parties[2].outcome_counts(), vec![2, 2]);
        assert_eq!(parties[1].local_dim(), 3);
    }

    #[test]
    fn single_party_file_is_accepted() {
        let text = r#"{"party":"A","inputs":[[[[1,0],[0,0]]]]}"#;
        let parties = load_measurements(text).unwrap();
        assert_eq!(parties[0].outcome_counts(), vec![2]);
        let gap = r#"{"party":"B","inputs":[[[[1,0],[0,0]]]]}"#;
        assert!(load_measurements(gap).is_err());
    }

    #[test]
    fn state_json_round_trip() {
        let (dims, psi) = load_state(SHIPPED_STATE).unwrap();
        let text = serde_json::to_string(&state_to_json(&dims, &psi)).unwrap();
        let (_, again) = load_state(&text).unwrap();
        assert!((again.entries() - psi.entries()).norm() < 1e-15);
    }
}
