//! Pure states, POVMs, and the behaviors they induce.

mod io;

pub use io::{
    shipped_point, load_measurements, load_state, measurements_to_json, state_to_json,
    MeasurementFile, StateFile, SHIPPED_MEASUREMENTS, SHIPPED_STATE,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num::complex::Complex64;
use num::Zero;

use crate::behavior::DoubleBehavior;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_SUM_TOLERANCE: f64 = 1e-9;
/// Completion eigenvalues below this indicate inconsistent measurement data
/// rather than rounding.
pub const COMPLETION_INCONSISTENCY: f64 = 1e-6;
pub const PROBABILITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(DVector<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector(DVector::from_vec(entries))
    }

    pub fn from_dvector(v: DVector<Complex64>) -> Self {
        ComplexVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(ComplexVector(self.0.unscale(n)))
    }

    /// `<self|m|self>`, real part.
    pub fn expectation(&self, m: &HermitianMatrix) -> f64 {
        self.0.dotc(&(&m.0 * &self.0)).re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let dev = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidPovm(format!(
                "matrix deviates from its adjoint by {dev:e}"
            )));
        }
        Ok(HermitianMatrix(m))
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        HermitianMatrix(DMatrix::from_diagonal(&DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Eigenvalues ascending with matching unit eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        eigh(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    pub fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0.kronecker(&other.0))
    }

    pub fn scaled(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix(self.0.scale(c))
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &other.0)
    }
}

/// Dense Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
    dim: usize,
}

impl Povm {
    /// Checks positivity of every element and that they sum to the identity.
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = elements
            .first()
            .map(HermitianMatrix::dim)
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            let min = e.min_eigenvalue();
            if min < -PSD_TOLERANCE {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {min:e}"
                )));
            }
            sum += &e.0;
        }
        let dev = (sum - DMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > IDENTITY_SUM_TOLERANCE {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(Povm { elements, dim })
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.elements.len()
    }
}

/// One POVM per input of a party.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyMeasurements {
    povms: Vec<Povm>,
    local_dim: usize,
}

impl PartyMeasurements {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let local_dim = povms
            .first()
            .map(Povm::dim)
            .ok_or_else(|| Error::InvalidPovm("party has no inputs".into()))?;
        if let Some(p) = povms.iter().find(|p| p.dim() != local_dim) {
            return Err(Error::DimensionMismatch {
                expected: local_dim,
                found: p.dim(),
            });
        }
        Ok(PartyMeasurements { povms, local_dim })
    }

    /// Builds projective measurements from the listed rank-1 vectors of each
    /// input. The listed vectors of one input are replaced by the closest
    /// orthonormal family (symmetric orthonormalization) so that rounding in
    /// printed data does not break positivity of the completing element.
    pub fn from_rank1_vectors(inputs: &[Vec<ComplexVector>], dim: usize) -> Result<Self> {
        let mut povms = Vec::with_capacity(inputs.len());
        for vectors in inputs {
            if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            let family = symmetric_orthonormalize(vectors)?;
            let partial = family
                .iter()
                .map(rank1_projector)
                .collect::<Result<Vec<_>>>()?;
            povms.push(complete_povm(&partial, dim)?);
        }
        PartyMeasurements::new(povms)
    }

    /// Projective measurements whose outcomes are the columns of unitary
    /// matrices, one matrix per input.
    pub fn from_bases(bases: &[DMatrix<Complex64>]) -> Result<Self> {
        let povms = bases
            .iter()
            .map(|u| {
                let elements = (0..u.ncols())
                    .map(|k| rank1_projector(&ComplexVector(u.column(k).into_owned())))
                    .collect::<Result<Vec<_>>>()?;
                Povm::new(elements)
            })
            .collect::<Result<Vec<_>>>()?;
        PartyMeasurements::new(povms)
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn num_inputs(&self) -> usize {
        self.povms.len()
    }

    pub fn element(&self, input: usize, output: usize) -> &HermitianMatrix {
        &self.povms[input].elements[output]
    }

    /// Outcome counts per input, one row of a scenario.
    pub fn outcome_counts(&self) -> Vec<usize> {
        self.povms.iter().map(Povm::num_outcomes).collect()
    }
}

/// Reads amplitudes keyed by basis labels (one digit per subsystem) into a
/// unit vector with lexicographic basis order, first subsystem most
/// significant. Labels not present are zero.
pub fn parse_state(dims: &[usize], amplitudes: &BTreeMap<String, Complex64>) -> Result<ComplexVector> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidPovm(format!("bad subsystem dimensions {dims:?}")));
    }
    let total: usize = dims.iter().product();
    let mut entries = vec![Complex64::zero(); total];
    for (label, amp) in amplitudes {
        let digits: Vec<usize> = label
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidBasisLabel(label.clone()))?;
        if digits.len() != dims.len() || digits.iter().zip(dims).any(|(&d, &n)| d >= n) {
            return Err(Error::InvalidBasisLabel(label.clone()));
        }
        let idx = digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d);
        entries[idx] += amp;
    }
    ComplexVector::new(entries)
        .normalized()
        .map_err(|_| Error::ZeroState)
}

/// `v v^dagger / |v|^2`.
pub fn rank1_projector(v: &ComplexVector) -> Result<HermitianMatrix> {
    let u = v.normalized()?;
    Ok(HermitianMatrix(&u.0 * u.0.adjoint()))
}

/// Appends `1 - sum(partial)` as the last outcome.
pub fn complete_povm(partial: &[HermitianMatrix], dim: usize) -> Result<Povm> {
    let mut rest = DMatrix::<Complex64>::identity(dim, dim);
    for e in partial {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.dim(),
            });
        }
        rest -= &e.0;
    }
    let rest = HermitianMatrix::new(rest)?;
    let min = rest.min_eigenvalue();
    if min < -COMPLETION_INCONSISTENCY {
        return Err(Error::InvalidPovm(format!(
            "completing element has eigenvalue {min:e}: listed elements are inconsistent"
        )));
    }
    let mut elements = partial.to_vec();
    elements.push(rest);
    Povm::new(elements)
}

/// Closest orthonormal family to the given vectors: `V (V^dagger V)^{-1/2}`,
/// computed through the SVD as `U W^dagger`.
pub fn symmetric_orthonormalize(vectors: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let dim = vectors[0].dim();
    let normalized = vectors
        .iter()
        .map(ComplexVector::normalized)
        .collect::<Result<Vec<_>>>()?;
    let cols: Vec<DVector<Complex64>> = normalized.into_iter().map(|v| v.0).collect();
    let v = DMatrix::from_columns(&cols);
    if cols.len() > dim {
        return Err(Error::InvalidPovm(format!(
            "{} rank-1 vectors cannot be orthonormal in dimension {dim}",
            cols.len()
        )));
    }
    let svd = v.svd(true, true);
    if svd.singular_values.iter().any(|&s| s < 1e-8) {
        return Err(Error::InvalidPovm("listed vectors are linearly dependent".into()));
    }
    let u = svd.u.expect("requested U");
    let w_t = svd.v_t.expect("requested V^T");
    let q = u * w_t;
    Ok((0..q.ncols())
        .map(|k| ComplexVector(q.column(k).into_owned()))
        .collect())
}

/// `P(a|x) = <psi| E_{a1}^{x1} (x) ... (x) E_{an}^{xn} |psi>` for every
/// coordinate of the induced scenario.
pub fn behavior_from_quantum(state: &ComplexVector, parties: &[PartyMeasurements]) -> Result<DoubleBehavior> {
    let dim: usize = parties.iter().map(PartyMeasurements::local_dim).product();
    if dim != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    let scenario = Scenario::new(parties.iter().map(PartyMeasurements::outcome_counts).collect())?;
    let psi = state.normalized()?;
    let mut table = Vec::with_capacity(scenario.coordinate_count());
    for (inputs, outputs) in scenario.coordinates() {
        let op = tensor_element(parties, &inputs, &outputs);
        let z = psi.0.dotc(&(&op * &psi.0));
        if z.im.abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidPovm(format!(
                "imaginary residue {:e} at inputs {inputs:?} outputs {outputs:?}",
                z.im
            )));
        }
        if z.re < -PROBABILITY_TOLERANCE {
            return Err(Error::NegativeProbability {
                value: z.re,
                location: format!("inputs {inputs:?} outputs {outputs:?}"),
            });
        }
        table.push(z.re);
    }
    DoubleBehavior::new(scenario, table)
}

fn tensor_element(parties: &[PartyMeasurements], inputs: &[usize], outputs: &[usize]) -> DMatrix<Complex64> {
    let mut op = DMatrix::<Complex64>::identity(1, 1);
    for (p, party) in parties.iter().enumerate() {
        op = op.kronecker(party.element(inputs[p], outputs[p]).matrix());
    }
    op
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::Behavior;

    fn cv(entries: &[(f64, f64)]) -> ComplexVector {
        ComplexVector::new(entries.iter().map(|&(r, i)| c(r, i)).collect())
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_label_state_is_basis_vector() {
        let amps = BTreeMap::from([("000".to_string(), c(1.0, 0.0))]);
        let psi = parse_state(&[2, 3, 2], &amps).unwrap();
        assert_eq!(psi.dim(), 12);
        assert!((psi.entries()[0].re - 1.0).abs() < 1e-15);
        assert!(psi.entries().iter().skip(1).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn three_four_five_normalization() {
        let amps = BTreeMap::from([
            ("000".to_string(), c(3.0, 0.0)),
            ("111".to_string(), c(4.0, 0.0)),
        ]);
        let psi = parse_state(&[2, 3, 2], &amps).unwrap();
        assert!((psi.entries()[0].re - 0.6).abs() < 1e-15);
        assert!((psi.entries()[6 + 2 + 1].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_labels_and_zero_state() {
        let bad = BTreeMap::from([("030".to_string(), c(1.0, 0.0))]);
        assert!(matches!(parse_state(&[2, 3, 2], &bad), Err(Error::InvalidBasisLabel(_))));
        let short = BTreeMap::from([("01".to_string(), c(1.0, 0.0))]);
        assert!(matches!(parse_state(&[2, 3, 2], &short), Err(Error::InvalidBasisLabel(_))));
        let zero = BTreeMap::from([("000".to_string(), c(0.0, 0.0))]);
        assert!(matches!(parse_state(&[2, 3, 2], &zero), Err(Error::ZeroState)));
    }

    #[test]
    fn projector_examples() {
        let p = rank1_projector(&cv(&[(1.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_eq!(p, HermitianMatrix::from_real_diagonal(&[1.0, 0.0]));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p = rank1_projector(&cv(&[(h, 0.0), (h, 0.0)])).unwrap();
        assert!(p.matrix().iter().all(|z| (z.re - 0.5).abs() < 1e-15 && z.im.abs() < 1e-15));
        assert!(rank1_projector(&cv(&[(0.0, 0.0), (0.0, 0.0)])).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn projector_of_printed_vector_has_unit_spectrum() {
        let p = rank1_projector(&cv(&[(0.5289, -0.4693), (0.7071, 0.0)])).unwrap();
        let (vals, _) = p.eigh();
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((p.trace() - 1.0).abs() < 1e-12);
        assert!(max_abs(&(p.matrix() * p.matrix() - p.matrix())) < 1e-12);
    }

    #[test]
    fn completions() {
        let e0 = HermitianMatrix::from_real_diagonal(&[1.0, 0.0]);
        let povm = complete_povm(std::slice::from_ref(&e0), 2).unwrap();
        assert_eq!(povm.elements()[1], HermitianMatrix::from_real_diagonal(&[0.0, 1.0]));

        let povm = complete_povm(&[HermitianMatrix::identity(2)], 2).unwrap();
        assert!(max_abs(povm.elements()[1].matrix()) == 0.0);

        let twice = complete_povm(&[e0.clone(), e0], 2);
        assert!(matches!(twice, Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn raw_printed_qutrit_vectors_are_not_orthogonal_enough() {
        // The printed digits leave a completion eigenvalue near -3.5e-5.
        let b0 = rank1_projector(&cv(&[(0.0368, -0.2164), (0.7070, 0.0), (0.6584, 0.1357)])).unwrap();
        let b1 = rank1_projector(&cv(&[(-0.0368, 0.2164), (0.7072, 0.0), (-0.6583, -0.1357)])).unwrap();
        assert!(complete_povm(&[b0, b1], 3).is_err());
        let family = vec![
            cv(&[(0.0368, -0.2164), (0.7070, 0.0), (0.6584, 0.1357)]),
            cv(&[(-0.0368, 0.2164), (0.7072, 0.0), (-0.6583, -0.1357)]),
        ];
        let m = PartyMeasurements::from_rank1_vectors(&[family], 3).unwrap();
        assert_eq!(m.outcome_counts(), vec![3]);
        assert!(m.element(0, 2).min_eigenvalue() > -PSD_TOLERANCE);
    }

    #[test]
    fn orthonormalization_is_close_for_nearly_orthogonal_input() {
        let a = cv(&[(1.0, 0.0), (0.001, 0.0)]);
        let b = cv(&[(0.0, 0.0), (1.0, 0.0)]);
        let q = symmetric_orthonormalize(&[a.clone(), b]).unwrap();
        assert!(q[0].entries().dotc(q[1].entries()).norm() < 1e-14);
        let a = a.normalized().unwrap();
        assert!((q[0].entries() - a.entries()).norm() < 1e-3);
    }

    #[test]
    fn product_state_is_deterministic() {
        let amps = BTreeMap::from([("000".to_string(), c(1.0, 0.0))]);
        let psi = parse_state(&[2, 3, 2], &amps).unwrap();
        let basis = |d: usize, inputs: usize| {
            let vecs: Vec<ComplexVector> = (0..d - 1)
                .map(|k| {
                    let mut v = vec![c(0.0, 0.0); d];
                    v[k] = c(1.0, 0.0);
                    ComplexVector::new(v)
                })
                .collect();
            PartyMeasurements::from_rank1_vectors(&vec![vecs; inputs], d).unwrap()
        };
        let parties = [basis(2, 2), basis(3, 3), basis(2, 2)];
        let beh: Behavior<f64> = behavior_from_quantum(&psi, &parties).unwrap();
        for inputs in beh.scenario().input_tuples() {
            assert!((beh.prob(&inputs, &[0, 0, 0]) - 1.0).abs() < 1e-15);
        }
        assert_eq!(beh.nonsignaling_deficit(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let psi = ComplexVector::new(vec![c(1.0, 0.0); 4]);
        let (psi_12, _) = shipped_point().unwrap();
        let (_, parties) = shipped_point().unwrap();
        assert!(matches!(
            behavior_from_quantum(&psi, &parties),
            Err(Error::DimensionMismatch { expected: 12, found: 4 })
        ));
        assert!(behavior_from_quantum(&psi_12, &parties).is_ok());
    }
}
