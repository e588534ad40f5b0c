use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;

use super::gates;
use super::SimError;
use crate::circuit::{GateKind, Instruction};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Collapse probabilities below this are treated as numerically impossible.
pub const COLLAPSE_EPS: f64 = 1e-12;

/// Dense `2^n` amplitude vector, qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `n` qubits.
    pub fn new(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![Complex::zero(); 1usize << n];
        amps[index] = Complex::one();
        Self { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        if !amps.len().is_power_of_two() {
            return Err(SimError::BadLength(amps.len()));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, qubits: &[usize]) -> Result<(), SimError> {
        match qubits.iter().find(|&&q| q >= self.n) {
            Some(&q) => Err(SimError::QubitOutOfRange { qubit: q, width: self.n }),
            None => Ok(()),
        }
    }

    /// Apply a unitary gate kind to `qubits`.
    pub fn apply_gate(&mut self, kind: &GateKind, qubits: &[usize]) -> Result<(), SimError> {
        self.check(qubits)?;
        if qubits.len() != kind.arity() {
            return Err(SimError::Arity { kind: kind.name(), got: qubits.len() });
        }
        let amps = &mut self.amps;
        match *kind {
            GateKind::X => gates::apply_x(amps, qubits[0]),
            GateKind::RZ(a) => {
                let (d0, d1) = gates::rz_phases(a.to_radians());
                gates::apply_diag1(amps, qubits[0], d0, d1);
            }
            GateKind::H | GateKind::SX | GateKind::RX(_) | GateKind::RY(_) => {
                let m = gates::dense_single(kind).expect("dense single-qubit kind");
                gates::apply_mat2(amps, qubits[0], &m);
            }
            GateKind::CX => gates::apply_cx(amps, qubits[0], qubits[1]),
            GateKind::Swap => gates::apply_swap(amps, qubits[0], qubits[1]),
            GateKind::CZ | GateKind::CP(_) => {
                let phase = gates::phase11(kind).expect("diagonal two-qubit kind");
                gates::apply_phase11(amps, qubits[0], qubits[1], phase);
            }
            GateKind::Measure(_) | GateKind::Reset => return Err(SimError::NotUnitary(kind.name())),
        }
        Ok(())
    }

    /// Apply a unitary instruction if its condition holds against `clbits`.
    /// Returns whether the gate fired.
    pub fn apply_instruction(&mut self, inst: &Instruction, clbits: &[bool]) -> Result<bool, SimError> {
        if let Some(cond) = inst.condition {
            let bit = *clbits.get(cond.clbit).ok_or(SimError::ClbitOutOfRange(cond.clbit))?;
            if bit != cond.value {
                return Ok(false);
            }
        }
        self.apply_gate(&inst.kind, &inst.qubits)?;
        Ok(true)
    }

    pub fn apply_matrix1(&mut self, q: usize, m: &gates::Mat2<T>) -> Result<(), SimError> {
        self.check(&[q])?;
        gates::apply_mat2(&mut self.amps, q, m);
        Ok(())
    }

    /// Apply a 4x4 matrix with `q0` as the low bit.
    pub fn apply_matrix2(&mut self, q0: usize, q1: usize, m: &Matrix<T>) -> Result<(), SimError> {
        self.check(&[q0, q1])?;
        gates::apply_mat4(&mut self.amps, q0, q1, m);
        Ok(())
    }

    pub fn apply_diagonal2(&mut self, q0: usize, q1: usize, d: &[Complex<T>; 4]) -> Result<(), SimError> {
        self.check(&[q0, q1])?;
        gates::apply_diag4(&mut self.amps, q0, q1, d);
        Ok(())
    }

    /// Probability of reading 1 on `q`.
    pub fn prob_one(&self, q: usize) -> T {
        let mask = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Project `q` onto `outcome` and renormalise.
    pub fn project(&mut self, q: usize, outcome: bool) -> Result<T, SimError> {
        self.check(&[q])?;
        let p1 = self.prob_one(q);
        let p = if outcome { p1 } else { T::one() - p1 };
        if p.f64() < COLLAPSE_EPS {
            return Err(SimError::NumericalCollapse(p.f64()));
        }
        let scale = Complex::new(T::one() / p.sqrt(), T::zero());
        let mask = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & mask != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex::zero();
            }
        }
        Ok(p)
    }

    /// Projective Z measurement of `q`.
    pub fn measure<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool, SimError> {
        self.check(&[q])?;
        let p1 = self.prob_one(q).f64();
        let outcome = rng.random::<f64>() < p1;
        self.project(q, outcome)?;
        Ok(outcome)
    }

    /// Measure and flip back to `|0>`.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<(), SimError> {
        if self.measure(q, rng)? {
            gates::apply_x(&mut self.amps, q);
        }
        Ok(())
    }

    /// `<Z_q>` computed from the amplitudes.
    pub fn expectation_z(&self, q: usize) -> T {
        T::one() - T::of(2.0) * self.prob_one(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hadamard_on_zero() {
        let mut s = StateVector::<f64>::new(1);
        s.apply_gate(&GateKind::H, &[0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn rz_leaves_probabilities() {
        let mut s = StateVector::<f64>::new(1);
        s.apply_gate(&GateKind::RZ(Angle::radians(1.234)), &[0]).unwrap();
        assert!((s.probabilities()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unsatisfied_condition_is_noop() {
        let mut s = StateVector::<f64>::new(2);
        s.apply_gate(&GateKind::H, &[1]).unwrap();
        let before = s.clone();
        let inst = Instruction::new(GateKind::RZ(Angle::pi_frac(1, 1)), vec![1]).conditioned(0, true);
        assert!(!s.apply_instruction(&inst, &[false]).unwrap());
        assert_eq!(s, before);
    }

    #[test]
    fn out_of_range_qubit() {
        let mut s = StateVector::<f64>::new(2);
        assert_eq!(s.apply_gate(&GateKind::H, &[2]), Err(SimError::QubitOutOfRange { qubit: 2, width: 2 }));
        assert!(s.apply_gate(&GateKind::Reset, &[0]).is_err());
    }

    #[test]
    fn measure_basis_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut one = StateVector::<f64>::basis(1, 1);
        assert!(one.measure(0, &mut rng).unwrap());
        assert_eq!(one, StateVector::basis(1, 1));

        let mut bell = StateVector::<f64>::new(2);
        bell.apply_gate(&GateKind::H, &[0]).unwrap();
        bell.apply_gate(&GateKind::CX, &[0, 1]).unwrap();
        bell.project(0, true).unwrap();
        assert!((bell.amplitudes()[3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_plus_state_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 10_000;
        let mut ones = 0;
        for _ in 0..trials {
            let mut s = StateVector::<f64>::new(1);
            s.apply_gate(&GateKind::H, &[0]).unwrap();
            ones += s.measure(0, &mut rng).unwrap() as usize;
        }
        let p = ones as f64 / trials as f64;
        assert!((p - 0.5).abs() <= 0.02, "p = {p}");
    }

    #[test]
    fn collapse_onto_impossible_outcome_fails() {
        let mut s = StateVector::<f64>::new(1);
        assert!(matches!(s.project(0, true), Err(SimError::NumericalCollapse(_))));
    }

    #[test]
    fn single_precision_works() {
        let mut s = StateVector::<f32>::new(3);
        for q in 0..3 {
            s.apply_gate(&GateKind::H, &[q]).unwrap();
        }
        s.apply_gate(&GateKind::CP(Angle::pi_frac(1, 2)), &[0, 2]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
