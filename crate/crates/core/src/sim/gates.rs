//! Gate matrices and in-place amplitude kernels.
//!
//! Kernels operate on raw amplitude slices so the partitioned engine can run
//! the exact same arithmetic on its local blocks.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::circuit::GateKind;
use crate::linalg::Matrix;
use crate::scalar::{c, cis, Real};

pub type Mat2<T> = [[Complex<T>; 2]; 2];

/// Dense 2x2 matrix of a non-diagonal, non-permutation single-qubit gate.
pub fn dense_single<T: Real>(kind: &GateKind) -> Option<Mat2<T>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Some(match *kind {
        GateKind::H => [[c(r, 0.), c(r, 0.)], [c(r, 0.), c(-r, 0.)]],
        GateKind::SX => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::RX(a) => {
            let t = a.to_radians() / 2.0;
            [[c(t.cos(), 0.), c(0., -t.sin())], [c(0., -t.sin()), c(t.cos(), 0.)]]
        }
        GateKind::RY(a) => {
            let t = a.to_radians() / 2.0;
            [[c(t.cos(), 0.), c(-t.sin(), 0.)], [c(t.sin(), 0.), c(t.cos(), 0.)]]
        }
        _ => return None,
    })
}

/// `(e^{-i theta/2}, e^{i theta/2})` for RZ.
pub fn rz_phases<T: Real>(theta: f64) -> (Complex<T>, Complex<T>) {
    (cis(-theta / 2.0), cis(theta / 2.0))
}

/// Full matrix of any unitary kind, little-endian over `qubits` order
/// (the first listed qubit is the low bit).
pub fn unitary<T: Real>(kind: &GateKind) -> Option<Matrix<T>> {
    let one = Complex::<T>::one();
    let zero = Complex::<T>::zero();
    if let Some(m) = dense_single::<T>(kind) {
        return Some(Matrix::from_rows(vec![m[0].to_vec(), m[1].to_vec()]));
    }
    Some(match *kind {
        GateKind::X => Matrix::from_rows(vec![vec![zero, one], vec![one, zero]]),
        GateKind::RZ(a) => {
            let (d0, d1) = rz_phases::<T>(a.to_radians());
            Matrix::diagonal(&[d0, d1])
        }
        GateKind::CX => {
            // control = low bit, target = high bit: swaps |01> and |11>
            let mut m = Matrix::identity(4);
            m[(1, 1)] = zero;
            m[(3, 3)] = zero;
            m[(1, 3)] = one;
            m[(3, 1)] = one;
            m
        }
        GateKind::CZ => Matrix::diagonal(&[one, one, one, -one]),
        GateKind::CP(a) => Matrix::diagonal(&[one, one, one, cis(a.to_radians())]),
        GateKind::Swap => {
            let mut m = Matrix::identity(4);
            m[(1, 1)] = zero;
            m[(2, 2)] = zero;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m
        }
        _ => return None,
    })
}

#[inline(always)]
pub fn mix<T: Real>(m: &Mat2<T>, a0: Complex<T>, a1: Complex<T>) -> (Complex<T>, Complex<T>) {
    (m[0][0] * a0 + m[0][1] * a1, m[1][0] * a0 + m[1][1] * a1)
}

pub fn apply_mat2<T: Real>(amps: &mut [Complex<T>], q: usize, m: &Mat2<T>) {
    let stride = 1usize << q;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (n0, n1) = mix(m, amps[i], amps[i + stride]);
            amps[i] = n0;
            amps[i + stride] = n1;
        }
    }
}

pub fn apply_diag1<T: Real>(amps: &mut [Complex<T>], q: usize, d0: Complex<T>, d1: Complex<T>) {
    let mask = 1usize << q;
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if i & mask == 0 { d0 } else { d1 };
    }
}

pub fn apply_x<T: Real>(amps: &mut [Complex<T>], q: usize) {
    let stride = 1usize << q;
    for base in (0..amps.len()).step_by(stride << 1) {
        for i in base..base + stride {
            amps.swap(i, i + stride);
        }
    }
}

pub fn apply_cx<T: Real>(amps: &mut [Complex<T>], control: usize, target: usize) {
    let (cm, tm) = (1usize << control, 1usize << target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

pub fn apply_swap<T: Real>(amps: &mut [Complex<T>], a: usize, b: usize) {
    let (am, bm) = (1usize << a, 1usize << b);
    for i in 0..amps.len() {
        if i & am != 0 && i & bm == 0 {
            amps.swap(i, i ^ am ^ bm);
        }
    }
}

/// Multiply amplitudes with both bits set by `phase` (CZ, CP).
pub fn apply_phase11<T: Real>(amps: &mut [Complex<T>], a: usize, b: usize, phase: Complex<T>) {
    let mask = (1usize << a) | (1usize << b);
    for (i, amp) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *amp *= phase;
        }
    }
}

/// Phase applied to the `|11>` component by a diagonal two-qubit kind.
pub fn phase11<T: Real>(kind: &GateKind) -> Option<Complex<T>> {
    match *kind {
        GateKind::CZ => Some(-Complex::one()),
        GateKind::CP(a) => Some(cis(a.to_radians())),
        _ => None,
    }
}

/// Apply an arbitrary 4x4 matrix to `(q0, q1)`, `q0` the low bit.
pub fn apply_mat4<T: Real>(amps: &mut [Complex<T>], q0: usize, q1: usize, m: &Matrix<T>) {
    let (m0, m1) = (1usize << q0, 1usize << q1);
    for i in 0..amps.len() {
        if i & (m0 | m1) != 0 {
            continue;
        }
        let idx = [i, i | m0, i | m1, i | m0 | m1];
        let v = idx.map(|j| amps[j]);
        for (r, &j) in idx.iter().enumerate() {
            let mut acc = Complex::zero();
            for (k, &vk) in v.iter().enumerate() {
                acc += m[(r, k)] * vk;
            }
            amps[j] = acc;
        }
    }
}

/// Apply a diagonal over `(q0, q1)` indexed little-endian.
pub fn apply_diag4<T: Real>(amps: &mut [Complex<T>], q0: usize, q1: usize, d: &[Complex<T>; 4]) {
    for (i, a) in amps.iter_mut().enumerate() {
        let k = ((i >> q0) & 1) | (((i >> q1) & 1) << 1);
        *a *= d[k];
    }
}
