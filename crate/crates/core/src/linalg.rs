//! Small dense complex matrices: gate unitaries, error-generator
//! exponentials and test oracles.

use std::ops::{Add, Index, IndexMut, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self { dim, data: rows.into_iter().flatten().collect() }
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self ⊗ rhs`; `rhs` acts on the low-order bits.
    pub fn kron(&self, rhs: &Self) -> Self {
        let d = self.dim * rhs.dim;
        let mut m = Self::zeros(d);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..rhs.dim {
                    for c2 in 0..rhs.dim {
                        m[(r1 * rhs.dim + r2, c1 * rhs.dim + c2)] = a * rhs[(r2, c2)];
                    }
                }
            }
        }
        m
    }

    pub fn norm_one(&self) -> T {
        (0..self.dim)
            .map(|c| (0..self.dim).fold(T::zero(), |acc, r| acc + self[(r, c)].norm()))
            .fold(T::zero(), T::max)
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn expm(&self) -> Self {
        let norm = self.norm_one().f64();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
        let scaled = self.scale(Complex::new(T::of(0.5f64.powi(squarings as i32)), T::zero()));
        let mut result = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=30 {
            term = &term * &scaled;
            term = term.scale(Complex::new(T::one() / T::of(k as f64), T::zero()));
            result = &result + &term;
            if term.norm_one().f64() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data.iter().zip(&other.data).map(|(a, b)| (*a - *b).norm()).fold(T::zero(), T::max)
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }

    /// Distance to `other` after removing the best global phase.
    pub fn phase_distance(&self, other: &Self) -> T {
        // phase from the largest entry of `other`
        let (idx, _) = other
            .data
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bi, bv), (i, x)| if x.norm() > bv { (i, x.norm()) } else { (bi, bv) });
        let (a, b) = (self.data[idx], other.data[idx]);
        if a.norm() == T::zero() || b.norm() == T::zero() {
            return self.max_abs_diff(other);
        }
        let phase = (b / a) / (b / a).norm();
        self.scale(phase).max_abs_diff(other)
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.dim + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.dim + c]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = Matrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    m[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        m
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn exp_of_pauli_x_rotation() {
        let x = Matrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        for theta in [0.0, 0.3, std::f64::consts::FRAC_PI_2, 2.5] {
            let u = x.scale(c(0., -theta)).expm();
            let expect = Matrix::from_rows(vec![
                vec![c(theta.cos(), 0.), c(0., -theta.sin())],
                vec![c(0., -theta.sin()), c(theta.cos(), 0.)],
            ]);
            assert!(u.max_abs_diff(&expect) < 1e-13, "theta={theta}");
            assert!(u.is_unitary(1e-13));
        }
    }

    #[test]
    fn kron_puts_rhs_on_low_bits() {
        let x = Matrix::from_rows(vec![vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        let id = Matrix::<f64>::identity(2);
        let x_low = id.kron(&x);
        // |00> -> |01> (index 1)
        assert_eq!(x_low[(1, 0)], c(1., 0.));
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let u = Matrix::<f64>::identity(2);
        let v = u.scale(c(0.6, 0.8));
        assert!(u.phase_distance(&v) < 1e-15);
    }
}
