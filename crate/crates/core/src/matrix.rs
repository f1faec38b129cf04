// SPDX-License-Identifier: Apache-2.0

//! Dense 4×4 complex matrices.
//!
//! Levels are numbered 1..=4 in the public constructors to match the usual
//! labelling of the double-Λ system (1, 2 = spin ground states, 3, 4 = trions).
//! Internally rows and columns are 0-based.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

pub const DIM: usize = 4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ComplexMatrix4(pub [[Complex64; DIM]; DIM]);

impl ComplexMatrix4 {
    pub const fn zeros() -> Self {
        Self([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = ONE;
        }
        m
    }

    /// The transition operator `s_ij = |i⟩⟨j|` with 1-based level labels.
    ///
    /// Panics if a label is outside `1..=4`.
    pub fn transition(i: usize, j: usize) -> Self {
        assert!((1..=DIM).contains(&i) && (1..=DIM).contains(&j), "level labels are 1..=4");
        let mut m = Self::zeros();
        m.0[i - 1][j - 1] = ONE;
        m
    }

    /// Projector `s_ii = |i⟩⟨i|` with a 1-based level label.
    pub fn projector(i: usize) -> Self {
        Self::transition(i, i)
    }

    pub fn from_real_diagonal(diag: [f64; DIM]) -> Self {
        let mut m = Self::zeros();
        for (i, d) in diag.into_iter().enumerate() {
            m.0[i][i] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                out.0[j][i] = self.0[i][j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    /// `self · other`.
    #[inline]
    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    out.0[i][j] += a * other.0[k][j];
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other) - other.matmul(self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.matmul(other) + other.matmul(self)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// `max |A − A†|` over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for i in 0..DIM {
            for j in i..DIM {
                err = err.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        err
    }

    /// Replaces `A` by `(A + A†)/2`.
    pub fn symmetrize(&mut self) {
        for i in 0..DIM {
            self.0[i][i].im = 0.0;
            for j in (i + 1)..DIM {
                let avg = 0.5 * (self.0[i][j] + self.0[j][i].conj());
                self.0[i][j] = avg;
                self.0[j][i] = avg.conj();
            }
        }
    }

    /// Eigenvalues of the Hermitian part, in ascending order.
    pub fn hermitian_eigenvalues(&self) -> [f64; DIM] {
        let mut h = *self;
        h.symmetrize();
        let m = Matrix4::from_fn(|i, j| h.0[i][j]);
        let eig = SymmetricEigen::new(m);
        let mut vals = [0.0; DIM];
        for (v, e) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
            *v = *e;
        }
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Row-major flattening, the vectorization convention used by the propagator.
    pub fn to_row_major(&self) -> [Complex64; DIM * DIM] {
        let mut out = [ZERO; DIM * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                out[i * DIM + j] = self.0[i][j];
            }
        }
        out
    }

    pub fn from_row_major(v: &[Complex64]) -> Self {
        assert_eq!(v.len(), DIM * DIM);
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = v[i * DIM + j];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexMatrix4 {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += *b;
        }
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= *b;
        }
        self
    }
}

impl Neg for ComplexMatrix4 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.matmul(&rhs)
    }
}

impl Mul<Complex64> for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}
