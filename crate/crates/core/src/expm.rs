// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant propagation with the matrix exponential of the
//! Liouvillian superoperator.
//!
//! ρ is vectorized row-major, so vec(AρB) = (A ⊗ Bᵀ)·vec(ρ). The exponential
//! uses scaling and squaring with a diagonal Padé approximant of degree
//! 3, 5, 7, 9 or 13, chosen from the 1-norm (Higham 2005).

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::lindblad::{CollapseChannel, Hamiltonian, LindbladError};
use crate::matrix::{ComplexMatrix4, DIM};

pub const LDIM: usize = DIM * DIM;

pub type Superoperator = SMatrix<Complex64, LDIM, LDIM>;
pub type Vectorized = SVector<Complex64, LDIM>;

/// Squarings beyond this count mean the norm is far outside any physical
/// Liouvillian and the exponential would overflow.
const MAX_SQUARINGS: i32 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpmError {
    #[error("matrix exponential argument has non-finite or overflowing norm ({0:e})")]
    Overflow(f64),
    #[error("Padé denominator is singular")]
    SingularDenominator,
    #[error("at least one slice is required")]
    NoSlices,
    #[error("propagation interval must satisfy t1 > t0")]
    InvalidInterval,
    #[error(transparent)]
    Generator(#[from] LindbladError),
}

fn kron(a: &ComplexMatrix4, b: &ComplexMatrix4) -> Superoperator {
    Superoperator::from_fn(|r, c| a.0[r / DIM][c / DIM] * b.0[r % DIM][c % DIM])
}

fn transpose(m: &ComplexMatrix4) -> ComplexMatrix4 {
    let mut out = ComplexMatrix4::zeros();
    for i in 0..DIM {
        for j in 0..DIM {
            out.0[j][i] = m.0[i][j];
        }
    }
    out
}

fn conj(m: &ComplexMatrix4) -> ComplexMatrix4 {
    let mut out = *m;
    out.0.iter_mut().flatten().for_each(|z| *z = z.conj());
    out
}

/// Superoperator of −i[H, ·] + Σ D[c_k] for effective operators `c_k`.
pub fn liouvillian(h: &ComplexMatrix4, collapse: &[ComplexMatrix4]) -> Superoperator {
    let id = ComplexMatrix4::identity();
    let mi = Complex64::new(0.0, -1.0);
    let mut l = (kron(h, &id) - kron(&id, &transpose(h))) * mi;
    for c in collapse {
        let cdc = c.adjoint().matmul(c);
        l += kron(c, &conj(c));
        l -= (kron(&cdc, &id) + kron(&id, &transpose(&cdc))) * Complex64::new(0.5, 0.0);
    }
    l
}

/// Liouvillian of a Hamiltonian and channel set at time `t`.
pub fn liouvillian_at<H: Hamiltonian + ?Sized>(
    hamiltonian: &H,
    channels: &[CollapseChannel],
    t: f64,
) -> Result<Superoperator, LindbladError> {
    let h = hamiltonian.at(t);
    let ops = channels.iter().map(|c| c.effective_operator(t)).collect::<Result<Vec<_>, _>>()?;
    Ok(liouvillian(&h, &ops))
}

pub fn vectorize(m: &ComplexMatrix4) -> Vectorized {
    Vectorized::from_row_slice(&m.to_row_major())
}

pub fn devectorize(v: &Vectorized) -> ComplexMatrix4 {
    ComplexMatrix4::from_row_major(v.as_slice())
}

fn one_norm(a: &Superoperator) -> f64 {
    a.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.539_398_330_063_23e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068e0)];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pade_low(a: &Superoperator, b: &[f64]) -> (Superoperator, Superoperator) {
    let id = Superoperator::identity();
    let a2 = a * a;
    let mut u = id * real(b[1]);
    let mut v = id * real(b[0]);
    let mut pow = id;
    for k in 1..b.len() / 2 {
        pow *= a2;
        u += pow * real(b[2 * k + 1]);
        v += pow * real(b[2 * k]);
    }
    (a * u, v)
}

fn pade_13(a: &Superoperator) -> (Superoperator, Superoperator) {
    let b = |k: usize| real(B13[k]);
    let id = Superoperator::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * b(13) + a4 * b(11) + a2 * b(9)) + a6 * b(7) + a4 * b(5) + a2 * b(3) + id * b(1);
    let u = a * u_inner;
    let v = a6 * (a6 * b(12) + a4 * b(10) + a2 * b(8)) + a6 * b(6) + a4 * b(4) + a2 * b(2) + id * b(0);
    (u, v)
}

/// exp(A) for a 16×16 complex matrix.
pub fn expm(a: &Superoperator) -> Result<Superoperator, ExpmError> {
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(ExpmError::Overflow(norm));
    }
    let (u, v, squarings) = match THETA.iter().find(|(_, th)| norm <= *th) {
        Some(&(m, _)) => {
            let b: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let (u, v) = pade_low(a, b);
            (u, v, 0)
        }
        None => {
            let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
            if s > MAX_SQUARINGS {
                return Err(ExpmError::Overflow(norm));
            }
            let scaled = a * real(0.5f64.powi(s));
            let (u, v) = pade_13(&scaled);
            (u, v, s)
        }
    };
    let lu = (v - u).lu();
    let mut r = lu.solve(&(v + u)).ok_or(ExpmError::SingularDenominator)?;
    for _ in 0..squarings {
        r = r * r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(ExpmError::Overflow(norm));
    }
    Ok(r)
}

/// Propagates `rho0` over `[t0, t1]` in `n_slices` equal slices. Each slice
/// applies the fourth-order commutator-free Magnus step built from the
/// generator at the two Gauss-Legendre nodes (Blanes & Moan 2006).
pub fn expm_propagate<H: Hamiltonian + ?Sized>(
    rho0: &DensityMatrix,
    hamiltonian: &H,
    channels: &[CollapseChannel],
    t0: f64,
    t1: f64,
    n_slices: usize,
) -> Result<DensityMatrix, ExpmError> {
    if n_slices == 0 {
        return Err(ExpmError::NoSlices);
    }
    if !(t1 > t0) {
        return Err(ExpmError::InvalidInterval);
    }
    let h = (t1 - t0) / n_slices as f64;
    let c = 3f64.sqrt() / 6.0;
    let (a_hi, a_lo) = (0.25 + c, 0.25 - c);
    let mut v = vectorize(rho0.matrix());
    let mut cached: Option<(Superoperator, Superoperator, Superoperator)> = None;
    for k in 0..n_slices {
        let ts = t0 + k as f64 * h;
        let l1 = liouvillian_at(hamiltonian, channels, ts + (0.5 - c) * h)?;
        let l2 = liouvillian_at(hamiltonian, channels, ts + (0.5 + c) * h)?;
        let (first, second) = match &cached {
            Some((lc, p1, p2)) if *lc == l1 && l1 == l2 => (*p1, *p2),
            _ => {
                let p1 = expm(&((l1 * real(a_hi) + l2 * real(a_lo)) * real(h)))?;
                let p2 = expm(&((l1 * real(a_lo) + l2 * real(a_hi)) * real(h)))?;
                if l1 == l2 {
                    cached = Some((l1, p1, p2));
                }
                (p1, p2)
            }
        };
        v = second * (first * v);
    }
    let mut m = devectorize(&v);
    m.symmetrize();
    Ok(DensityMatrix::from_matrix_unchecked(m))
}
