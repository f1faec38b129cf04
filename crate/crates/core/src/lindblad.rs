// SPDX-License-Identifier: Apache-2.0

//! Lindblad generator: dρ/dt = −i[H, ρ] + Σ_j D[c_j]ρ with
//! D[c]ρ = cρc† − ½{c†c, ρ}. Time is in ns and energies in rad/ns (ħ = 1).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::matrix::{ComplexMatrix4, DIM};

/// Largest tolerated `|H − H†|` entry before a Hamiltonian is rejected.
pub const HAMILTONIAN_HERMITICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LindbladError {
    #[error("hamiltonian at t = {t} ns is not Hermitian (max |H − H†| = {deviation:.3e})")]
    NonHermitianHamiltonian { t: f64, deviation: f64 },
    #[error("collapse rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("time-dependent prefactor of channel `{label}` is not finite at t = {t} ns")]
    NonFinitePrefactor { label: String, t: f64 },
}

/// A Hamiltonian as a function of time (ns → rad/ns).
pub trait Hamiltonian: Send + Sync {
    fn at(&self, t: f64) -> ComplexMatrix4;
}

impl<F> Hamiltonian for F
where
    F: Fn(f64) -> ComplexMatrix4 + Send + Sync,
{
    fn at(&self, t: f64) -> ComplexMatrix4 {
        self(t)
    }
}

impl Hamiltonian for ComplexMatrix4 {
    fn at(&self, _t: f64) -> ComplexMatrix4 {
        *self
    }
}

pub type Prefactor = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How strongly a collapse operator acts.
#[derive(Clone)]
pub enum RateLaw {
    /// Constant rate γ in ns⁻¹; the effective operator is √γ·c.
    Constant(f64),
    /// Real amplitude prefactor f(t) in ns⁻¹ᐟ²; the effective operator is f(t)·c.
    TimeDependent(Prefactor),
}

impl fmt::Debug for RateLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(r) => f.debug_tuple("Constant").field(r).finish(),
            Self::TimeDependent(_) => f.write_str("TimeDependent(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub label: String,
    operator: ComplexMatrix4,
    rate: RateLaw,
}

impl CollapseChannel {
    pub fn constant(label: impl Into<String>, operator: ComplexMatrix4, rate: f64) -> Result<Self, LindbladError> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(LindbladError::InvalidRate(rate));
        }
        Ok(Self { label: label.into(), operator, rate: RateLaw::Constant(rate) })
    }

    pub fn time_dependent(
        label: impl Into<String>,
        operator: ComplexMatrix4,
        prefactor: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), operator, rate: RateLaw::TimeDependent(Arc::new(prefactor)) }
    }

    pub fn operator(&self) -> &ComplexMatrix4 {
        &self.operator
    }

    pub fn rate_law(&self) -> &RateLaw {
        &self.rate
    }

    /// Square of the amplitude multiplying the operator at time `t`.
    pub fn weight_at(&self, t: f64) -> Result<f64, LindbladError> {
        match &self.rate {
            RateLaw::Constant(r) => Ok(*r),
            RateLaw::TimeDependent(f) => {
                let a = f(t);
                if !a.is_finite() {
                    return Err(LindbladError::NonFinitePrefactor { label: self.label.clone(), t });
                }
                Ok(a * a)
            }
        }
    }

    /// Operator with its rate folded in: √γ·c or f(t)·c.
    pub fn effective_operator(&self, t: f64) -> Result<ComplexMatrix4, LindbladError> {
        let amp = match &self.rate {
            RateLaw::Constant(r) => r.sqrt(),
            RateLaw::TimeDependent(f) => {
                let a = f(t);
                if !a.is_finite() {
                    return Err(LindbladError::NonFinitePrefactor { label: self.label.clone(), t });
                }
                a
            }
        };
        Ok(self.operator.scale_real(amp))
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.rate, RateLaw::TimeDependent(_))
    }
}

/// D[c]ρ = cρc† − ½{c†c, ρ}.
pub fn lindblad_dissipator(c: &ComplexMatrix4, rho: &ComplexMatrix4) -> ComplexMatrix4 {
    let cd = c.adjoint();
    let cdc = cd.matmul(c);
    c.matmul(rho).matmul(&cd) - cdc.anticommutator(rho).scale_real(0.5)
}

fn check_hermitian(h: &ComplexMatrix4, t: f64) -> Result<(), LindbladError> {
    let deviation = h.hermiticity_error();
    if deviation > HAMILTONIAN_HERMITICITY_TOL || !h.is_finite() {
        return Err(LindbladError::NonHermitianHamiltonian { t, deviation });
    }
    Ok(())
}

/// Right-hand side of the master equation, evaluated directly from the
/// definition. [`MasterEquation::rhs`] is the precomputed equivalent used by
/// the integrator.
pub fn master_rhs<H: Hamiltonian + ?Sized>(
    t: f64,
    rho: &ComplexMatrix4,
    hamiltonian: &H,
    channels: &[CollapseChannel],
) -> Result<ComplexMatrix4, LindbladError> {
    let h = hamiltonian.at(t);
    check_hermitian(&h, t)?;
    let mut out = h.commutator(rho).scale(Complex64::new(0.0, -1.0));
    for ch in channels {
        let c = ch.effective_operator(t)?;
        out += lindblad_dissipator(&c, rho);
    }
    Ok(out)
}

/// Nonzero entries of a collapse operator, for the jump term cρc†.
#[derive(Clone, Debug)]
struct SparseOperator {
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOperator {
    fn new(m: &ComplexMatrix4) -> Self {
        let mut entries = Vec::new();
        for i in 0..DIM {
            for j in 0..DIM {
                if m.0[i][j] != Complex64::new(0.0, 0.0) {
                    entries.push((i, j, m.0[i][j]));
                }
            }
        }
        Self { entries }
    }

    /// out += w · cρc†
    #[inline]
    fn add_sandwich(&self, rho: &ComplexMatrix4, w: f64, out: &mut ComplexMatrix4) {
        for &(a, i, ca) in &self.entries {
            let ca = ca * w;
            for &(b, j, cb) in &self.entries {
                out.0[a][b] += ca * rho.0[i][j] * cb.conj();
            }
        }
    }
}

#[derive(Clone, Debug)]
struct PreparedChannel {
    jump: SparseOperator,
    cdc: ComplexMatrix4,
    channel: CollapseChannel,
}

/// A Hamiltonian plus collapse channels with the time-independent parts of
/// the generator precomputed.
///
/// With K = H − (i/2)·Σ w_j c_j†c_j the generator is
/// −i(Kρ − ρK†) + Σ w_j c_j ρ c_j†.
pub struct MasterEquation<H> {
    hamiltonian: H,
    channels: Vec<CollapseChannel>,
    static_decay: ComplexMatrix4,
    static_jumps: Vec<(SparseOperator, f64)>,
    dynamic: Vec<PreparedChannel>,
}

impl<H: Hamiltonian> MasterEquation<H> {
    pub fn new(hamiltonian: H, channels: Vec<CollapseChannel>) -> Self {
        let mut static_decay = ComplexMatrix4::zeros();
        let mut static_jumps = Vec::new();
        let mut dynamic = Vec::new();
        for ch in &channels {
            let cdc = ch.operator.adjoint().matmul(&ch.operator);
            match &ch.rate {
                RateLaw::Constant(r) => {
                    if *r == 0.0 {
                        continue;
                    }
                    static_decay += cdc.scale_real(*r);
                    static_jumps.push((SparseOperator::new(&ch.operator), *r));
                }
                RateLaw::TimeDependent(_) => {
                    dynamic.push(PreparedChannel { jump: SparseOperator::new(&ch.operator), cdc, channel: ch.clone() })
                }
            }
        }
        Self { hamiltonian, channels, static_decay, static_jumps, dynamic }
    }

    pub fn hamiltonian(&self) -> &H {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[CollapseChannel] {
        &self.channels
    }

    pub fn rhs(&self, t: f64, rho: &ComplexMatrix4) -> Result<ComplexMatrix4, LindbladError> {
        let h = self.hamiltonian.at(t);
        check_hermitian(&h, t)?;

        let mut decay = self.static_decay;
        for d in &self.dynamic {
            let w = d.channel.weight_at(t)?;
            if w != 0.0 {
                decay += d.cdc.scale_real(w);
            }
        }

        // K = H − (i/2)·decay
        let mut k = h;
        for (kz, dz) in k.0.iter_mut().flatten().zip(decay.0.iter().flatten()) {
            *kz += Complex64::new(0.5 * dz.im, -0.5 * dz.re);
        }
        let k_rho = k.matmul(rho);
        let rho_kd = rho.matmul(&k.adjoint());
        let mut out = ComplexMatrix4::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                let z = k_rho.0[i][j] - rho_kd.0[i][j];
                out.0[i][j] = Complex64::new(z.im, -z.re);
            }
        }
        for (jump, w) in &self.static_jumps {
            jump.add_sandwich(rho, *w, &mut out);
        }
        for d in &self.dynamic {
            let w = d.channel.weight_at(t)?;
            if w != 0.0 {
                d.jump.add_sandwich(rho, w, &mut out);
            }
        }
        Ok(out)
    }
}
