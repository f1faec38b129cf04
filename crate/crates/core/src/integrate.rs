// SPDX-License-Identifier: Apache-2.0

//! Adaptive Dormand–Prince 5(4) integration of the master equation.
//!
//! The state is the full 4×4 density matrix. Each accepted step is
//! re-Hermitized, the trace is checked against its initial value, and the
//! smallest eigenvalue is checked at every recorded output.

use crate::density::{DensityMatrix, StateDiagnostics, StateTolerances};
use crate::lindblad::LindbladError;
use crate::matrix::{ComplexMatrix4, DIM};

pub const DEFAULT_TOL: f64 = 1e-9;
/// 0.1 ps in ns.
pub const DEFAULT_SAMPLE_INTERVAL_NS: f64 = 1e-4;
/// Steps below this size (ns) abort the integration.
pub const MIN_STEP_NS: f64 = 1e-9;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Which states end up in the returned trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputGrid {
    /// Every accepted step.
    Steps,
    /// `t0, t0 + dt, …` and always `t1`, interpolated with the dense output.
    Uniform(f64),
    /// Only the initial and final states.
    Final,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Relative and absolute error target per step.
    pub tol: f64,
    pub output: OutputGrid,
    pub max_steps: usize,
    pub min_step: f64,
    pub invariants: StateTolerances,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            output: OutputGrid::Uniform(DEFAULT_SAMPLE_INTERVAL_NS),
            max_steps: 5_000_000,
            min_step: MIN_STEP_NS,
            invariants: StateTolerances::default(),
        }
    }
}

impl IntegratorOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_output(mut self, output: OutputGrid) -> Self {
        self.output = output;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl SolverStats {
    pub fn merge(&mut self, other: &SolverStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("integration interval must satisfy t1 > t0 (got t0 = {t0}, t1 = {t1})")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("tolerance {0:e} outside [1e-12, 1e-4]")]
    InvalidTolerance(f64),
    #[error("invalid output sampling interval {0}")]
    InvalidSampling(f64),
    #[error("step size underflow at t = {t} ns (h = {h:.3e} ns, error estimate {err:.3e})")]
    StepUnderflow { t: f64, h: f64, err: f64 },
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
    #[error("state left the physical region at t = {t} ns: {diagnostics:?}")]
    InvariantBreach { t: f64, diagnostics: StateDiagnostics },
    #[error(transparent)]
    Generator(#[from] LindbladError),
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: SolverStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &DensityMatrix)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

#[inline]
fn lincomb(base: &ComplexMatrix4, terms: &[(f64, &ComplexMatrix4)]) -> ComplexMatrix4 {
    let mut out = *base;
    for i in 0..DIM {
        for j in 0..DIM {
            let mut acc = out.0[i][j];
            for (c, k) in terms {
                acc += k.0[i][j] * *c;
            }
            out.0[i][j] = acc;
        }
    }
    out
}

fn error_norm(err: &ComplexMatrix4, y0: &ComplexMatrix4, y1: &ComplexMatrix4, tol: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            let (e, a, b) = (err.0[i][j], y0.0[i][j], y1.0[i][j]);
            let sc_re = tol + tol * a.re.abs().max(b.re.abs());
            let sc_im = tol + tol * a.im.abs().max(b.im.abs());
            sum += (e.re / sc_re).powi(2) + (e.im / sc_im).powi(2);
        }
    }
    (sum / (2 * DIM * DIM) as f64).sqrt()
}

fn rms_scaled(m: &ComplexMatrix4, y: &ComplexMatrix4, tol: f64) -> f64 {
    let mut sum = 0.0;
    for (z, yv) in m.0.iter().flatten().zip(y.0.iter().flatten()) {
        let sc = tol + tol * yv.norm();
        sum += (z.norm() / sc).powi(2);
    }
    (sum / (DIM * DIM) as f64).sqrt()
}

/// Dense-output coefficients of one accepted step.
struct DenseStep {
    t: f64,
    h: f64,
    c: [ComplexMatrix4; 5],
}

impl DenseStep {
    fn eval(&self, t: f64) -> ComplexMatrix4 {
        let s = (t - self.t) / self.h;
        let s1 = 1.0 - s;
        // y0 + s(c1 + s1(c2 + s(c3 + s1 c4)))
        let inner = lincomb(&self.c[3], &[(s1, &self.c[4])]);
        let inner = lincomb(&self.c[2], &[(s, &inner)]);
        let inner = lincomb(&self.c[1], &[(s1, &inner)]);
        lincomb(&self.c[0], &[(s, &inner)])
    }
}

/// Integrates `dρ/dt = rhs(t, ρ)` from `t0` to `t1` (ns).
pub fn integrate<F>(
    rho0: &DensityMatrix,
    rhs: F,
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory, IntegrateError>
where
    F: Fn(f64, &ComplexMatrix4) -> Result<ComplexMatrix4, LindbladError>,
{
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrateError::InvalidInterval { t0, t1 });
    }
    let tol = opts.tol;
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(IntegrateError::InvalidTolerance(tol));
    }
    if let OutputGrid::Uniform(dt) = opts.output {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(IntegrateError::InvalidSampling(dt));
        }
    }

    let span = t1 - t0;
    let trace0 = rho0.trace();
    let mut stats = SolverStats::default();
    let mut times = vec![t0];
    let mut states = vec![*rho0];

    let mut t = t0;
    let mut y = *rho0.matrix();
    let mut k1 = rhs(t, &y)?;
    stats.rhs_evals += 1;

    // Initial step from the size of the derivative (Hairer–Wanner).
    let mut h = {
        let d0 = rms_scaled(&y, &y, tol);
        let d1 = rms_scaled(&k1, &y, tol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let y1 = lincomb(&y, &[(h0, &k1)]);
        let f1 = rhs(t + h0, &y1)?;
        stats.rhs_evals += 1;
        let d2 = rms_scaled(&(f1 - k1), &y, tol) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6 * span) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(span)
    };

    let mut next_sample = 1usize;
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(IntegrateError::TooManySteps(opts.max_steps));
        }
        let remaining = t1 - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }

        let k2 = rhs(t + C2 * h, &lincomb(&y, &[(h * A21, &k1)]))?;
        let k3 = rhs(t + C3 * h, &lincomb(&y, &[(h * A31, &k1), (h * A32, &k2)]))?;
        let k4 = rhs(t + C4 * h, &lincomb(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]))?;
        let k5 = rhs(t + C5 * h, &lincomb(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]))?;
        let k6 = rhs(
            t + h,
            &lincomb(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
        )?;
        let y_new = lincomb(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
        let t_new = if last { t1 } else { t + h };
        let k7 = rhs(t_new, &y_new)?;
        stats.rhs_evals += 6;

        let err_mat = lincomb(
            &ComplexMatrix4::zeros(),
            &[(h * E1, &k1), (h * E3, &k3), (h * E4, &k4), (h * E5, &k5), (h * E6, &k6), (h * E7, &k7)],
        );
        let err = error_norm(&err_mat, &y, &y_new, tol);

        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
            h *= fac;
            if h < opts.min_step {
                return Err(IntegrateError::StepUnderflow { t, h, err });
            }
            last_rejected = true;
            continue;
        }

        stats.accepted += 1;
        let mut y_acc = y_new;
        y_acc.symmetrize();

        let trace_err = (y_acc.trace().re - trace0).abs() + y_acc.trace().im.abs();
        if trace_err > opts.invariants.trace || !y_acc.is_finite() {
            let diagnostics = DensityMatrix::from_matrix_unchecked(y_acc).diagnostics();
            return Err(IntegrateError::InvariantBreach { t: t_new, diagnostics });
        }

        let record = |m: ComplexMatrix4, tt: f64, times: &mut Vec<f64>, states: &mut Vec<DensityMatrix>| {
            let rho = DensityMatrix::from_matrix_unchecked(m);
            let lam = rho.min_eigenvalue();
            if lam <= opts.invariants.min_eigenvalue {
                return Err(IntegrateError::InvariantBreach { t: tt, diagnostics: rho.diagnostics() });
            }
            times.push(tt);
            states.push(rho);
            Ok(())
        };

        match opts.output {
            OutputGrid::Steps => record(y_acc, t_new, &mut times, &mut states)?,
            OutputGrid::Final => {
                if last {
                    record(y_acc, t_new, &mut times, &mut states)?;
                }
            }
            OutputGrid::Uniform(dt) => {
                let sample_time = |n: usize| t0 + n as f64 * dt;
                if sample_time(next_sample) < t_new - 1e-12 * dt {
                    let ydiff = y_new - y;
                    let bspl = k1.scale_real(h) - ydiff;
                    let dense = DenseStep {
                        t,
                        h,
                        c: [
                            y,
                            ydiff,
                            bspl,
                            ydiff - k7.scale_real(h) - bspl,
                            lincomb(
                                &ComplexMatrix4::zeros(),
                                &[
                                    (h * D1, &k1),
                                    (h * D3, &k3),
                                    (h * D4, &k4),
                                    (h * D5, &k5),
                                    (h * D6, &k6),
                                    (h * D7, &k7),
                                ],
                            ),
                        ],
                    };
                    while sample_time(next_sample) < t_new - 1e-12 * dt {
                        let ts = sample_time(next_sample);
                        let mut m = dense.eval(ts);
                        m.symmetrize();
                        record(m, ts, &mut times, &mut states)?;
                        next_sample += 1;
                    }
                }
                if last {
                    record(y_acc, t_new, &mut times, &mut states)?;
                }
            }
        }

        if last {
            break;
        }

        // Step-size update; no growth right after a rejection.
        let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        t = t_new;
        y = y_acc;
        k1 = k7;
        h *= fac;
        if h < opts.min_step {
            return Err(IntegrateError::StepUnderflow { t, h, err });
        }
    }

    Ok(Trajectory { times, states, stats })
}
