// SPDX-License-Identifier: Apache-2.0

//! Levenberg–Marquardt with Marquardt's diagonal scaling.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once ‖Jᵀr‖ < `gradient_tol`·(1 + rms residual).
    pub gradient_tol: f64,
    pub initial_damping: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 200, gradient_tol: 1e-10, initial_damping: 1e-3 }
    }
}

/// A residual vector r(p) with its Jacobian ∂r/∂p.
pub trait Residuals {
    fn len(&self) -> usize;
    fn n_params(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);
    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>);
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squares after each accepted step, starting with the initial one.
    pub cost_history: Vec<f64>,
}

impl LmOutcome {
    pub fn rms(&self) -> f64 {
        rms(&self.residuals)
    }

    /// s²·(JᵀJ)⁻¹ with s² = SSR/(m − n); `None` if JᵀJ is singular.
    pub fn covariance(&self) -> Option<DMatrix<f64>> {
        let m = self.residuals.len();
        let n = self.params.len();
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let inv = jtj.try_inverse()?;
        let dof = m.saturating_sub(n).max(1) as f64;
        let s2 = self.residuals.iter().map(|r| r * r).sum::<f64>() / dof;
        Some(inv * s2)
    }
}

pub fn rms(r: &[f64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub fn levenberg_marquardt<P: Residuals>(problem: &P, p0: &[f64], opts: &LmOptions) -> LmOutcome {
    let m = problem.len();
    let n = problem.n_params();
    assert_eq!(p0.len(), n, "parameter count mismatch");

    let mut p = p0.to_vec();
    let mut r = vec![0.0; m];
    problem.residuals(&p, &mut r);
    let mut c = cost(&r);
    let mut jac = DMatrix::zeros(m, n);
    problem.jacobian(&p, &mut jac);
    let mut lambda = opts.initial_damping;
    let mut history = vec![c];
    let mut trial = vec![0.0; m];
    let mut iterations = 0;

    let gradient = |jac: &DMatrix<f64>, r: &[f64]| jac.transpose() * DVector::from_column_slice(r);

    let mut g = gradient(&jac, &r);
    let mut converged = g.norm() < opts.gradient_tol * (1.0 + rms(&r));

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let jtj = jac.transpose() * &jac;
        let mut accepted = false;
        // raise the damping until the step lowers the cost
        for _ in 0..60 {
            let mut a = jtj.clone();
            for k in 0..n {
                let d = jtj[(k, k)];
                a[(k, k)] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let candidate: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            problem.residuals(&candidate, &mut trial);
            let tc = cost(&trial);
            if tc.is_finite() && tc <= c {
                let stalled = delta.iter().zip(&p).all(|(d, x)| d.abs() <= 1e-15 * (1.0 + x.abs()));
                p = candidate;
                std::mem::swap(&mut r, &mut trial);
                c = tc;
                history.push(c);
                lambda = (lambda / 3.0).max(1e-15);
                accepted = !stalled;
                break;
            }
            lambda *= 4.0;
        }
        problem.jacobian(&p, &mut jac);
        g = gradient(&jac, &r);
        converged = g.norm() < opts.gradient_tol * (1.0 + rms(&r));
        if !accepted {
            break;
        }
    }

    LmOutcome {
        gradient_norm: g.norm(),
        params: p,
        residuals: r,
        jacobian: jac,
        iterations,
        converged,
        cost_history: history,
    }
}

/// Largest relative deviation between the analytic Jacobian and central
/// finite differences at `p`.
pub fn jacobian_check<P: Residuals>(problem: &P, p: &[f64]) -> f64 {
    let m = problem.len();
    let n = problem.n_params();
    let mut analytic = DMatrix::zeros(m, n);
    problem.jacobian(p, &mut analytic);
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let h = 1e-6 * (1.0 + p[k].abs());
        let mut q = p.to_vec();
        q[k] = p[k] + h;
        problem.residuals(&q, &mut plus);
        q[k] = p[k] - h;
        problem.residuals(&q, &mut minus);
        let col_scale = (0..m).map(|i| analytic[(i, k)].abs()).fold(0.0, f64::max).max(1e-12);
        for i in 0..m {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            worst = worst.max((fd - analytic[(i, k)]).abs() / col_scale);
        }
    }
    worst
}
