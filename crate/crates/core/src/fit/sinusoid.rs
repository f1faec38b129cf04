// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector3};

use super::lm::{levenberg_marquardt, LmOptions, Residuals};
use super::{FitError, FitReport};
use crate::units::TWO_PI;

const GRID_POINTS: usize = 801;
const GRID_HALF_WIDTH: f64 = 0.25;

/// y = offset + amplitude·cos(2π·frequency·x + phase); parameters in that
/// order: `[amplitude, frequency, phase, offset]`.
pub struct SinusoidResiduals<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

impl Residuals for SinusoidResiduals<'_> {
    fn len(&self) -> usize {
        self.x.len()
    }

    fn n_params(&self) -> usize {
        4
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for ((o, &x), &y) in out.iter_mut().zip(self.x).zip(self.y) {
            *o = p[3] + p[0] * (TWO_PI * p[1] * x + p[2]).cos() - y;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        for (i, &x) in self.x.iter().enumerate() {
            let th = TWO_PI * p[1] * x + p[2];
            let (s, c) = th.sin_cos();
            out[(i, 0)] = c;
            out[(i, 1)] = -p[0] * s * TWO_PI * x;
            out[(i, 2)] = -p[0] * s;
            out[(i, 3)] = 1.0;
        }
    }
}

/// Best linear fit offset + α·cos + β·sin at fixed frequency; returns
/// `(ssr, [offset, α, β])`.
fn linear_at(x: &[f64], y: &[f64], f: f64) -> Option<(f64, [f64; 3])> {
    let mut ata = Matrix3::zeros();
    let mut aty = Vector3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let (s, c) = (TWO_PI * f * xi).sin_cos();
        let row = Vector3::new(1.0, c, s);
        ata += row * row.transpose();
        aty += row * yi;
    }
    let sol = ata.cholesky()?.solve(&aty);
    let ssr = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let (s, c) = (TWO_PI * f * xi).sin_cos();
            let r = sol[0] + sol[1] * c + sol[2] * s - yi;
            r * r
        })
        .sum();
    Some((ssr, [sol[0], sol[1], sol[2]]))
}

fn wrap_phase(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(TWO_PI) - PI;
    if w <= -PI {
        w + TWO_PI
    } else {
        w
    }
}

/// Fits a single sinusoid. `freq_hint` is in cycles per x unit.
pub fn fit_sinusoid(x: &[f64], y: &[f64], freq_hint: f64) -> Result<FitReport, FitError> {
    if x.len() != y.len() {
        return Err(FitError::Precondition(format!("x has {} points but y has {}", x.len(), y.len())));
    }
    if x.len() < 8 {
        return Err(FitError::Precondition(format!("need at least 8 points, got {}", x.len())));
    }
    if !(freq_hint > 0.0) || !freq_hint.is_finite() {
        return Err(FitError::Precondition(format!("frequency hint must be positive, got {freq_hint}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(FitError::Precondition("non-finite data".into()));
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if (hi - lo) * freq_hint < 1.5 {
        return Err(FitError::Precondition(format!(
            "data span {} covers fewer than 1.5 periods of the hinted frequency",
            hi - lo
        )));
    }

    let mut best: Option<(f64, f64, [f64; 3])> = None;
    for k in 0..GRID_POINTS {
        let f = freq_hint * (1.0 - GRID_HALF_WIDTH + 2.0 * GRID_HALF_WIDTH * k as f64 / (GRID_POINTS - 1) as f64);
        if let Some((ssr, coef)) = linear_at(x, y, f) {
            if best.is_none_or(|b| ssr < b.0) {
                best = Some((ssr, f, coef));
            }
        }
    }
    let (_, f0, [offset, alpha, beta]) =
        best.ok_or_else(|| FitError::Precondition("design matrix singular at every trial frequency".into()))?;

    // α cos θ + β sin θ = a cos(θ + φ) with a = |α + iβ|, φ = −atan2(β, α)
    let amplitude = alpha.hypot(beta);
    let phase = -beta.atan2(alpha);
    let problem = SinusoidResiduals { x, y };
    let out = levenberg_marquardt(&problem, &[amplitude, f0, phase, offset], &LmOptions::default());

    let mut report = FitReport::from_outcome(
        "offset + amplitude*cos(2*pi*frequency*x + phase)",
        &[("amplitude", "signal"), ("frequency", "cycles/x"), ("phase", "rad"), ("offset", "signal")],
        &out,
    );
    let (mut a, mut phi) = (out.params[0], out.params[2]);
    if a < 0.0 {
        a = -a;
        phi += PI;
    }
    report.parameters[0].value = a;
    report.parameters[2].value = wrap_phase(phi);
    report.degenerate = a < 1e-12 * (1.0 + offset.abs());
    Ok(report)
}
