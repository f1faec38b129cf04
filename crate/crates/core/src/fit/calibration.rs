// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, Matrix2, Vector2};

use super::lm::{levenberg_marquardt, LmOptions, Residuals};
use super::spline::CubicSpline;
use super::{FitError, FitReport};

const GRID_POINTS: usize = 400;

/// counts = counts_scale·S(area_per_sqrt_power·√power) + counts_offset, with
/// S the model curve; parameters `[area_per_sqrt_power, counts_scale,
/// counts_offset]`.
pub struct CalibrationResiduals<'a> {
    pub sqrt_power: Vec<f64>,
    pub counts: &'a [f64],
    pub curve: CubicSpline,
}

impl Residuals for CalibrationResiduals<'_> {
    fn len(&self) -> usize {
        self.counts.len()
    }

    fn n_params(&self) -> usize {
        3
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for ((o, &s), &c) in out.iter_mut().zip(&self.sqrt_power).zip(self.counts) {
            *o = p[1] * self.curve.eval(p[0] * s) + p[2] - c;
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        for (i, &s) in self.sqrt_power.iter().enumerate() {
            let (v, dv) = self.curve.eval_with_derivative(p[0] * s);
            out[(i, 0)] = p[1] * dv * s;
            out[(i, 1)] = v;
            out[(i, 2)] = 1.0;
        }
    }
}

/// Maps measured (power, counts) onto a simulated (area, signal) curve.
pub fn calibrate_power_axis(measured: &[(f64, f64)], model_curve: &[(f64, f64)]) -> Result<FitReport, FitError> {
    if measured.len() < 6 {
        return Err(FitError::Precondition(format!("need at least 6 measured points, got {}", measured.len())));
    }
    if measured.iter().any(|&(p, c)| !(p >= 0.0) || !p.is_finite() || !c.is_finite()) {
        return Err(FitError::Precondition("powers must be finite and non-negative".into()));
    }
    let (ax, ay): (Vec<f64>, Vec<f64>) = model_curve.iter().copied().unzip();
    let curve = CubicSpline::new(&ax, &ay)
        .ok_or_else(|| FitError::Precondition("model curve needs at least 3 strictly increasing areas".into()))?;
    let sqrt_power: Vec<f64> = measured.iter().map(|m| m.0.sqrt()).collect();
    let counts: Vec<f64> = measured.iter().map(|m| m.1).collect();
    let s_max = sqrt_power.iter().fold(0.0, |a: f64, &b| a.max(b));
    if s_max == 0.0 {
        return Err(FitError::Precondition("all powers are zero".into()));
    }

    // variable projection: for each trial k the scale and offset are linear
    let (_, area_max) = curve.domain();
    let mut best: Option<(f64, [f64; 3])> = None;
    for g in 1..=GRID_POINTS {
        let k = area_max / s_max * g as f64 / GRID_POINTS as f64;
        let mut ata = Matrix2::zeros();
        let mut aty = Vector2::zeros();
        for (&s, &c) in sqrt_power.iter().zip(&counts) {
            let row = Vector2::new(curve.eval(k * s), 1.0);
            ata += row * row.transpose();
            aty += row * c;
        }
        let Some(chol) = ata.cholesky() else { continue };
        let sol = chol.solve(&aty);
        let ssr: f64 =
            sqrt_power.iter().zip(&counts).map(|(&s, &c)| (sol[0] * curve.eval(k * s) + sol[1] - c).powi(2)).sum();
        if best.is_none_or(|b| ssr < b.0) {
            best = Some((ssr, [k, sol[0], sol[1]]));
        }
    }
    let (_, p0) = best.ok_or_else(|| FitError::Precondition("model curve is flat over the measured range".into()))?;
    let problem = CalibrationResiduals { sqrt_power, counts: &counts, curve };
    let out = levenberg_marquardt(&problem, &p0, &LmOptions::default());
    Ok(FitReport::from_outcome(
        "counts_scale*S(area_per_sqrt_power*sqrt(power)) + counts_offset",
        &[("area_per_sqrt_power", "area/sqrt(power)"), ("counts_scale", "counts"), ("counts_offset", "counts")],
        &out,
    ))
}
