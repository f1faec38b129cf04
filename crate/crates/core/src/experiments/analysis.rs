// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::SweepResult;

/// Topographic prominence of the peak at `i`: its height above the higher of
/// the two lowest points separating it from a taller peak (or the ends).
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    for j in (0..i).rev() {
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    for &v in &y[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Indices of interior local maxima whose prominence is at least
/// `min_prominence`. A flat top counts once, at its first index.
pub fn local_maxima(y: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if y[i] > y[i - 1] {
            let mut j = i;
            while j + 1 < n && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[i] && prominence(y, i) >= min_prominence {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Vertex of the parabola through points `i − 1, i, i + 1`.
pub fn parabolic_peak(x: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= x.len() {
        return (x[i], y[i]);
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
    if a >= 0.0 {
        return (x1, y1);
    }
    let xv = -b / (2.0 * a);
    let c = y1 - a * x1 * x1 - b * x1;
    (xv, a * xv * xv + b * xv + c)
}

/// Refined extrema of a Rabi curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RabiExtrema {
    /// (area, value) of each maximum in increasing area.
    pub maxima: Vec<(f64, f64)>,
    pub minima: Vec<(f64, f64)>,
}

pub fn rabi_extrema(areas: &[f64], values: &[f64], min_prominence: f64) -> RabiExtrema {
    let neg: Vec<f64> = values.iter().map(|v| -v).collect();
    let maxima = local_maxima(values, min_prominence).into_iter().map(|i| parabolic_peak(areas, values, i)).collect();
    let minima = local_maxima(&neg, min_prominence)
        .into_iter()
        .map(|i| {
            let (x, y) = parabolic_peak(areas, &neg, i);
            (x, -y)
        })
        .collect();
    RabiExtrema { maxima, minima }
}

/// Unwraps a phase sequence so consecutive differences lie in (−π, π].
pub fn unwrap_phases(phases: &[f64]) -> Vec<f64> {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let prev = phases[k - 1];
            let mut d = p - prev;
            while d > PI {
                d -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while d <= -PI {
                d += 2.0 * PI;
                offset += 2.0 * PI;
            }
        }
        out.push(p + offset);
    }
    out
}

/// Ordinary least-squares line; returns `(slope, intercept, r²)`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

/// Strict 2-D local maxima (8-neighbourhood) of a map with rows along the
/// first axis, as `(row coordinate, column coordinate, value)`.
pub fn map_peaks(map: &SweepResult) -> Vec<(f64, f64, f64)> {
    let rows = &map.axes[0].values;
    let cols = &map.axes[1].values;
    let (nr, nc) = (rows.len(), cols.len());
    let at = |i: usize, j: usize| map.values[i * nc + j];
    let mut out = Vec::new();
    for i in 1..nr.saturating_sub(1) {
        for j in 1..nc.saturating_sub(1) {
            let v = at(i, j);
            let mut peak = true;
            for di in 0..3 {
                for dj in 0..3 {
                    if (di, dj) != (1, 1) && at(i + di - 1, j + dj - 1) >= v {
                        peak = false;
                    }
                }
            }
            if peak {
                out.push((rows[i], cols[j], v));
            }
        }
    }
    out
}

/// Maxima along the area axis of a control map, taken through the fine
/// delay at which the signal below `low_area_limit` peaks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaProfile {
    pub fine_delay: f64,
    /// `(area, value)` of each local maximum along the profile.
    pub maxima: Vec<(f64, f64)>,
}

pub fn low_area_profile(map: &SweepResult, low_area_limit: f64, min_prominence: f64) -> AreaProfile {
    let rows = &map.axes[0].values;
    let cols = &map.axes[1].values;
    let nc = cols.len();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &a) in rows.iter().enumerate() {
        if a > low_area_limit {
            continue;
        }
        for j in 0..nc {
            let v = map.values[i * nc + j];
            if v > best.1 {
                best = (j, v);
            }
        }
    }
    let column: Vec<f64> = (0..rows.len()).map(|i| map.values[i * nc + best.0]).collect();
    let maxima = local_maxima(&column, min_prominence).into_iter().map(|i| (rows[i], column[i])).collect();
    AreaProfile { fine_delay: cols[best.0], maxima }
}
