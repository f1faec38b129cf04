// SPDX-License-Identifier: Apache-2.0

//! Unit conversions. Internally frequencies are angular (rad/ns) and times are
//! in ns; everything user-facing is GHz, ps, fs, ns⁻¹, μeV and T.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// Planck constant in μeV/GHz.
pub const PLANCK_UEV_PER_GHZ: f64 = 4.135_667_696;

/// Bohr magneton in μeV/T.
pub const BOHR_MAGNETON_UEV_PER_T: f64 = 57.88;

pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    TWO_PI * f_ghz
}

pub fn angular_to_ghz(w: f64) -> f64 {
    w / TWO_PI
}

pub fn ps_to_ns(t_ps: f64) -> f64 {
    t_ps * 1e-3
}

pub fn ns_to_ps(t_ns: f64) -> f64 {
    t_ns * 1e3
}

pub fn fs_to_ns(t_fs: f64) -> f64 {
    t_fs * 1e-6
}

pub fn uev_to_ghz(e_uev: f64) -> f64 {
    e_uev / PLANCK_UEV_PER_GHZ
}

pub fn ghz_to_uev(f_ghz: f64) -> f64 {
    f_ghz * PLANCK_UEV_PER_GHZ
}

/// Error-free product: `a·b = p + e` exactly.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Fractional part (in cycles, `[0, 1)`) of `freq·time/scale`, with the
/// product kept exact until the reduction.
pub fn fractional_cycles(freq: f64, time: f64, scale: f64) -> f64 {
    let (p, e) = two_prod(freq, time);
    // fmod is exact in IEEE arithmetic
    let r = p % scale;
    ((r + e) / scale).rem_euclid(1.0)
}
