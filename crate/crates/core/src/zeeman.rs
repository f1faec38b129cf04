// SPDX-License-Identifier: Apache-2.0

//! Line positions of the charged dot in a Voigt field: linear electron and
//! hole Zeeman splittings on top of a quadratic diamagnetic shift.

use serde::{Deserialize, Serialize};

use crate::trion::TrionError;
use crate::units::{ghz_to_uev, uev_to_ghz, BOHR_MAGNETON_UEV_PER_T};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagnetoModel {
    pub g_e: f64,
    pub g_h: f64,
    /// μeV/T².
    pub diamagnetic: f64,
    /// Zero-field line energy, μeV.
    pub e0: f64,
}

impl Default for MagnetoModel {
    fn default() -> Self {
        Self { g_e: 1.49, g_h: 0.22, diamagnetic: 7.13, e0: ghz_to_uev(333e3) }
    }
}

/// The four optical lines at one field, μeV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeemanLines {
    pub b: f64,
    /// 3 → 2: lowest-energy outer line.
    pub outer_low: f64,
    /// 4 → 2.
    pub inner_low: f64,
    /// 3 → 1.
    pub inner_high: f64,
    /// 4 → 1: highest-energy outer line.
    pub outer_high: f64,
}

impl ZeemanLines {
    pub fn as_array(&self) -> [f64; 4] {
        [self.outer_low, self.inner_low, self.inner_high, self.outer_high]
    }

    pub fn midpoint(&self) -> f64 {
        self.as_array().iter().sum::<f64>() / 4.0
    }
}

impl MagnetoModel {
    pub fn validate(&self) -> Result<(), TrionError> {
        let bad = |name, value, reason| Err(TrionError::OutOfRange { name, value, reason });
        if !(self.g_h > 0.0) || !self.g_h.is_finite() {
            return bad("g_h", self.g_h, "must be positive");
        }
        if !(self.g_e > self.g_h) || !self.g_e.is_finite() {
            return bad("g_e", self.g_e, "must exceed g_h");
        }
        if !self.diamagnetic.is_finite() {
            return bad("diamagnetic", self.diamagnetic, "must be finite");
        }
        if !self.e0.is_finite() {
            return bad("e0", self.e0, "must be finite");
        }
        Ok(())
    }

    /// Ground-state splitting g_e·μ_B·b, μeV.
    pub fn ground_splitting(&self, b: f64) -> f64 {
        self.g_e * BOHR_MAGNETON_UEV_PER_T * b
    }

    /// Trion splitting g_h·μ_B·b, μeV.
    pub fn trion_splitting(&self, b: f64) -> f64 {
        self.g_h * BOHR_MAGNETON_UEV_PER_T * b
    }

    pub fn ground_splitting_ghz(&self, b: f64) -> f64 {
        uev_to_ghz(self.ground_splitting(b))
    }

    pub fn trion_splitting_ghz(&self, b: f64) -> f64 {
        uev_to_ghz(self.trion_splitting(b))
    }

    /// Shift of the line centroid above e0, μeV.
    pub fn diamagnetic_shift(&self, b: f64) -> f64 {
        self.diamagnetic * b * b
    }

    pub fn lines(&self, b: f64) -> Result<ZeemanLines, TrionError> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(TrionError::OutOfRange { name: "b", value: b, reason: "field must be non-negative" });
        }
        let c = self.e0 + self.diamagnetic_shift(b);
        let gs = self.ground_splitting(b);
        let tr = self.trion_splitting(b);
        Ok(ZeemanLines {
            b,
            outer_low: c - (gs + tr) / 2.0,
            inner_low: c - (gs - tr) / 2.0,
            inner_high: c + (gs - tr) / 2.0,
            outer_high: c + (gs + tr) / 2.0,
        })
    }

    /// Lines on `n` evenly spaced fields from 0 to `b_max`.
    pub fn sweep(&self, b_max: f64, n: usize) -> Result<Vec<ZeemanLines>, TrionError> {
        if n < 2 {
            return Err(TrionError::OutOfRange {
                name: "b_points",
                value: n as f64,
                reason: "need at least two points",
            });
        }
        (0..n).map(|k| self.lines(b_max * k as f64 / (n - 1) as f64)).collect()
    }
}
