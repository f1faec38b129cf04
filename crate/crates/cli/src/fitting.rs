// SPDX-License-Identifier: Apache-2.0

//! Fits of user-supplied CSV data.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use trion_core::fit::{calibrate_power_axis, fit_exponential, fit_sinusoid};
use trion_core::trion::laser_frequency;

use crate::config::RunConfig;
use crate::output::write_json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// offset + amplitude·cos(2π·frequency·x + phase), x in fs
    Sinusoid,
    /// a0·exp(−x/tau) [+ baseline], x in ps
    Exponential,
    /// counts = scale·S(k·√power) + offset against a simulated curve
    Calibration,
}

#[derive(Clone, Debug)]
pub struct FitRequest {
    pub kind: FitKind,
    pub data: PathBuf,
    pub model: Option<PathBuf>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub freq_hint: Option<f64>,
}

/// Two columns of a headed CSV; by default the first and the last.
pub fn read_columns(path: &Path, x: Option<&str>, y: Option<&str>) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = r.headers()?.clone();
    let find = |name: Option<&str>, default: usize| -> Result<usize> {
        match name {
            None => Ok(default),
            Some(n) => match headers.iter().position(|h| h.trim() == n) {
                Some(i) => Ok(i),
                None => bail!("{}: no column `{n}` (have {:?})", path.display(), headers.iter().collect::<Vec<_>>()),
            },
        }
    };
    if headers.len() < 2 {
        bail!("{}: need at least two columns", path.display());
    }
    let (ix, iy) = (find(x, 0)?, find(y, headers.len() - 1)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            let field = rec.get(i).unwrap_or("").trim();
            field.parse().with_context(|| format!("{}: row {}: `{field}` is not a number", path.display(), line + 2))
        };
        xs.push(parse(ix)?);
        ys.push(parse(iy)?);
    }
    Ok((xs, ys))
}

#[derive(Serialize)]
struct FitOutput<'a, T: Serialize> {
    kind: FitKind,
    data: &'a Path,
    model: Option<&'a Path>,
    points: usize,
    result: T,
}

/// Runs the fit and writes fits.json into the configured output directory.
pub fn fit(req: &FitRequest, config: &RunConfig) -> Result<PathBuf> {
    let (x, y) = read_columns(&req.data, req.x.as_deref(), req.y.as_deref())?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join("fits.json");
    let out = |result: serde_json::Value| FitOutput {
        kind: req.kind,
        data: &req.data,
        model: req.model.as_deref(),
        points: x.len(),
        result,
    };
    let value = match req.kind {
        FitKind::Sinusoid => {
            let hint =
                req.freq_hint.unwrap_or_else(|| laser_frequency(&config.system, config.sequence.detuning) * 1e-6);
            serde_json::to_value(fit_sinusoid(&x, &y, hint)?)?
        }
        FitKind::Exponential => serde_json::to_value(fit_exponential(&x, &y)?)?,
        FitKind::Calibration => {
            let Some(model) = &req.model else { bail!("calibration needs --model <csv> with (area, signal) columns") };
            let (ax, ay) = read_columns(model, None, None)?;
            let measured: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
            let curve: Vec<(f64, f64)> = ax.into_iter().zip(ay).collect();
            serde_json::to_value(calibrate_power_axis(&measured, &curve)?)?
        }
    };
    write_json(&path, &out(value))?;
    Ok(path)
}
