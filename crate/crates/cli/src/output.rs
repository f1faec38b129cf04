// SPDX-License-Identifier: Apache-2.0

//! values.csv, manifest.json and fits.json writers.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use trion_core::experiments::{PointFailure, SweepResult};
use trion_core::SolverStats;

use crate::config::{RunConfig, MANIFEST_FORMAT};

/// Writes a long-format table, skipping rows that contain non-finite values.
/// Returns the number of rows written.
pub fn write_csv(path: &Path, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<usize> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(columns)?;
    let mut written = 0;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        if row.iter().all(|v| v.is_finite()) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
            written += 1;
        }
    }
    w.flush()?;
    Ok(written)
}

/// One row per grid point: axis coordinates followed by the value.
pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<usize> {
    let mut columns: Vec<&str> = sweep.axes.iter().map(|a| a.name.as_str()).collect();
    columns.push(&sweep.value_name);
    let rows = (0..sweep.values.len()).map(|k| {
        let mut r = sweep.coordinates(k);
        r.push(sweep.values[k]);
        r
    });
    write_csv(path, &columns, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisSummary {
    pub name: String,
    pub unit: String,
    pub length: usize,
}

/// Min and max of the finite values; the min-max normalization of the run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SignalRange {
    pub min: f64,
    pub max: f64,
}

impl SignalRange {
    pub fn of(values: &[f64]) -> Option<Self> {
        let finite = values.iter().copied().filter(|v| v.is_finite());
        let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        (min <= max).then_some(Self { min, max })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub format: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    /// The effective configuration; feeding it back through `--config`
    /// reproduces the run.
    pub config: RunConfig,
    pub phonon_kappa_ns: f64,
    pub laser_frequency_ghz: f64,
    pub threads: usize,
    pub columns: Vec<String>,
    pub axes: Vec<AxisSummary>,
    pub rows: usize,
    pub signal_range: Option<SignalRange>,
    pub solver_stats: SolverStats,
    pub started_at: String,
    pub wall_time_s: f64,
    pub partial: bool,
    pub failures: Vec<PointFailure>,
    pub error: Option<String>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(config: &RunConfig, threads: usize, started_at: String) -> Self {
        Self {
            format: MANIFEST_FORMAT,
            version: env!("CARGO_PKG_VERSION"),
            experiment: config.experiment.name(),
            config: config.clone(),
            phonon_kappa_ns: config.system.phonon_kappa,
            laser_frequency_ghz: trion_core::trion::laser_frequency(&config.system, config.sequence.detuning),
            threads,
            columns: Vec::new(),
            axes: Vec::new(),
            rows: 0,
            signal_range: None,
            solver_stats: SolverStats::default(),
            started_at,
            wall_time_s: 0.0,
            partial: false,
            failures: Vec::new(),
            error: None,
            files: Vec::new(),
        }
    }

    pub fn describe(&mut self, sweep: &SweepResult, rows: usize) {
        self.columns = sweep.axes.iter().map(|a| a.name.clone()).chain([sweep.value_name.clone()]).collect();
        self.axes = sweep
            .axes
            .iter()
            .map(|a| AxisSummary { name: a.name.clone(), unit: a.unit.clone(), length: a.values.len() })
            .collect();
        self.rows = rows;
        self.signal_range = SignalRange::of(&sweep.values);
        self.solver_stats = sweep.stats;
        self.partial = sweep.is_partial();
        self.failures = sweep.failures.clone();
    }
}
