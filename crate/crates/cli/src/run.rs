// SPDX-License-Identifier: Apache-2.0

//! Executes one configured experiment and writes its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use trion_core::experiments::{
    analyze_coherence, coherence_fringes, control_map, rabi_sweep, ramsey_fine_scan, worker_threads, Simulator,
    SweepResult,
};
use trion_core::fit::{DecayFits, FitReport};

use crate::config::{Experiment, RunConfig};
use crate::output::{write_csv, write_json, write_sweep_csv, Manifest};

/// What a finished run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub rows: usize,
    pub partial: bool,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        !self.partial && self.error.is_none()
    }
}

#[derive(Serialize)]
struct FringeFit<'a> {
    coarse_delay_ps: f64,
    report: &'a FitReport,
}

#[derive(Serialize)]
struct CoherenceFits<'a> {
    decay: &'a DecayFits,
    fringes: Vec<FringeFit<'a>>,
}

fn sweep(sim: &Simulator, c: &RunConfig) -> Result<SweepResult, trion_core::experiments::ExperimentError> {
    let g = &c.grids;
    match c.experiment {
        Experiment::Rabi => rabi_sweep(sim, &c.sequence, &g.areas.values()),
        Experiment::Ramsey => ramsey_fine_scan(sim, &c.sequence, g.pulse_area_pi, &g.fine_delays.values()),
        Experiment::Coherence => {
            coherence_fringes(sim, &c.sequence, g.pulse_area_pi, &g.coarse_delays.values(), &g.fine_delays.values())
        }
        Experiment::Map => control_map(sim, &c.sequence, &g.map_areas.values(), &g.map_fine_delays.values()),
        Experiment::Zeeman => unreachable!("zeeman runs are not sweeps"),
    }
}

fn run_zeeman(c: &RunConfig, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let lines = c.magneto.sweep(c.grids.b_max, c.grids.b_points)?;
    let columns = ["b_t", "outer_low_uev", "inner_low_uev", "inner_high_uev", "outer_high_uev"];
    let rows = lines.iter().map(|l| {
        let [a, b, cc, d] = l.as_array();
        vec![l.b, a, b, cc, d]
    });
    manifest.rows = write_csv(&dir.join("values.csv"), &columns, rows)?;
    manifest.columns = columns.iter().map(|s| s.to_string()).collect();
    manifest.files.push("values.csv".into());
    let b = c.grids.b_max;
    let splittings = serde_json::json!({
        "b_t": b,
        "ground_splitting_ghz": c.magneto.ground_splitting_ghz(b),
        "trion_splitting_ghz": c.magneto.trion_splitting_ghz(b),
        "diamagnetic_shift_uev": c.magneto.diamagnetic_shift(b),
    });
    write_json(&dir.join("splittings.json"), &splittings)?;
    manifest.files.push("splittings.json".into());
    Ok(())
}

fn run_sweep(c: &RunConfig, sim: &Simulator, dir: &Path, manifest: &mut Manifest) -> Result<()> {
    let result = sweep(sim, c)?;
    let rows = write_sweep_csv(&dir.join("values.csv"), &result)?;
    manifest.describe(&result, rows);
    manifest.files.push("values.csv".into());
    if c.experiment != Experiment::Coherence || result.is_partial() {
        return Ok(());
    }
    let scan = analyze_coherence(result)?;
    write_sweep_csv(&dir.join("amplitudes.csv"), &scan.amplitudes)?;
    manifest.files.push("amplitudes.csv".into());
    let fits = CoherenceFits {
        decay: &scan.decay,
        fringes: scan
            .fringe_fits
            .iter()
            .zip(&scan.amplitudes.axes[0].values)
            .map(|(report, &coarse_delay_ps)| FringeFit { coarse_delay_ps, report })
            .collect(),
    };
    write_json(&dir.join("fits.json"), &fits)?;
    manifest.files.push("fits.json".into());
    Ok(())
}

/// Runs the experiment in `config` and writes values.csv, manifest.json and,
/// for coherence runs, amplitudes.csv and fits.json into the output directory.
/// The manifest is written even when the run fails.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let threads = worker_threads();
    let mut manifest = Manifest::new(config, threads, chrono::Utc::now().to_rfc3339());
    let outcome = match config.experiment {
        Experiment::Zeeman => run_zeeman(config, &dir, &mut manifest),
        _ => Simulator::new(config.system.clone(), config.solver.clone())
            .map_err(anyhow::Error::from)
            .and_then(|sim| run_sweep(config, &sim.with_threads(threads), &dir, &mut manifest)),
    };
    if let Err(e) = &outcome {
        manifest.error = Some(format!("{e:#}"));
        manifest.partial = true;
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    manifest.files.push("manifest.json".into());
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(RunSummary {
        out_dir: dir,
        rows: manifest.rows,
        partial: manifest.partial,
        error: manifest.error,
        wall_time_s: manifest.wall_time_s,
    })
}
