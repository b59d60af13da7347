use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{SimError, SimResult};
use crate::output::{report_row, timing_row, write_file, REPORT_HEADER, TIMING_HEADER};
use crate::pipeline::{compare, reference_solution, run_on_model, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    /// Number of basis functions `Np`.
    Np,
    /// `abstol = reltol`.
    Tol,
}

/// Runs the configured pipeline once per value, all against one shared
/// reference at `base.reference_tol`.
pub fn run_sweep(base: &RunConfig, axis: SweepAxis, values: &[f64]) -> SimResult<Vec<RunReport>> {
    base.validate()?;
    if values.is_empty() {
        return Err(SimError::Config("sweep needs at least one value".into()));
    }
    let model = base.build_model()?;
    let reference = reference_solution(&model, base)?;
    let mut reports = Vec::with_capacity(values.len());
    for &v in values {
        let mut cfg = base.clone();
        match axis {
            SweepAxis::Np => {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(SimError::Config(format!("Np must be a non-negative integer, got {v}")));
                }
                cfg.np = v as usize;
            }
            SweepAxis::Tol => {
                cfg.abstol = v;
                cfg.reltol = v;
            }
        }
        cfg.validate()?;
        let (solution, mut report) = run_on_model(&model, &cfg)?;
        compare(&mut report, &solution, &reference.trajectory, &model, &cfg)?;
        reports.push(report);
    }
    Ok(reports)
}

const SWEEP_GP: &str = "set datafile separator ','
set key autotitle columnhead
set logscale y
set ylabel 'relative L2 error'
plot 'sweep.csv' using 2:5 with linespoints title 'vC', '' using 2:6 with linespoints title 'iL'
";

/// `sweep.csv` (errors and work, deterministic) and `sweep_timing.csv`.
pub fn write_sweep(reports: &[RunReport], dir: &Path) -> SimResult<Vec<PathBuf>> {
    let mut errors = format!("{REPORT_HEADER}\n");
    let mut timing = format!("{TIMING_HEADER}\n");
    for r in reports {
        errors.push_str(&report_row(r));
        errors.push('\n');
        timing.push_str(&timing_row(r));
        timing.push('\n');
    }
    Ok(vec![
        write_file(dir, "sweep.csv", &errors)?,
        write_file(dir, "sweep_timing.csv", &timing)?,
        write_file(dir, "sweep.gp", SWEEP_GP)?,
    ])
}
