//! CSV and gnuplot output. Every file except the timing files is a pure
//! function of the configuration, so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mpwm_core::basis::{PwmBasis, SpectralBasis};

use crate::config::Model;
use crate::error::{SimError, SimResult};
use crate::pipeline::{coefficients_at, RunOutput, RunReport, Solution};

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> SimResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| SimError::io(&path, e))?;
    Ok(path)
}

pub fn sample_times(span: (f64, f64), n: usize) -> Vec<f64> {
    let (t0, t1) = span;
    (0..n).map(|i| if i + 1 == n { t1 } else { t0 + (t1 - t0) * i as f64 / (n - 1) as f64 }).collect()
}

/// `t,vC,iL[,Peddy]` on a uniform grid.
pub fn waveform_csv(out: &RunOutput) -> SimResult<String> {
    let history = out.solution.history();
    let fem = out.model.fem.as_ref();
    let mut s = String::from(if fem.is_some() { "t,vC,iL,Peddy\n" } else { "t,vC,iL\n" });
    for t in sample_times(out.config.span(), out.config.output_samples) {
        let x = history.state(t)?;
        let _ = write!(s, "{},{},{}", num(t), num(x[out.model.vc]), num(x[out.model.il]));
        if let Some(fem) = fem {
            let dx = history.state_derivative(t)?;
            let _ = write!(s, ",{}", num(fem.eddy_loss(&dx[..fem.n_dofs()])));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Slow-time coefficients of the configured state; `None` for the reference.
pub fn coefficient_csv(out: &RunOutput) -> SimResult<Option<String>> {
    let j = out
        .model
        .dae
        .label_index(&out.config.coefficient_state)
        .ok_or_else(|| SimError::Config(format!("unknown state '{}'", out.config.coefficient_state)))?;
    let n = out.model.dae.dim();
    let nb = out.config.np + 1;
    let complex = matches!(out.solution, Solution::Balance(_));
    let mut s = String::from("t");
    for k in 0..nb {
        if complex {
            let _ = write!(s, ",re_w{k},im_w{k}");
        } else {
            let _ = write!(s, ",w{k}");
        }
    }
    s.push('\n');
    for t in sample_times(out.config.span(), out.config.output_samples) {
        let Some(w) = coefficients_at(&out.solution, n, j, t)? else { return Ok(None) };
        s.push_str(&num(t));
        for z in w {
            if complex {
                let _ = write!(s, ",{},{}", num(z.re), num(z.im));
            } else {
                let _ = write!(s, ",{}", num(z.re));
            }
        }
        s.push('\n');
    }
    Ok(Some(s))
}

pub const REPORT_HEADER: &str = "pipeline,np,abstol,reltol,eps_vC,eps_iL,accepted_steps,rejected_steps,factorizations";

pub fn report_row(r: &RunReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.pipeline.name(),
        r.np,
        num(r.abstol),
        num(r.reltol),
        opt(r.eps_vc),
        opt(r.eps_il),
        r.stats.accepted_steps,
        r.stats.rejected_steps,
        r.stats.factorizations
    )
}

pub const TIMING_HEADER: &str = "pipeline,np,abstol,assembly_s,init_s,solve_s,total_s,max_subsystem_s";

/// Wall-clock decomposition: `total = assembly + solve`, where `solve` is the
/// slowest block for the decoupled pipeline.
pub fn timing_row(r: &RunReport) -> String {
    let max_sub = r.subsystem_times.iter().map(|&(_, d)| d.as_secs_f64()).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    format!(
        "{},{},{},{:.6},{:.6},{:.6},{:.6},{}",
        r.pipeline.name(),
        r.np,
        num(r.abstol),
        r.assembly_time.as_secs_f64(),
        r.init_time.as_secs_f64(),
        r.solve_time.as_secs_f64(),
        r.total_time().as_secs_f64(),
        max_sub.map_or_else(String::new, |v| format!("{v:.6}"))
    )
}

pub fn subsystem_timing_csv(r: &RunReport) -> String {
    let mut s = String::from("block,solve_s\n");
    for &(k, d) in &r.subsystem_times {
        let _ = writeln!(s, "{k},{:.6}", d.as_secs_f64());
    }
    s
}

const WAVEFORM_GP: &str = "set datafile separator ','
set key autotitle columnhead
set xlabel 't / s'
set multiplot layout 2,1
set ylabel 'vC / V'
plot 'waveform.csv' using 1:2 with lines
set ylabel 'iL / A'
plot 'waveform.csv' using 1:3 with lines
unset multiplot
";

const COEFFICIENT_GP: &str = "set datafile separator ','
set key autotitle columnhead
set xlabel 't1 / s'
plot for [c=2:*] 'coefficients.csv' using 1:c with lines
";

/// Writes every output of a single run into `dir`; returns the paths.
pub fn write_run(out: &RunOutput, dir: &Path) -> SimResult<Vec<PathBuf>> {
    let mut paths = vec![write_file(dir, "waveform.csv", &waveform_csv(out)?)?];
    paths.push(write_file(dir, "waveform.gp", WAVEFORM_GP)?);
    if let Some(c) = coefficient_csv(out)? {
        paths.push(write_file(dir, "coefficients.csv", &c)?);
        paths.push(write_file(dir, "coefficients.gp", COEFFICIENT_GP)?);
    }
    paths.push(write_file(dir, "report.csv", &format!("{REPORT_HEADER}\n{}\n", report_row(&out.report)))?);
    paths.push(write_file(dir, "timing.csv", &format!("{TIMING_HEADER}\n{}\n", timing_row(&out.report)))?);
    if !out.report.subsystem_times.is_empty() {
        paths.push(write_file(dir, "subsystem_timing.csv", &subsystem_timing_csv(&out.report))?);
    }
    Ok(paths)
}

/// Descriptor matrices and, for the FEM model, the mesh in `row col value`
/// and plain node/triangle text form.
pub fn write_matrices(model: &Model, dir: &Path) -> SimResult<Vec<PathBuf>> {
    let mut paths = vec![write_file(dir, "A.txt", &model.dae.a().to_text())?, write_file(dir, "B.txt", &model.dae.b().to_text())?];
    if let Some(fem) = &model.fem {
        let (nodes, tris) = fem.mesh.to_text();
        paths.push(write_file(dir, "mesh_nodes.txt", &nodes)?);
        paths.push(write_file(dir, "mesh_triangles.txt", &tris)?);
    }
    Ok(paths)
}

/// `tau,p0,...` and `tau,re_g0,im_g0,...` on `points` samples of `[0, 1]`.
pub fn basis_csv(np: usize, duty: f64, points: usize) -> SimResult<(String, String)> {
    let basis = PwmBasis::generate(np, duty)?;
    let spectral = SpectralBasis::compute(&basis.galerkin_matrices(1.0))?;
    let mut p = String::from("tau");
    let mut g = String::from("tau");
    for k in 0..basis.len() {
        let _ = write!(p, ",p{k}");
        let _ = write!(g, ",re_g{k},im_g{k}");
    }
    p.push('\n');
    g.push('\n');
    for tau in sample_times((0.0, 1.0), points.max(2)) {
        let pv = basis.eval_tau(tau);
        p.push_str(&num(tau));
        pv.iter().for_each(|v| p.push_str(&format!(",{}", num(*v))));
        p.push('\n');
        g.push_str(&num(tau));
        for z in spectral.combine(&pv) {
            let _ = write!(g, ",{},{}", num(z.re), num(z.im));
        }
        g.push('\n');
    }
    Ok((p, g))
}
