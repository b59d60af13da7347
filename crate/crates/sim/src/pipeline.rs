//! The three solution pipelines and their timing.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use mpwm_core::basis::{PwmBasis, SpectralBasis};
use mpwm_core::dae::{integrate_with_switching, IntegrationStats, StateHistory, SwitchedSolution};
use mpwm_core::mpde::{EigenSystem, GalerkinSystem, PwmExpansion, SpectralExpansion};
use mpwm_core::Complex64;

use crate::config::{Model, PipelineKind, RunConfig};
use crate::error::{SimError, SimResult};
use crate::metrics::l2_error;

/// Timing and work of one run, plus errors against a reference if computed.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub pipeline: PipelineKind,
    pub np: usize,
    pub abstol: f64,
    pub reltol: f64,
    pub eps_vc: Option<f64>,
    pub eps_il: Option<f64>,
    /// Basis, Galerkin/eigen assembly and initial coefficients.
    pub assembly_time: Duration,
    /// Consistent initialization at switching instants (reference only).
    pub init_time: Duration,
    /// Integration time; for the decoupled blocks the slowest block.
    pub solve_time: Duration,
    /// Per-block integration times of the decoupled pipeline, by block index.
    pub subsystem_times: Vec<(usize, Duration)>,
    pub stats: IntegrationStats,
    pub solve_set: Vec<usize>,
}

impl RunReport {
    /// Reported cost: assembly plus solve, consistent initialization excluded.
    pub fn total_time(&self) -> Duration {
        self.assembly_time + self.solve_time
    }
}

/// A computed solution in whatever form its pipeline produces.
#[derive(Debug, Clone)]
pub enum Solution {
    Reference(SwitchedSolution),
    Coupled(PwmExpansion),
    Balance(SpectralExpansion),
}

impl Solution {
    pub fn history(&self) -> &dyn StateHistory {
        match self {
            Solution::Reference(s) => &s.trajectory,
            Solution::Coupled(e) => e,
            Solution::Balance(e) => e,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: RunConfig,
    pub model: Model,
    pub solution: Solution,
    pub report: RunReport,
}

fn report_for(cfg: &RunConfig) -> RunReport {
    RunReport { pipeline: cfg.pipeline, np: cfg.np, abstol: cfg.abstol, reltol: cfg.reltol, ..Default::default() }
}

/// Switch-restart time stepping with the run tolerances.
pub fn run_reference(model: &Model, cfg: &RunConfig) -> SimResult<(Solution, RunReport)> {
    let sol = integrate_with_switching(&model.dae, cfg.span(), &cfg.solver())?;
    let report = RunReport {
        pipeline: PipelineKind::Reference,
        init_time: sol.init_time,
        solve_time: sol.total_time.saturating_sub(sol.init_time),
        stats: sol.stats,
        ..report_for(cfg)
    };
    Ok((Solution::Reference(sol), report))
}

/// Coupled Galerkin system over the PWM basis.
pub fn run_mpde_pwm(model: &Model, cfg: &RunConfig) -> SimResult<(Solution, RunReport)> {
    let clock = Instant::now();
    let basis = PwmBasis::generate(cfg.np, cfg.duty)?;
    let gs = GalerkinSystem::assemble(&model.dae, basis.clone())?;
    let w0 = gs.initial_coeffs(cfg.init.into())?;
    let assembly_time = clock.elapsed();
    let sol = gs.solve(&w0, cfg.span(), &cfg.solver())?;
    let report = RunReport {
        pipeline: PipelineKind::MpdePwm,
        assembly_time,
        solve_time: sol.elapsed,
        stats: sol.stats,
        ..report_for(cfg)
    };
    Ok((Solution::Coupled(PwmExpansion::new(basis, cfg.period(), sol.trajectory)?), report))
}

/// Decoupled eigen blocks; the solve set is integrated on `cfg.threads`
/// workers and the remaining blocks are filled in by conjugation.
pub fn run_pwm_balance(model: &Model, cfg: &RunConfig) -> SimResult<(Solution, RunReport)> {
    let clock = Instant::now();
    let basis = PwmBasis::generate(cfg.np, cfg.duty)?;
    let gs = GalerkinSystem::assemble(&model.dae, basis.clone())?;
    let spectral = SpectralBasis::compute(gs.matrices())?;
    let es = EigenSystem::new(&gs, spectral.clone())?;
    let w0 = es.initial_coeffs(cfg.init.into())?;
    let assembly_time = clock.elapsed();

    let set = es.solve_set();
    let solver = cfg.solver();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    let solved = pool.install(|| {
        set.par_iter()
            .map(|&k| es.subsystem(k).solve(es.block(&w0, k), cfg.span(), &solver))
            .collect::<Vec<_>>()
    });
    let mut stats = IntegrationStats::default();
    let mut subsystem_times = Vec::with_capacity(set.len());
    let mut trajectories = Vec::with_capacity(set.len());
    for (&k, r) in set.iter().zip(solved) {
        let s = r?;
        stats += s.stats;
        subsystem_times.push((k, s.elapsed));
        trajectories.push(s.trajectory);
    }
    let solve_time = subsystem_times.iter().map(|&(_, d)| d).max().unwrap_or_default();
    let blocks = es.complete(trajectories);
    let report = RunReport {
        pipeline: PipelineKind::PwmBalance,
        assembly_time,
        solve_time,
        subsystem_times,
        stats,
        solve_set: set,
        ..report_for(cfg)
    };
    Ok((Solution::Balance(SpectralExpansion::new(basis, spectral, cfg.period(), blocks)?), report))
}

/// Fills in `eps_vc`/`eps_il` of `report` against `reference`.
pub fn compare(report: &mut RunReport, solution: &Solution, reference: &dyn StateHistory, model: &Model, cfg: &RunConfig) -> SimResult<()> {
    let test = solution.history();
    report.eps_vc = Some(l2_error(reference, test, model.vc, cfg.span(), cfg.error_samples)?);
    report.eps_il = Some(l2_error(reference, test, model.il, cfg.span(), cfg.error_samples)?);
    Ok(())
}

/// Runs the configured pipeline on an already built model.
pub fn run_on_model(model: &Model, cfg: &RunConfig) -> SimResult<(Solution, RunReport)> {
    match cfg.pipeline {
        PipelineKind::Reference => run_reference(model, cfg),
        PipelineKind::MpdePwm => run_mpde_pwm(model, cfg),
        PipelineKind::PwmBalance => run_pwm_balance(model, cfg),
    }
}

/// Reference solution at `cfg.reference_tol`.
pub fn reference_solution(model: &Model, cfg: &RunConfig) -> SimResult<SwitchedSolution> {
    Ok(integrate_with_switching(&model.dae, cfg.span(), &cfg.reference_solver())?)
}

/// Builds the model, runs the pipeline and, if requested, measures errors
/// against a tight reference run.
pub fn run_pipeline(cfg: &RunConfig) -> SimResult<RunOutput> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let (solution, mut report) = run_on_model(&model, cfg)?;
    if cfg.compare {
        let reference = reference_solution(&model, cfg)?;
        compare(&mut report, &solution, &reference.trajectory, &model, cfg)?;
    }
    Ok(RunOutput { config: cfg.clone(), model, solution, report })
}

/// Slow-time coefficient of state `j` for every block, sampled at `t`.
pub fn coefficients_at(solution: &Solution, state_dim: usize, j: usize, t: f64) -> SimResult<Option<Vec<Complex64>>> {
    Ok(match solution {
        Solution::Reference(_) => None,
        Solution::Coupled(e) => {
            let w = e.coefficients().eval(t)?;
            let nb = w.len() / state_dim;
            Some((0..nb).map(|k| Complex64::new(w[k * state_dim + j], 0.0)).collect())
        }
        Solution::Balance(e) => Some(e.blocks().iter().map(|b| b.eval(t).map(|w| w[j])).collect::<Result<Vec<_>, _>>()?),
    })
}
