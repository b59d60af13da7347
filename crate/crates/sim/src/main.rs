use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpwm_sim::config::{InitKind, ModelKind, PipelineKind, RunConfig};
use mpwm_sim::output::{basis_csv, write_file, write_matrices, write_run};
use mpwm_sim::sweep::{run_sweep, write_sweep, SweepAxis};
use mpwm_sim::{run_pipeline, SimResult};

#[derive(Parser)]
#[command(name = "mpwm", version, about = "Multirate PWM balance simulation of buck converters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and write waveforms, coefficients and a report.
    Simulate(SimulateArgs),
    /// Repeat a run over a list of Np or tolerance values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum)]
        vary: SweepAxis,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
    },
    /// Sample the PWM basis functions and eigenfunctions on [0, 1].
    BasisDump {
        #[arg(long, default_value_t = 4)]
        np: usize,
        #[arg(long, default_value_t = 0.5)]
        duty: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

/// Run settings; flags override values from `--config`.
#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, value_enum)]
    pipeline: Option<PipelineKind>,
    #[arg(long)]
    np: Option<usize>,
    #[arg(long)]
    duty: Option<f64>,
    /// Switching frequency in Hz.
    #[arg(long)]
    fs: Option<f64>,
    #[arg(long)]
    v0: Option<f64>,
    /// End time in seconds.
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    abstol: Option<f64>,
    #[arg(long)]
    reltol: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    /// Tolerance of the reference run used for error measurement.
    #[arg(long)]
    reference_tol: Option<f64>,
    /// Skip the reference run and error measurement.
    #[arg(long)]
    no_compare: bool,
    /// Mesh divisions of the FEM model (multiple of 8).
    #[arg(long)]
    divisions: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write A, B (and the FEM mesh) as `row col value` text.
    #[arg(long)]
    dump_matrices: bool,
}

impl RunArgs {
    fn resolve(&self) -> SimResult<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_toml_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { c.$f = v; } )* };
        }
        set!(model, pipeline, np, duty, fs, v0, tend, abstol, reltol, threads, init, reference_tol, out);
        if self.no_compare {
            c.compare = false;
        }
        if let Some(d) = self.divisions {
            c.fem.geometry.divisions = d;
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.run.resolve()?;
            let out = run_pipeline(&cfg)?;
            let r = &out.report;
            eprintln!(
                "{}: {} steps, {} factorizations, solve {:.3} s, assembly {:.3} s, init {:.3} s",
                r.pipeline.name(),
                r.stats.accepted_steps,
                r.stats.factorizations,
                r.solve_time.as_secs_f64(),
                r.assembly_time.as_secs_f64(),
                r.init_time.as_secs_f64()
            );
            if let (Some(v), Some(i)) = (r.eps_vc, r.eps_il) {
                eprintln!("relative L2 error: vC {v:.3e}, iL {i:.3e}");
            }
            let mut paths = write_run(&out, &cfg.out)?;
            if args.dump_matrices {
                paths.extend(write_matrices(&out.model, &cfg.out)?);
            }
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Sweep { run, vary, values } => {
            let cfg = run.resolve()?;
            let reports = run_sweep(&cfg, vary, &values)?;
            for r in &reports {
                eprintln!(
                    "np {} tol {:.1e}: eps vC {:.3e}, iL {:.3e}, total {:.3} s",
                    r.np,
                    r.abstol,
                    r.eps_vc.unwrap_or(f64::NAN),
                    r.eps_il.unwrap_or(f64::NAN),
                    r.total_time().as_secs_f64()
                );
            }
            for p in write_sweep(&reports, &cfg.out)? {
                println!("{}", p.display());
            }
        }
        Command::BasisDump { np, duty, points, out } => {
            let (p, g) = basis_csv(np, duty, points)?;
            println!("{}", write_file(&out, "basis.csv", &p)?.display());
            println!("{}", write_file(&out, "eigenbasis.csv", &g)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
