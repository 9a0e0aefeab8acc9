//! Batch CLI for the RIS-aided THz link simulator.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on solver
//! failures.

use clap::{Args, Parser, Subcommand};
use ris_thz_core::harness::{
    run_oracle_checks, run_runtime, run_ser, run_throughput, to_csv, write_csv, RunConfig, Sweep,
    Visibility,
};
use ris_thz_core::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "ris-thz",
    about = "RIS-aided terahertz link simulator: throughput, SER and runtime experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML configuration file; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep specification, e.g. N=16,36,64,100 or eta2_sq=1e-13,1e-12.
    #[arg(long)]
    sweep: Option<String>,
    /// RIS sub-solver: sdr, sa, gd or rand.
    #[arg(long)]
    solver: Option<String>,
    /// Account for the configured CSI error statistics in the optimizer.
    #[arg(long, overrides_with = "non_robust")]
    robust: bool,
    /// Ignore CSI error statistics (non-robust baseline).
    #[arg(long, overrides_with = "robust")]
    non_robust: bool,
    /// Re-radiation manifestation: 0 (scattering) or 1 (noise).
    #[arg(long)]
    zeta: Option<u8>,
    /// Interferer direct-link visibility: nd or d.
    #[arg(long)]
    visibility: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean achievable throughput (and effective SINR) over Monte Carlo trials.
    Throughput(RunArgs),
    /// Uncoded 4-QAM symbol error rate over Monte Carlo trials.
    Ser(RunArgs),
    /// Median per-iteration wall time of each RIS sub-solver.
    Runtime(RunArgs),
    /// Closed-form oracle self-checks (one-element stationary points).
    Oracle {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(solver) = &args.solver {
        cfg.solver.sub_solver = solver.clone();
    }
    if args.robust {
        cfg.scenario.robust = true;
    }
    if args.non_robust {
        cfg.scenario.robust = false;
    }
    if let Some(z) = args.zeta {
        cfg.scenario.zeta = z;
    }
    if let Some(v) = &args.visibility {
        cfg.scenario.interferer_visibility = match v.to_ascii_lowercase().as_str() {
            "nd" => Visibility::Nd,
            "d" => Visibility::D,
            other => {
                return Err(Error::Config(format!(
                    "unknown visibility '{other}' (expected nd or d)"
                )))
            }
        };
    }
    if let Some(t) = args.trials {
        cfg.experiment.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.experiment.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_sweep(args: &RunArgs) -> Result<Option<Sweep>> {
    args.sweep.as_deref().map(Sweep::parse).transpose()
}

fn emit(rows: &[ris_thz_core::harness::ExperimentRow], out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_csv(path, rows),
        None => {
            print!("{}", to_csv(rows));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Throughput(args) => {
            let cfg = resolve_config(&args)?;
            let sweep = parse_sweep(&args)?;
            let rows = run_throughput(&cfg, sweep.as_ref())?;
            emit(&rows, &args.out)
        }
        Command::Ser(args) => {
            let cfg = resolve_config(&args)?;
            let sweep = parse_sweep(&args)?;
            let rows = run_ser(&cfg, sweep.as_ref())?;
            emit(&rows, &args.out)
        }
        Command::Runtime(args) => {
            let cfg = resolve_config(&args)?;
            if args.sweep.is_some() {
                return Err(Error::Config("runtime does not accept a sweep".into()));
            }
            let rows = run_runtime(&cfg)?;
            emit(&rows, &args.out)
        }
        Command::Oracle { instances, seed } => {
            let checks = run_oracle_checks(instances, seed);
            let mut all_pass = true;
            for (name, pass, detail) in &checks {
                println!("{} {name}: {detail}", if *pass { "PASS" } else { "FAIL" });
                all_pass &= pass;
            }
            if all_pass {
                println!("oracle: {} checks passed", checks.len());
                Ok(())
            } else {
                Err(Error::SolverFailure("oracle self-checks failed".into()))
            }
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidInput(_) => 2,
        _ => 3,
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
