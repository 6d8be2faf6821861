use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multimode_release::harness::{
    cmd_capture, cmd_derive, cmd_emit, output_dir, run_sweep, RunConfig, REFERENCE_DRIVE_DELTA,
};
use multimode_release::Error;

/// Multiphoton release and recapture simulator.
///
/// Exit codes: 0 success, 1 simulation failure, 2 configuration error.
#[derive(Parser)]
#[command(name = "mmr", version)]
struct Cli {
    /// Accepted for scripting compatibility; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective Hamiltonian from a circuit netlist.
    Derive {
        /// Netlist file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        kappa_per_us: f64,
        #[arg(long, default_value_t = REFERENCE_DRIVE_DELTA)]
        drive_delta: f64,
    },
    /// Release a state and analyse the emitted field.
    Emit(RunArgs),
    /// Release, then capture the dominant mode in a virtual receiver.
    Capture(RunArgs),
    /// Run the sweep declared in the config.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Continue an existing sweep directory, skipping finished points.
        #[arg(long)]
        resume: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides `max_modes` from the config.
    #[arg(long)]
    max_modes: Option<usize>,
}

enum Failure {
    Config(Error),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e)
        } else {
            Failure::Run(e)
        }
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Failure> {
    let rc = RunConfig::read(&args.config).map_err(Failure::Config)?;
    match args.max_modes {
        Some(m) => rc.with_override("max_modes", m as f64).map_err(Failure::Config),
        None => Ok(rc),
    }
}

fn workers(args: &RunArgs) -> usize {
    args.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn print_json(v: &impl serde::Serialize) {
    match serde_json::to_string_pretty(v) {
        Ok(s) => println!("{s}"),
        Err(e) => log::error!("cannot print summary: {e}"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Derive { config, out, kappa_per_us, drive_delta } => {
            if !config.is_file() {
                return Err(Failure::Config(Error::Config(format!(
                    "netlist file {} does not exist",
                    config.display()
                ))));
            }
            let r = cmd_derive(&config, kappa_per_us, drive_delta, out.as_deref())?;
            print_json(&r);
        }
        Command::Emit(args) => {
            let rc = load(&args)?;
            let dir = output_dir(&rc, args.out.as_deref());
            print_json(&cmd_emit(&rc, &dir)?);
        }
        Command::Capture(args) => {
            let rc = load(&args)?;
            let dir = output_dir(&rc, args.out.as_deref());
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers(&args)).build();
            let summary = match pool {
                Ok(p) => p.install(|| cmd_capture(&rc, &dir))?,
                Err(_) => cmd_capture(&rc, &dir)?,
            };
            print_json(&summary);
        }
        Command::Sweep { run, resume } => {
            let rc = load(&run)?;
            let dir = output_dir(&rc, run.out.as_deref());
            let report = run_sweep(&rc, &dir, resume, workers(&run))?;
            print_json(&report);
            if report.failed > 0 {
                return Err(Failure::Run(Error::InvalidArgument(format!(
                    "{} sweep point(s) failed; see {}",
                    report.failed,
                    Path::new(&dir).join("manifest.json").display()
                ))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.seedless {
        log::info!("--seedless has no effect: runs are deterministic");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
