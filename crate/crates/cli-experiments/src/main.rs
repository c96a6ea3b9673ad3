use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use cli_experiments::checks;
use cli_experiments::out::OutDir;
use cli_experiments::{control, marchenko, rays, resolve, simulate, ControlOptions, Report, PRESETS};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sclab", version, about = "Scattering control experiments for the acoustic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Target {
    /// Preset names or configuration files; separate several with commas to run them in parallel.
    target: String,
    /// Output directory (default: the configuration's out_dir joined with its name).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configuration's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate the configured pulse over [0, 2T] and record snapshots and energies.
    Simulate(Target),
    /// Run the scattering control iteration and report its convergence.
    Control {
        #[command(flatten)]
        target: Target,
        /// Keep iterating to k_max after the tail has stabilized.
        #[arg(long)]
        full: bool,
    },
    /// Compare the Rose and Cauchy-data Marchenko tails (1D only).
    Marchenko(Target),
    /// Trace broken rays and the symbol-level control series in a layered medium.
    Rays(Target),
    /// Run acceptance criteria (all when none are named).
    Check {
        ids: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Clone, Copy)]
enum Kind {
    Simulate,
    Control { full: bool },
    Marchenko,
    Rays,
}

fn run_one(kind: Kind, arg: &str, t: &Target, several: bool) -> Result<Report> {
    let (mut cfg, source) = resolve(arg)?;
    if let Some(seed) = t.seed {
        cfg.seed = seed;
    }
    let dir = match &t.out {
        Some(d) if several => d.join(&cfg.name),
        Some(d) => d.clone(),
        None => cfg.out_dir.join(&cfg.name),
    };
    let out = OutDir::create(dir)?;
    match kind {
        Kind::Simulate => simulate(&cfg, &out),
        Kind::Control { full } => control(&cfg, &out, ControlOptions { early_stop: !full }),
        Kind::Marchenko => marchenko(&cfg, &out),
        Kind::Rays => rays(&cfg, source, &out),
    }
}

fn run_targets(kind: Kind, t: &Target) -> Result<()> {
    let names: Vec<&str> = t.target.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        bail!("no target given");
    }
    let several = names.len() > 1;
    let results: Vec<Result<Report>> = std::thread::scope(|scope| {
        let handles: Vec<_> = names.iter().map(|&n| scope.spawn(move || run_one(kind, n, t, several))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(anyhow::anyhow!("worker panicked")))).collect()
    });
    let mut failed = 0;
    for (name, r) in names.iter().zip(results) {
        match r {
            Ok(rep) => print!("{rep}"),
            Err(e) => {
                eprintln!("{name}: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} runs failed", names.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(t) => run_targets(Kind::Simulate, t),
        Command::Control { target, full } => run_targets(Kind::Control { full: *full }, target),
        Command::Marchenko(t) => run_targets(Kind::Marchenko, t),
        Command::Rays(t) => run_targets(Kind::Rays, t),
        Command::Check { ids, seed } => {
            let ids = if ids.is_empty() { (1..=10).collect() } else { ids.clone() };
            let mut failed = 0;
            for id in ids {
                let c = checks::run(id, *seed);
                print!("{c}");
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                Err(anyhow::anyhow!("{failed} criteria not met"))
            } else {
                Ok(())
            }
        }
        Command::Presets => {
            for p in PRESETS {
                println!("{:<22} {}", p.name, p.summary);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
