use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use heis_sio_cli::commands::{cmd_ab, cmd_cubes, cmd_curves, cmd_potential, cmd_t1};
use heis_sio_cli::config::ExperimentConfig;
use heis_sio_cli::verify;

#[derive(Parser)]
#[command(name = "heis-sio", version, about = "Singular-integral experiments on the Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads; falls back to HEIS_SIO_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct Run {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites: core, kernels, graphs, cubes, sio, removability or all.
    Verify {
        suite: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// T1 testing on dyadic cubes.
    T1(Run),
    /// Cancellation integrals over vertical planes.
    Ab(Run),
    /// Characteristic curves of the graph function.
    Curves(Run),
    /// Removability potential, harmonicity and pairing.
    Potential(Run),
    /// Christ cube construction and verdicts.
    Cubes(Run),
}

fn thread_count(flag: Option<usize>) -> anyhow::Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("HEIS_SIO_THREADS") {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("HEIS_SIO_THREADS = {v:?} is not a thread count"))?)),
        Err(_) => Ok(None),
    }
}

fn load(run: &Run) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&run.config)?;
    if let Some(seed) = run.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &run.out {
        cfg.out = out.to_string_lossy().into_owned();
    }
    let out = PathBuf::from(&cfg.out);
    Ok((cfg, out))
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    let (name, run) = match command {
        Command::Verify { suite, config, seed } => {
            let seed = match (seed, config) {
                (Some(s), _) => s,
                (None, Some(path)) => ExperimentConfig::load(&path)?.seed,
                (None, None) => 0,
            };
            let Some(checks) = verify::run(&suite, seed) else {
                eprintln!("unknown suite {suite:?}; expected one of {}, all", verify::SUITES.join(", "));
                return Ok(ExitCode::from(2));
            };
            print!("{}", verify::table(&checks));
            return Ok(if checks.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::T1(r) => ("t1", r),
        Command::Ab(r) => ("ab", r),
        Command::Curves(r) => ("curves", r),
        Command::Potential(r) => ("potential", r),
        Command::Cubes(r) => ("cubes", r),
    };
    let (cfg, out) = load(&run)?;
    let pass = match name {
        "t1" => cmd_t1(&cfg, &out)?.stable,
        "ab" => cmd_ab(&cfg, &out)?.pass,
        "curves" => cmd_curves(&cfg, &out)?.iter().all(|c| !c.blown_up),
        "potential" => cmd_potential(&cfg, &out)?.pass,
        _ => cmd_cubes(&cfg, &out)?.verdicts.all(),
    };
    println!("{name}: wrote {} ({})", out.display(), if pass { "pass" } else { "fail" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
