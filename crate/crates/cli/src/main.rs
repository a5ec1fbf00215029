//! Command-line front end for the simulator.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use fedsync::harness::{parse_grid, probability_table, run_sweep, run_to_dir, theory_table, Engine, ExperimentConfig};
use fedsync::sampling::SamplingParams;

#[derive(Parser)]
#[command(name = "fedsync", version, about = "Bandwidth-efficient federated learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv, staleness.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every point of a parameter grid, one subdirectory per point.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run grid points one after another instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Print re-sampling probabilities for uniform and sticky sampling as CSV.
    ProbTable {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Sticky group size; omit with --c for uniform sampling only.
        #[arg(long, requires = "c")]
        s: Option<usize>,
        /// Sticky clients drawn per round.
        #[arg(long, requires = "s")]
        c: Option<usize>,
        #[arg(long, default_value_t = 10)]
        rmax: u32,
        /// Also print the variance factor and learning rate for this many
        /// local steps.
        #[arg(long)]
        local_steps: Option<u32>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1000)]
        rounds: u32,
    },
    /// Parse a config and build its engine without running any rounds.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let summary = run_to_dir(&cfg, &out)?;
            let s = &summary.summary;
            match s.target_round {
                Some(r) => println!("target reached at round {r}"),
                None => println!("ran {} rounds", s.rounds_counted),
            }
            println!(
                "final accuracy {:.4}, downstream {} B, upstream {} B",
                s.final_avg_accuracy, s.dv_bytes, s.uv_bytes
            );
        }
        Command::Sweep { config, grid, out, serial } => {
            let cfg = load(&config)?;
            let text = std::fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let grid = parse_grid(&text)?;
            let runs = run_sweep(&cfg, &grid, &out, !serial)?;
            println!("{} runs written to {}", runs.len(), out.display());
        }
        Command::ProbTable { n, k, s, c, rmax, local_steps, sigma, rounds } => {
            let params = match (s, c) {
                (Some(s), Some(c)) => SamplingParams::sticky(n, k, s, c)?,
                (None, None) => SamplingParams::uniform(n, k)?,
                _ => bail!("--s and --c go together"),
            };
            print!("{}", probability_table(&params, rmax)?);
            if let Some(e) = local_steps {
                print!("{}", theory_table(&params, e, sigma, rounds)?);
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let engine = Engine::new(cfg)?;
            println!("ok: {} clients, {} parameters", engine.shards().len(), engine.dim());
        }
    }
    Ok(())
}
