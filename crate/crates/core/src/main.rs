use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use channel_gan::cli::{compare_runs, load_report, preset, run_experiment, ExperimentConfig, PRESETS};

#[derive(Parser)]
#[command(version, about = "Learn stochastic channel models p(y|x) with a variational conditional GAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one experiment from a TOML config or a preset.
    Run {
        /// Experiment config file.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Master seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
    /// Compare two reports (report.json files or run directories).
    Compare { a: PathBuf, b: PathBuf },
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            preset: name,
            seed,
            out,
        } => {
            let mut cfg = match (config, name) {
                (Some(path), _) => ExperimentConfig::load(path)?,
                (None, Some(name)) => preset(&name)?,
                (None, None) => unreachable!("clap requires a config or a preset"),
            };
            if let Some(seed) = seed {
                cfg = cfg.with_seed(seed);
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let run = run_experiment(&cfg)?;
            let r = &run.report;
            println!("wrote {}", run.output_dir.display());
            for c in &r.conditions {
                println!(
                    "x={:?} js={:.5} mean_error={:.4} std_ratio={:?}",
                    c.x, c.js, c.mean_error, c.std_ratio
                );
            }
            println!("marginal js={:.5} mean js={:.5}", r.marginal.js, r.mean_js);
        }
        Command::Presets => {
            for (name, about) in PRESETS {
                println!("{name:<22} {about}");
            }
        }
        Command::Compare { a, b } => {
            let table = compare_runs(&load_report(a)?, &load_report(b)?)?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
