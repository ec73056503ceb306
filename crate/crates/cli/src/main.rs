use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lpadapt::experiment::{
    emit_outputs, frontier_csv, run_experiment, ExperimentConfig, FRONTIER_CSV,
};
use lpadapt::metrics::{adaptation_period, frontier_sweep, time_average_effectiveness};
use lpadapt::Error;

#[derive(Parser)]
#[command(
    name = "lpadapt",
    version,
    about = "Preference-learning allocation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write per-step, curve and manifest files.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `outputs.dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write an SVG plot of the averaged curve.
        #[arg(long)]
        plot: bool,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep step-schedule epoch lengths and report the critical one.
    Frontier {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ascending epoch lengths, e.g. `5,10,20,50`.
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<usize>,
        #[arg(long)]
        theta: f64,
        /// Overrides `outputs.dir` from the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate {
            config,
            out_dir,
            plot,
            seed,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(dir) = out_dir {
                cfg.outputs.dir = dir;
            }
            cfg.outputs.plot |= plot;
            let (traces, mut manifest) = run_experiment(&cfg)?;
            let written = emit_outputs(&traces, &mut manifest, &cfg.outputs.dir, cfg.outputs.plot)?;
            let mean = time_average_effectiveness(&traces)?;
            let tau = if cfg.metrics.window <= cfg.horizon {
                adaptation_period(&traces, cfg.metrics.beta, cfg.metrics.window)?
            } else {
                None
            };
            println!("mean_eta = {mean:.6}");
            match tau {
                Some(t) => println!("tau = {t}"),
                None => println!("tau = none"),
            }
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Frontier {
            config,
            t_grid,
            theta,
            out_dir,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let result = frontier_sweep(&cfg, &t_grid, theta)?;
            for row in &result.rows {
                println!(
                    "T = {:>6}  mean_eta = {:.6} (se {:.6})  {}",
                    row.epoch_length,
                    row.mean_eta,
                    row.std_err,
                    if row.qualifies { "qualifies" } else { "-" }
                );
            }
            match result.t_critical {
                Some(t) => println!("T_critical = {t}"),
                None => println!("T_critical = none"),
            }
            let dir = out_dir.unwrap_or(cfg.outputs.dir);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(FRONTIER_CSV);
            std::fs::write(&path, frontier_csv(&result)?)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
