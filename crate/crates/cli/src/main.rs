use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use orlicz_gamma::{TestFunction, YoungFunction};
use orlicz_gamma_cli::{run, Experiment, ExperimentConfig, RunStatus};

#[derive(Parser)]
#[command(name = "orlicz-gamma", version, about = "Fractional Orlicz energy verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run {
        config: PathBuf,
        /// Overrides `out_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides `tol`.
        #[arg(long)]
        tol: Option<f64>,
        /// Overrides `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the Young function, test function and experiment catalogs.
    ListCatalog,
}

/// Exit status when output files cannot be written.
const IO_ERROR: u8 = 4;

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(RunStatus::ConfigError.code() as u8)
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ORLICZ_GAMMA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ORLICZ_GAMMA_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListCatalog => {
            println!("young functions:");
            for l in YoungFunction::<f64>::catalog_labels() {
                println!("  {l}");
            }
            println!("test functions:");
            for l in TestFunction::<f64>::catalog_labels() {
                println!("  {l}");
            }
            println!("experiments:");
            for e in Experiment::ALL {
                println!("  {e}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, out_dir, tol, seed } => {
            if let Err(e) = init_threads() {
                return config_error(e);
            }
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return config_error(format!("cannot read {}: {e}", config.display())),
            };
            let mut cfg = match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            if let Some(d) = out_dir {
                cfg.out_dir = d;
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Err(e) = cfg.validate() {
                return config_error(e);
            }
            match run(&cfg) {
                Ok(summary) => {
                    for (name, v) in &summary.verdicts {
                        println!("{name}: {}", serde_json::to_value(v).unwrap_or_default().as_str().unwrap_or("?"));
                    }
                    ExitCode::from(summary.status.code() as u8)
                }
                Err(e) => {
                    eprintln!("error: writing outputs to {}: {e}", cfg.out_dir.display());
                    ExitCode::from(IO_ERROR)
                }
            }
        }
    }
}
