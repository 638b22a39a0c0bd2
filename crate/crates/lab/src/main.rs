use clap::{Parser, Subcommand};
use scz_lab::config::ExperimentConfig;
use scz_lab::{run_config_file, RunError, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status: 0 when every check passes, 1 when any fails, 2 for configuration or I/O errors.
#[derive(Parser)]
#[command(name = "scz-lab", version, about = "Run reproducible Schrödinger harmonic-analysis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario a config names; writes <scenario>.json and <scenario>.csv.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// List built-in scenarios.
    List,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            for e in scz_lab::scenarios::registry() {
                println!("{:<32} {}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                println!("{}: ok (scenario {})", config.display(), cfg.scenario);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", config.display());
                ExitCode::from(2)
            }
        },
        Command::Run { config, out, jobs, tolerance_scale } => {
            if !(tolerance_scale.is_finite() && tolerance_scale >= 0.0) {
                eprintln!("--tolerance-scale must be finite and ≥ 0");
                return ExitCode::from(2);
            }
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                pool = pool.num_threads(j.max(1));
            }
            let pool = match pool.build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("cannot start worker pool: {e}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions { tolerance_scale };
            match pool.install(|| run_config_file(&config, &out, &opts)) {
                Ok(report) => {
                    for r in &report.records {
                        let status = if r.pass { "PASS" } else { "FAIL" };
                        match &r.error {
                            Some(e) => println!("{status} {} ({} ms): error: {e}", r.name, r.runtime_ms),
                            None => println!("{status} {} ({} ms)", r.name, r.runtime_ms),
                        }
                    }
                    println!("{}: {}", report.scenario, if report.pass { "all checks passed" } else { "some checks failed" });
                    if report.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e @ (RunError::Config(_) | RunError::Output { .. })) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
