mod config;
mod runner;
mod svg;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use config::{FileConfig, Overrides, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Deterministic simulator for agents that discover space by cataloguing
/// compensable sensory changes.
#[derive(Parser)]
#[command(name = "smcsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment and write JSON, CSV and SVG reports
    Run(RunArgs),
    /// Check a configuration and print the resolved parameters
    Validate(RunArgs),
    /// Calibrate the association threshold for a profile and seed
    Calibrate(CalibrateArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// One of: atlas, rigid, medium, relpos, demo1d, audio
    experiment: Option<String>,
    /// TOML configuration file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale preset: paper or desk
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); never affects results
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials override (applies to the experiment's main loop)
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    calib_trials: Option<usize>,
    /// Scan grid nodes per axis
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    photo_tol: Option<f64>,
    #[arg(long)]
    dedup_tol: Option<f64>,
    #[arg(long)]
    jump_step: Option<f64>,
    #[arg(long)]
    jump_extent: Option<f64>,
    #[arg(long)]
    offset_range: Option<f64>,
    /// Omit the timestamp comment from SVG output
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
}

impl RunArgs {
    fn to_file_config(&self) -> FileConfig {
        FileConfig {
            experiment: self.experiment.clone(),
            profile: self.profile.clone(),
            seed: self.seed,
            threads: self.threads,
            out: self.out.clone(),
            overrides: Overrides {
                grid: self.grid,
                trials: self.trials,
                calib_trials: self.calib_trials,
                photo_tol: self.photo_tol,
                dedup_tol: self.dedup_tol,
                jump_step: self.jump_step,
                jump_extent: self.jump_extent,
                offset_range: self.offset_range,
            },
        }
    }

    fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        base.merged(self.to_file_config()).resolve(!self.no_timestamp)
    }
}

fn install_thread_pool(threads: usize) {
    if threads > 0 {
        // ignore failure when a pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => {
            let config = match args.resolve() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            install_thread_pool(config.threads);
            match runner::execute(&config) {
                Ok(paths) => {
                    println!(
                        "wrote {}, {}, {}",
                        paths.json.display(),
                        paths.csv.display(),
                        paths.svg.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Validate(args) => match args.resolve() {
            Ok(config) => {
                let text = serde_json::to_string_pretty(&config)
                    .expect("config serializes");
                println!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Cmd::Calibrate(args) => {
            let profile_name = args.profile.unwrap_or_else(|| "desk".into());
            let Some(profile) = smcsim::experiments::Profile::by_name(&profile_name) else {
                eprintln!("error: field 'profile': unknown profile '{profile_name}'");
                return ExitCode::from(2);
            };
            install_thread_pool(args.threads.unwrap_or(0));
            let body = smcsim::AgentBody::standard(args.seed);
            let grid = match smcsim::ScanGrid::square(profile.scan_grid) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let n = args.trials.unwrap_or(profile.rigid_calib_trials);
            match smcsim::experiments::circle_calibration(
                &body,
                args.seed,
                grid,
                profile.match_config(),
                n,
            ) {
                Ok(threshold) => {
                    let text = serde_json::to_string_pretty(&threshold)
                        .expect("threshold serializes");
                    println!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
