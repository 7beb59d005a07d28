//! Command-line front end over the experiment harness.
//!
//! Exit codes: 0 on success, 1 when a runtime audit fails (or a run aborts),
//! 2 on configuration errors.

use clap::{Parser, Subcommand};
use fdgm_core::harness::{self, ExperimentConfig, HarnessError, RunArtifacts};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_AUDIT: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "fdgm",
    version,
    about = "Consensus optimization on time-varying networks: dual gradient methods \
             with safeguarded acceleration, runtime descent audits, and a projected \
             subgradient baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm; write one metrics CSV per algorithm
    /// plus instance and rate-constants JSON into the output directory.
    Run {
        /// Path to the experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the dual methods under full runtime audits (edge certificates,
    /// monotonicity, conservation, accumulated descent, primal-dual bound).
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a grid over one config parameter, one output directory per value.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Parameter to vary (e.g. beta, c1, c2, lambda, memory, dps_step).
        #[arg(long)]
        param: String,
        /// Values to try, comma-separated or repeated.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Root directory for the per-value run directories.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, out.as_deref()),
        Command::Verify { config } => cmd_verify(&config),
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => cmd_sweep(&config, &param, &values, out.as_deref()),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| format!("malformed config {}: {e}", path.display()))?;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn config_failure(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn runtime_failure(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        HarnessError::InvalidConfig(_) => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_AUDIT),
    }
}

fn resolved_out_dir(flag: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn report_artifacts(artifacts: &RunArtifacts) {
    for path in &artifacts.csv_paths {
        println!("wrote {}", path.display());
        if let Some(err) = final_primal_error(path) {
            println!("  final primal error {err:.6e}");
        }
    }
    println!("wrote {}", artifacts.snapshot_path.display());
    println!("wrote {}", artifacts.constants_path.display());
}

fn final_primal_error(csv: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(csv).ok()?;
    text.lines().last()?.split(',').nth(3)?.parse().ok()
}

fn cmd_run(config_path: &Path, out: Option<&Path>) -> ExitCode {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return config_failure(msg),
    };
    let out_dir = resolved_out_dir(out, &config);
    match harness::execute_run(&config, &out_dir) {
        Ok(artifacts) => {
            report_artifacts(&artifacts);
            ExitCode::SUCCESS
        }
        Err(e) => runtime_failure(e),
    }
}

fn cmd_verify(config_path: &Path) -> ExitCode {
    let config = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return config_failure(msg),
    };
    match harness::execute_verify(&config) {
        Ok(report) => {
            for check in &report.checks {
                let tag = if check.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {} — {}", check.name, check.detail);
            }
            if report.all_passed() {
                println!("all audits passed");
                ExitCode::SUCCESS
            } else {
                eprintln!("error: runtime audit failed");
                ExitCode::from(EXIT_AUDIT)
            }
        }
        Err(e) => runtime_failure(e),
    }
}

fn cmd_sweep(config_path: &Path, param: &str, values: &[String], out: Option<&Path>) -> ExitCode {
    let base = match load_config(config_path) {
        Ok(c) => c,
        Err(msg) => return config_failure(msg),
    };
    // Reject any bad value before running anything.
    let mut grid = Vec::with_capacity(values.len());
    for value in values {
        match harness::apply_param(&base, param, value) {
            Ok(config) => grid.push((value, config)),
            Err(e) => return config_failure(e),
        }
    }
    let out_root = resolved_out_dir(out, &base);
    for (value, config) in grid {
        let dir = out_root.join(format!("{param}_{value}"));
        println!("{param} = {value}:");
        match harness::execute_run(&config, &dir) {
            Ok(artifacts) => report_artifacts(&artifacts),
            Err(e) => return runtime_failure(e),
        }
    }
    ExitCode::SUCCESS
}
