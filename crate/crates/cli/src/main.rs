#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use squeezed_clock::oracle::Verdict;
use squeezed_clock_cli::{commands, CliError, ExperimentConfig};

/// Squeezed-state Ramsey clock experiments.
#[derive(Parser)]
#[command(name = "sqclock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Squeezing parameter versus hold time for the four sequences.
    Lifetime,
    /// Allan deviation of coherent and squeezed clocks.
    Allan,
    /// Compare the Gaussian model with exact one-axis twisting.
    OracleCheck,
    /// Allan slopes of synthetic white and random-walk noise.
    NoiseSelftest,
    /// Print the resolved configuration.
    ShowConfig,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let out = cli.out.as_path();
    match cli.command {
        Command::ShowConfig => print!("{}", config.to_toml()),
        Command::Lifetime => {
            let result = commands::lifetime(&config, out)?;
            println!(
                "{:<24}{:>12}{:>16}{:>14}{:>14}",
                "preset", "zeta0_fit", "d_omega_fit/Hz", "crossing/us", "model/us"
            );
            for c in &result.curves {
                let var = c.fit.var_omega(config.lifetime.atoms / 2.0, config.lifetime.input_contrast);
                let us = |t: Option<f64>| t.map_or("-".to_string(), |t| format!("{:.1}", t * 1e6));
                println!(
                    "{:<24}{:>12.4}{:>16.4}{:>14}{:>14}",
                    c.kind.name(),
                    c.fit.zeta0,
                    squeezed_clock_cli::config::delta_omega_hz(var.max(0.0)),
                    us(c.crossing),
                    us(c.model_crossing)
                );
            }
        }
        Command::Allan => {
            let result = commands::allan(&config, out)?;
            println!("sql reference      {:.4e} s^1/2", result.sql.coefficient);
            println!("squeezed reference {:.4e} s^1/2", result.squeezed_reference.coefficient);
            for c in [&result.css, &result.squeezed] {
                let k = c.curve.white_coefficients();
                println!(
                    "{:<9} sigma*sqrt(tau) at {:.0} s: {:.4e}; sigma at {:.0} s: {:.4e}; fringe excursions {}",
                    c.input.name(),
                    c.curve.taus[0],
                    k[0],
                    c.curve.taus.last().unwrap(),
                    c.curve.sigma.last().unwrap(),
                    c.fringe_excursions
                );
            }
        }
        Command::OracleCheck => {
            let start = Instant::now();
            let report = commands::oracle_check(&config, out)?;
            for r in &report.rows {
                let c = &r.comparison;
                let flag = match r.verdict {
                    Verdict::Pass => "ok",
                    Verdict::Warn => "WARN (outside linear regime)",
                    Verdict::Fail => "FAIL",
                };
                println!(
                    "S={:<6} q_eff={:<5} exact {:.6} gaussian {:.6} rel {:.3e} {flag}",
                    c.spin, c.q_eff, c.zeta_exact, c.zeta_gaussian, c.discrepancy
                );
            }
            println!("max discrepancy (linear regime): {:.4e}", report.max_discrepancy());
            println!("elapsed: {:.2} s", start.elapsed().as_secs_f64());
            commands::require_oracle_pass(&report)?;
        }
        Command::NoiseSelftest => {
            let result = commands::noise_selftest(&config, out)?;
            println!("white slope       {:+.4}", result.white_slope);
            println!("random walk slope {:+.4}", result.random_walk_slope);
            commands::require_selftest_pass(&config, &result)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&cli)),
        Err(e) => Err(CliError::Config(format!("thread pool: {e}"))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqclock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
