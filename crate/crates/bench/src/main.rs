use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qnsplit_bench::reference::cache_dir_from_env;
use qnsplit_bench::{
    oracle_selftest, parse_algorithms, reference_gap, run_experiment, BenchError, ExperimentConfig, Result, RunSummary,
};
use qnsplit_imaging::Family;

#[derive(Parser)]
#[command(name = "qnsplit", version, about = "Quasi-Newton splitting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the preset parameters of a problem family for some algorithms.
    Compare {
        /// deconvolution, infconv or denoising.
        #[arg(long)]
        problem: String,
        /// Comma-separated subset of fbs,ifbs,qn-fbs,rqn-fbs,iqn-fbs.
        #[arg(long, default_value = "fbs,ifbs,qn-fbs,rqn-fbs,iqn-fbs")]
        algs: String,
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute (or read from the cache) the reference optimal value.
    Reference {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the low-rank resolvent against a dense oracle.
    Selftest {
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn print_summary(s: &RunSummary) {
    println!(
        "{} problem {}: reference primal {:.12e}, initial gap {:.4e}",
        s.family,
        &s.problem_key[..12],
        s.reference.primal,
        s.initial_gap
    );
    if let Some(c) = s.reference.certificate() {
        println!("reference pd-gap certificate {c:.3e}");
    }
    println!("{:<8} {:>6} {:>13} {:>13} {:>9} {:>9}", "alg", "iters", "final gap", "final pd-gap", "q", "fallback");
    for r in &s.runs {
        let pd = r.pd_gap.last().copied().flatten().map_or("-".to_string(), |g| format!("{g:.4e}"));
        let q = r.rate.map_or("-".to_string(), |q| format!("{q:.5}"));
        println!(
            "{:<8} {:>6} {:>13.4e} {:>13} {:>9} {:>9}",
            r.algorithm.name(),
            r.iters.len(),
            r.gap.last().copied().unwrap_or(f64::NAN),
            pd,
            q,
            r.safeguard_fallbacks
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config).map_err(|e| match e {
                BenchError::Io(e) => BenchError::config(format!("cannot read {}: {e}", config.display())),
                other => other,
            })?;
            print_summary(&run_experiment(&cfg)?);
        }
        Command::Compare {
            problem,
            algs,
            iters,
            out,
        } => {
            let family = Family::from_name(&problem).map_err(|e| BenchError::config(e.to_string()))?;
            let mut cfg = ExperimentConfig::preset(family, iters, out);
            cfg.algorithms = parse_algorithms(&algs)?;
            cfg.validate()?;
            print_summary(&run_experiment(&cfg)?);
        }
        Command::Reference { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let p = cfg.problem.build()?;
            let r = reference_gap(&p, cfg.reference_iters, cache_dir_from_env().as_deref())?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::Selftest { instances, seed } => {
            let report = oracle_selftest(instances, seed, 1e-8)?;
            println!(
                "oracle equivalence: {}/{} within {:e}, worst error {:.3e}, {:.2?}",
                report.instances - report.failures,
                report.instances,
                report.tolerance,
                report.worst_error,
                report.elapsed
            );
            if !report.passed() {
                return Err(BenchError::Failed(format!(
                    "{} instances exceeded the tolerance",
                    report.failures
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
