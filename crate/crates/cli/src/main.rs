//! `pstein`: config-driven runner for the poisson-stein pipeline.
//!
//! Exit codes: 0 success, 1 config error, 2 failed `--check`, 3 numeric
//! failure in a task, 4 output not writable.

mod checks;
mod config;
mod error;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use poisson_stein::functionals::registry::{listing, listing_text};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::runner::RunResults;

#[derive(Parser)]
#[command(name = "pstein", version, about = "Normal-approximation experiments for Poisson functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of an experiment config and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to all cores.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
        /// Evaluate the config's checks; exit 2 if any fails.
        #[arg(long)]
        check: bool,
    },
    /// List registered functionals and their parameters.
    List {
        #[arg(long)]
        json: bool,
        /// Directory of `*.json` functional presets.
        #[arg(long)]
        plugin_dir: Option<PathBuf>,
    },
    /// Validate a config and print its resolved form and hash.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn summary(results: &RunResults, hash: &str) -> String {
    let mut s = format!(
        "{} seed={} config_sha256={}\n{:>10}  {:<14} {}\n",
        results.functional, results.seed, hash, "t", "task", "result"
    );
    let mut row = |t: String, task: &str, text: String| s.push_str(&format!("{t:>10}  {task:<14} {text}\n"));
    for p in &results.points {
        let t = p.t.to_string();
        if let Some(v) = p.variance {
            row(t.clone(), "variance", format!("{:.6e} ± {:.2e}", v.variance, v.std_error_of_variance));
        }
        if let Some(g) = &p.gammas {
            let vals: Vec<String> = g.gamma.iter().map(|x| format!("{x:.4e}")).collect();
            row(t.clone(), "gammas", vals.join(" "));
        }
        if let Some(b) = &p.bounds {
            row(t.clone(), "bounds", format!("d_W <= {:.4e}  d_K <= {:.4e}", b.dw_bound, b.dk_bound));
        }
        if let Some(st) = &p.stabilization {
            row(t.clone(), "stabilization", format!("d_W <= {:.4e}  d_K <= {:.4e}", st.dw_bound, st.dk_bound));
        }
        if let Some(d) = p.distances {
            row(
                t.clone(),
                "clt",
                format!("d_K {:.4} ± {:.4}  d_W {:.4} ± {:.4}  band {:.4}", d.d_k, d.d_k_se, d.d_w, d.d_w_se, d.dkw_band),
            );
        }
    }
    if let Some(f) = &results.rate {
        row("-".into(), "rate", format!("slope {:.3} ± {:.3}  r² {:.3}  ({} points)", f.slope, f.slope_se, f.r_squared, f.n_used));
    }
    s
}

fn run(config: PathBuf, seed: Option<u64>, threads: Option<u16>, check: bool) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&config, seed)?;
    if check && cfg.checks.is_empty() {
        return Err(CliError::schema("checks", "--check needs at least one check in the config"));
    }
    let hash = cfg.hash();
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.into())
            .build()
            .expect("thread pool")
            .install(|| runner::execute(&cfg))?,
        None => runner::execute(&cfg)?,
    };
    let files = output::write_all(&cfg, &hash, &results)?;
    print!("{}", summary(&results, &hash));
    for f in &files {
        println!("wrote {}", f.display());
    }
    if check {
        let outcomes = checks::evaluate(&cfg.checks, &results);
        for o in &outcomes {
            println!("{}", o.line());
        }
        let failed = outcomes.iter().filter(|o| !o.pass).count();
        if failed > 0 || outcomes.is_empty() {
            return Err(CliError::CheckFailed {
                failed,
                total: outcomes.len(),
            });
        }
    }
    Ok(())
}

fn list(json: bool, plugin_dir: Option<PathBuf>) -> Result<(), CliError> {
    let l = listing(plugin_dir.as_deref()).map_err(|e| CliError::schema("plugin-dir", e.to_string()))?;
    if json {
        println!("{}", serde_json::to_string_pretty(&l).expect("listing serialises"));
    } else {
        print!("{}", listing_text(&l));
    }
    Ok(())
}

fn check_config(config: PathBuf, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&config, seed)?;
    println!("{}", serde_json::to_string_pretty(&cfg).expect("config serialises"));
    println!("config_sha256={}", cfg.hash());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            check,
        } => run(config, seed, threads, check),
        Command::List { json, plugin_dir } => list(json, plugin_dir),
        Command::Check { config, seed } => check_config(config, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pstein: {e}");
            e.exit_code()
        }
    }
}
