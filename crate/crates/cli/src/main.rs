use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fracoc::conditions::Thresholds;

mod config;
mod output;
mod run;

use config::{parse_list, Overrides, Problem, RunConfig};

#[derive(Parser)]
#[command(name = "fracoc", version, about = "Fractional optimal control by expansion and shooting")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args)]
struct Common {
    /// `key = value` file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem (example41, example42, classical_toy) or problem file
    #[arg(long)]
    problem: Option<String>,
    /// Fractional order in (0, 1)
    #[arg(long)]
    alpha: Option<f64>,
    /// Newton tolerance on the boundary residual
    #[arg(long)]
    tol: Option<f64>,
    /// frac, approx or both
    #[arg(long)]
    route: Option<String>,
    /// Initial horizon for free-time problems
    #[arg(long)]
    t_guess: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Commands {
    /// Solve one problem and write trajectories, condition reports and a manifest
    Solve {
        #[command(flatten)]
        common: Common,
        /// Truncation order of the expansion
        #[arg(long, visible_alias = "K")]
        k: Option<usize>,
        /// Number of mesh intervals
        #[arg(long)]
        mesh: Option<usize>,
    },
    /// Solve over every combination of K and mesh
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated truncation orders
        #[arg(long, visible_alias = "K", default_value = "2,3,4")]
        k: String,
        /// Comma-separated mesh sizes
        #[arg(long, default_value = "2000")]
        mesh: String,
    },
    /// Evaluate the necessary conditions on a trajectory CSV
    Check {
        #[arg(long, default_value = "example41")]
        problem: String,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// CSV with t, x, u and lambda columns
        #[arg(long)]
        candidate: PathBuf,
        /// Largest residual accepted
        #[arg(long, default_value_t = Thresholds::default().residual)]
        threshold: f64,
    },
}

fn load(common: &Common, k: Option<usize>, mesh: Option<usize>) -> Result<RunConfig> {
    let over = Overrides {
        problem: common.problem.clone(),
        alpha: common.alpha,
        k,
        mesh,
        tol: common.tol,
        route: common.route.clone(),
        t_guess: common.t_guess,
        out: common.out.clone(),
    };
    RunConfig::load(common.config.as_deref(), &over)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Commands::Solve { common, k, mesh } => {
            let cfg = load(&common, k, mesh)?;
            for r in run::solve(&cfg)? {
                let e = r.error_vs_reference.map_or("n/a".into(), |e| format!("{e:.3e}"));
                println!(
                    "{:<12} K={} T={:.6} J={:.6e} E={e} residual={:.2e} iters={}",
                    r.route.name(),
                    r.k,
                    r.t_final,
                    r.cost,
                    r.boundary_residual_norm,
                    r.newton_iters
                );
            }
            println!("wrote {}", cfg.out.display());
            Ok(true)
        }
        Commands::Sweep { common, k, mesh } => {
            let cfg = load(&common, None, None)?;
            let rows = run::sweep(&cfg, &parse_list(&k)?, &parse_list(&mesh)?)?;
            println!("{} runs, wrote {}", rows.len(), cfg.out.join("sweep.csv").display());
            Ok(true)
        }
        Commands::Check {
            problem,
            alpha,
            candidate,
            threshold,
        } => {
            let (text, ok) = run::check(&Problem::resolve(&problem)?, alpha, &candidate, threshold)?;
            println!("{text}");
            println!("{}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
    }
}
