//! `polydyn`: simulate, analyze and design systems of the form
//! `X(k+1) = A W X(k) + (I - A) X(0)`.
//!
//! Exit status: 0 on success, 1 for infeasible or non-convergent results,
//! 2 for input errors.

mod config;
mod plot;
mod run;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CentralityChoice, Command, LimitChoice, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "polydyn",
    version,
    about = "Convex-combination state-space process toolkit"
)]
struct Cli {
    /// JSON run configuration; command-line flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args, Default)]
struct Output {
    /// Output directory (created if missing) [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format for matrix and vector files [default: csv]
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args, Default)]
struct Iteration {
    /// Stop when the max-abs change of a step is below this [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,
    /// Step limit [default: 1000000]
    #[arg(long)]
    k_max: Option<usize>,
    /// Record every k-th state in the trajectory
    #[arg(long)]
    record_every: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Iterate the process; writes trajectory.csv and limit.json.
    Simulate {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[command(flatten)]
        iteration: Iteration,
        /// Also write a gnuplot script for the trajectory.
        #[arg(long)]
        gnuplot_script: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Limit matrix V and X(inf); writes limit.json and x_inf.
    Limit {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<LimitChoice>,
        /// Number of Neumann terms (default from the spectral bound).
        #[arg(long)]
        terms: Option<usize>,
        #[command(flatten)]
        iteration: Iteration,
        #[command(flatten)]
        output: Output,
    },
    /// Convergence case and network structure; writes classify.json.
    Classify {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        a: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// X(0) reaching a target under given W and A.
    DesignInitial {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        xinf: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Damping values carrying X(0) to a target; writes feasibility.json.
    DesignDamping {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[arg(long)]
        xinf: Option<PathBuf>,
        /// Open-interval margin for a_ii [default: 1e-9]
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// A member {A, X(0)} of the design family for a target.
    DesignFamily {
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long)]
        xinf: Option<PathBuf>,
        /// Damping vector file.
        #[arg(long, conflicts_with = "a_value")]
        a: Option<PathBuf>,
        /// Uniform damping value; 0.5 gives the unbiased design.
        #[arg(long)]
        a_value: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Net-influence centrality; prints the ranked node list.
    Centrality {
        #[arg(long)]
        w: Option<PathBuf>,
        /// Damping vector (net method).
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<CentralityChoice>,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Generate, write and simulate a seeded scenario.
    Scenario {
        /// random-array, one-value-A, two-value-A, polytope or cleavage
        kind: Option<String>,
        /// Scenario spec file (JSON) instead of a generator name.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, env = "POLYDYN_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Histogram bins for one-dimensional states [default: 25]
        #[arg(long)]
        bins: Option<usize>,
        /// Independent runs with seeds seed, seed+1, ... in replica_NNN/.
        #[arg(long)]
        replicas: Option<usize>,
        #[command(flatten)]
        iteration: Iteration,
        #[arg(long)]
        gnuplot_script: bool,
        #[command(flatten)]
        output: Output,
    },
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl Cmd {
    fn into_config(self) -> RunConfig {
        let mut c = RunConfig::default();
        let (output, iteration) = match self {
            Cmd::Simulate {
                w,
                a,
                x0,
                iteration,
                gnuplot_script,
                output,
            } => {
                c.command = Some(Command::Simulate);
                (c.w, c.a, c.x0, c.gnuplot_script) = (w, a, x0, flag(gnuplot_script));
                (output, iteration)
            }
            Cmd::Limit {
                w,
                a,
                x0,
                method,
                terms,
                iteration,
                output,
            } => {
                c.command = Some(Command::Limit);
                (c.w, c.a, c.x0, c.method, c.terms) = (w, a, x0, method, terms);
                (output, iteration)
            }
            Cmd::Classify { w, a, output } => {
                c.command = Some(Command::Classify);
                (c.w, c.a) = (w, a);
                (output, Iteration::default())
            }
            Cmd::DesignInitial { w, a, xinf, output } => {
                c.command = Some(Command::DesignInitial);
                (c.w, c.a, c.xinf) = (w, a, xinf);
                (output, Iteration::default())
            }
            Cmd::DesignDamping {
                w,
                x0,
                xinf,
                tol,
                output,
            } => {
                c.command = Some(Command::DesignDamping);
                (c.w, c.x0, c.xinf, c.tol) = (w, x0, xinf, tol);
                (output, Iteration::default())
            }
            Cmd::DesignFamily {
                w,
                xinf,
                a,
                a_value,
                output,
            } => {
                c.command = Some(Command::DesignFamily);
                (c.w, c.xinf, c.a, c.a_value) = (w, xinf, a, a_value);
                (output, Iteration::default())
            }
            Cmd::Centrality {
                w,
                a,
                method,
                alpha,
                output,
            } => {
                c.command = Some(Command::Centrality);
                (c.w, c.a, c.centrality, c.alpha) = (w, a, method, alpha);
                (output, Iteration::default())
            }
            Cmd::Scenario {
                kind,
                spec,
                seed,
                n,
                m,
                bins,
                replicas,
                iteration,
                gnuplot_script,
                output,
            } => {
                c.command = Some(Command::Scenario);
                (c.scenario, c.spec, c.seed, c.n, c.m) = (kind, spec, seed, n, m);
                (c.bins, c.replicas, c.gnuplot_script) = (bins, replicas, flag(gnuplot_script));
                (output, iteration)
            }
        };
        (c.out, c.format) = (output.out, output.format);
        if iteration.tol.is_some() {
            c.tol = iteration.tol;
        }
        (c.k_max, c.record_every) = (iteration.k_max, iteration.record_every);
        c
    }
}

fn config_from(cli: Cli) -> anyhow::Result<RunConfig> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    // precedence: --seed, then POLYDYN_SEED, then the config file; clap
    // handles the first two when a subcommand is given
    let Some(cmd) = cli.command else {
        let mut cfg = base;
        if let Ok(s) = std::env::var("POLYDYN_SEED") {
            let seed = s
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("POLYDYN_SEED={s:?} is not a u64"))?;
            cfg.seed = Some(seed);
        }
        return Ok(cfg);
    };
    let cfg = base.overlay(cmd.into_config());
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = config_from(cli).and_then(|cfg| run::run(&cfg));
    match result {
        Ok(report) => {
            println!("{}", report.summary);
            for line in &report.details {
                println!("{line}");
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
