//! `devcorr`: prepare two-qubit deviation matrices, relax them, evaluate
//! their correlations and fit relaxation parameters.
//!
//! Exit codes: 0 success, 2 invalid input, 3 I/O failure, 4 optimizer
//! failure, 5 fit failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use devcorr::io;
use devcorr::pipeline::{self, StateSpec};
use devcorr::{Error, RunConfig};

#[derive(Parser)]
#[command(name = "devcorr", version, about = "Correlations and relaxation of spin-3/2 deviation matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the deviation matrix of a named initial state.
    Prepare {
        /// psi+, psi-, phi+, phi-, x-random, computational:ij or equilibrium
        state: String,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Relax a deviation matrix on the t = k * dt grid and write the time series.
    Evolve {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the initial matrix as a t = 0 row.
        #[arg(long)]
        include_initial: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compute I, K and Q for a deviation matrix or every row of a time series.
    Correlations {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Add exact-entropy columns (bits) at the configured epsilon.
        #[arg(long)]
        exact: bool,
        /// Report expansion values in bits instead of eps^2/ln2.
        #[arg(long)]
        bits: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Fit J0, J1, J2 and R1..R3 to a time series.
    Fit {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write observed and fitted combinations as CSV.
        #[arg(long)]
        curves: Option<PathBuf>,
        /// Add Gaussian noise of this standard deviation (seeded by --seed) before fitting.
        #[arg(long)]
        noise: Option<f64>,
        /// Fail instead of warning when the two (J1, J2) determinations disagree.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Prepare, relax and analyse the five reference states.
    Reproduce {
        #[arg(short, long)]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

/// Configuration file plus per-key overrides; flags win over the file.
#[derive(Args)]
struct ConfigArgs {
    /// key = value configuration file (defaults to $DEVCORR_CONFIG if set).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. --set n_steps=10.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long = "C", value_name = "S^-2")]
    c: Option<f64>,
    #[arg(long)]
    j0: Option<f64>,
    #[arg(long)]
    j1: Option<f64>,
    #[arg(long)]
    j2: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> devcorr::Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        let mut put = |key: &str, v: Option<String>| match v {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        put("C", self.c.map(|x| x.to_string()))?;
        put("J0", self.j0.map(|x| x.to_string()))?;
        put("J1", self.j1.map(|x| x.to_string()))?;
        put("J2", self.j2.map(|x| x.to_string()))?;
        put("epsilon", self.epsilon.map(|x| x.to_string()))?;
        put("alpha", self.alpha.map(|x| x.to_string()))?;
        put("dt", self.dt.map(|x| x.to_string()))?;
        put("n_steps", self.n_steps.map(|x| x.to_string()))?;
        put("seed", self.seed.map(|x| x.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 3,
        Error::OptimizerFailure(_) => 4,
        Error::FitDivergence(_) | Error::DegenerateSignal(_) | Error::InconsistentFits { .. } => 5,
        _ => 2,
    }
}

fn run(cli: Cli) -> devcorr::Result<()> {
    match cli.command {
        Command::Prepare { state, out, config } => {
            let spec: StateSpec = state.parse()?;
            let cfg = config.resolve()?;
            let d = pipeline::prepare(spec, &cfg)?;
            io::write_atomic(&out, &io::format_deviation(&d))
        }
        Command::Evolve { input, out, include_initial, config } => {
            let cfg = config.resolve()?;
            let d0 = io::parse_deviation(&io::read_text(&input)?)?;
            let series = pipeline::evolve(&d0, &cfg, include_initial)?;
            io::write_atomic(&out, &io::format_series(&series))
        }
        Command::Correlations { input, out, exact, bits, config } => {
            let cfg = config.resolve()?;
            let series = io::parse_matrix_or_series(&io::read_text(&input)?)?;
            let mut rows = pipeline::correlations(&series, &cfg, exact)?;
            if bits {
                for r in &mut rows {
                    r.report = r.report.in_bits(cfg.epsilon);
                }
            }
            io::write_atomic(&out, &io::format_correlations(&rows))
        }
        Command::Fit { input, out, curves, noise, strict, config } => {
            let cfg = config.resolve()?;
            let series = io::parse_series(&io::read_text(&input)?)?;
            let (report, data) = pipeline::fit(&series, &cfg, noise.map(|sigma| (sigma, cfg.seed)), strict)?;
            io::write_atomic(&out, &io::format_fit_report(&report))?;
            if let Some(path) = curves {
                io::write_atomic(&path, &io::format_fit_curves(&data, &report)?)?;
            }
            Ok(())
        }
        Command::Reproduce { out_dir, config } => {
            let cfg = config.resolve()?;
            let runs = pipeline::reproduce(&cfg)?;
            let summaries = pipeline::write_reproduction(&runs, &out_dir)?;
            print!("{}", pipeline::format_summary(&summaries));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
