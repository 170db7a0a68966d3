mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Command;
use error::CliError;

/// Reputation and entry deterrence across a chain of markets.
#[derive(Debug, Parser)]
#[command(name = "chainstore", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    opts: Options,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve one parameter point.
    Solve,
    /// Regime map over the (p0, pi) plane.
    Regions,
    /// One-dimensional comparative static.
    Sweep,
    /// Monte Carlo over many markets.
    Simulate,
    /// Check an assessment for profitable deviations.
    Verify,
    /// Value of observing the early market.
    Voi,
}

#[derive(Debug, Args)]
struct Options {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any configuration field, e.g. `--set simulate.seed=7`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long, global = true)]
    p0: Option<String>,
    #[arg(long, global = true)]
    pi: Option<String>,
    #[arg(long, global = true)]
    protocol: Option<String>,
    #[arg(long = "M", global = true)]
    m: Option<String>,
    #[arg(long, global = true)]
    a: Option<String>,
    #[arg(long, global = true)]
    c: Option<String>,
    #[arg(long, global = true)]
    d: Option<String>,
    #[arg(long, global = true)]
    v: Option<String>,
    #[arg(long = "eps-f", global = true)]
    eps_f: Option<String>,
    #[arg(long = "eps-a", global = true)]
    eps_a: Option<String>,
    /// Observation cost.
    #[arg(long, global = true)]
    k: Option<String>,
    /// Fixed fight probability for `voi`.
    #[arg(long = "q-a", global = true)]
    q_a: Option<String>,
    /// Region resolution, `PxQ`.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Sweep axis: pi, p0, epsF, epsA or k.
    #[arg(long, global = true)]
    axis: Option<String>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    lo: Option<String>,
    #[arg(long, global = true)]
    hi: Option<String>,
    #[arg(long = "n-markets", global = true)]
    n_markets: Option<usize>,
    #[arg(long = "t-periods", global = true)]
    t_periods: Option<usize>,
    /// `threshold` or `constant(r)`.
    #[arg(long, global = true)]
    policy: Option<String>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// forced_first, cutoff or always.
    #[arg(long = "entry-mode", global = true)]
    entry_mode: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    tolerance: Option<String>,
    /// Exact rational arithmetic.
    #[arg(long, global = true)]
    rational: bool,
    /// Check the solved assessment (solve only).
    #[arg(long, global = true)]
    verify: bool,
    /// Verify a hand-built candidate with this fight probability.
    #[arg(long = "candidate-q", global = true)]
    candidate_q: Option<String>,
}

fn quoted(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

impl Options {
    /// Dotted-key overrides, `--set` first and named flags last.
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("`--set {item}` is not KEY=VALUE")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let text = [
            ("model.p0", &self.p0),
            ("model.pi", &self.pi),
            ("model.protocol", &self.protocol),
            ("payoffs.M", &self.m),
            ("payoffs.a", &self.a),
            ("payoffs.c", &self.c),
            ("payoffs.d", &self.d),
            ("payoffs.v", &self.v),
            ("noise.eps_f", &self.eps_f),
            ("noise.eps_a", &self.eps_a),
            ("acquisition.k", &self.k),
            ("acquisition.q_a", &self.q_a),
            ("sweep.grid", &self.grid),
            ("sweep.axis", &self.axis),
            ("sweep.lo", &self.lo),
            ("sweep.hi", &self.hi),
            ("simulate.policy", &self.policy),
            ("simulate.entry_mode", &self.entry_mode),
            ("output.format", &self.format),
            ("output.path", &self.out),
            ("candidate_q", &self.candidate_q),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                out.push((key.to_string(), quoted(v)));
            }
        }
        if let Some(t) = &self.tolerance {
            out.push(("numerics.tolerance".into(), t.clone()));
        }
        let counts = [
            ("sweep.points", self.points),
            ("simulate.n_markets", self.n_markets),
            ("simulate.t_periods", self.t_periods),
            ("simulate.replications", self.reps),
        ];
        for (key, value) in counts {
            if let Some(v) = value {
                out.push((key.to_string(), v.to_string()));
            }
        }
        if let Some(seed) = self.seed {
            out.push(("simulate.seed".into(), seed.to_string()));
        }
        if self.rational {
            out.push(("numerics.rational".into(), "true".into()));
        }
        if self.verify {
            out.push(("verify".into(), "true".into()));
        }
        Ok(out)
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.opts.config.as_deref(), &cli.opts.overrides()?)?;
    let command = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Regions => Command::Regions,
        Cmd::Sweep => Command::Sweep,
        Cmd::Simulate => Command::Simulate,
        Cmd::Verify => Command::Verify,
        Cmd::Voi => Command::Voi,
    };
    let result = commands::run(command, &cfg)?;
    output::emit(&cfg.output, &result.text)?;
    for note in &result.notes {
        eprintln!("{note}");
    }
    match result.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
