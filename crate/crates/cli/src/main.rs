//! `strichartz`: command-line front end with machine-readable reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a
//! computation aborts, 2 for usage and configuration errors.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use strichartz::hermite::Dim;
use strichartz::io::{parse_config_json, parse_number_list, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "strichartz", version, about = "Strichartz maximizer numerics: constants, certificates, simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// C_S, D_1, D_2 with their independent numerical routes.
    Constants(Opts),
    /// Hermite identities: Wang diagonal, α coefficients, Gaussian moments.
    Hermite(Opts),
    /// The quadratic form on kernel directions and eigenfunctions.
    Qform(Opts),
    /// Table of 𝓕(m, j).
    TableF(Opts),
    /// Coercivity certificate of the quadratic form.
    Coercivity(Opts),
    /// Exact-integer binomial inequalities.
    Combinatorics(Opts),
    /// One harmonic-frame simulation of data δG_0.
    Simulate(Opts),
    /// Gaussian-data expansion of the space-time norm.
    Expansion(Opts),
    /// Order of the first-order Duhamel approximation.
    Perturbation(Opts),
    /// Newton gauge fix of a datum into the orthogonality slice.
    GaugeFix(GaugeOpts),
    /// Runs the acceptance criteria.
    Selftest(SelftestOpts),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Spatial dimension, 1 or 2.
    #[arg(long)]
    pub dim: Option<u8>,
    /// Spectral cutoff (largest Hermite index per dimension).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Number of τ-steps over (−π/2, π/2).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Mass parameter δ.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Comma-separated list of δ values.
    #[arg(long)]
    pub deltas: Option<String>,
    /// +1 focusing, −1 defocusing.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Number of series terms.
    #[arg(long)]
    pub terms: Option<usize>,
    #[arg(long)]
    pub m_min: Option<usize>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Tolerance of the main check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Emit the JSON report (default).
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Emit the tabular part of the output as CSV.
    #[arg(long)]
    pub csv: bool,
    /// Write the output to a file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GaugeOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// JSON datum `{"dim": N, "coeffs": [...]}`; defaults to G_0.
    #[arg(long)]
    pub datum: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SelftestOpts {
    #[command(flatten)]
    pub opts: Opts,
    /// Comma-separated criterion numbers to run; all when absent.
    #[arg(long)]
    pub only: Option<String>,
}

/// Flags merged over an optional configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub dim: Option<Dim>,
    pub cutoff: Option<usize>,
    pub steps: Option<usize>,
    pub delta: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    pub terms: Option<usize>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub tol: Option<f64>,
    pub csv: bool,
}

/// A usage or configuration problem (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl Opts {
    fn settings(&self) -> anyhow::Result<Settings> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                parse_config_json(&text).map_err(|e| usage(e.to_string()))?
            }
            None => RunConfig::default(),
        };
        let deltas = match &self.deltas {
            Some(text) => Some(parse_number_list(text).map_err(|e| usage(format!("--deltas: {e}")))?),
            None => file.deltas,
        };
        let dim = match self.dim {
            Some(d) => Some(Dim::new(d as usize).map_err(|e| usage(e.to_string()))?),
            None => file.dim,
        };
        let merged = RunConfig {
            dim,
            cutoff: self.cutoff.or(file.cutoff),
            steps: self.steps.or(file.steps),
            delta: self.delta.or(file.delta),
            deltas,
            gamma: self.gamma.or(file.gamma),
            terms: self.terms.or(file.terms),
            m_min: self.m_min.or(file.m_min),
            m_max: self.m_max.or(file.m_max),
            tol: self.tol.or(file.tol),
        };
        merged.validate().map_err(|e| usage(e.to_string()))?;
        Ok(Settings {
            dim: merged.dim,
            cutoff: merged.cutoff,
            steps: merged.steps,
            delta: merged.delta,
            deltas: merged.deltas,
            gamma: merged.gamma,
            terms: merged.terms,
            m_min: merged.m_min,
            m_max: merged.m_max,
            tol: merged.tol,
            csv: self.csv,
        })
    }
}

/// Text to emit and whether every check passed.
pub struct Output {
    pub text: String,
    pub pass: bool,
}

fn run(cli: Cli) -> anyhow::Result<Output> {
    let start = Instant::now();
    let (opts, name) = match &cli.command {
        Command::Constants(o) => (o, "constants"),
        Command::Hermite(o) => (o, "hermite"),
        Command::Qform(o) => (o, "qform"),
        Command::TableF(o) => (o, "table-f"),
        Command::Coercivity(o) => (o, "coercivity"),
        Command::Combinatorics(o) => (o, "combinatorics"),
        Command::Simulate(o) => (o, "simulate"),
        Command::Expansion(o) => (o, "expansion"),
        Command::Perturbation(o) => (o, "perturbation"),
        Command::GaugeFix(g) => (&g.opts, "gauge-fix"),
        Command::Selftest(s) => (&s.opts, "selftest"),
    };
    let settings = opts.settings()?;
    let result = match &cli.command {
        Command::Constants(_) => commands::constants(&settings),
        Command::Hermite(_) => commands::hermite(&settings),
        Command::Qform(_) => commands::qform(&settings),
        Command::TableF(_) => commands::table_f(&settings),
        Command::Coercivity(_) => commands::coercivity(&settings),
        Command::Combinatorics(_) => commands::combinatorics(&settings),
        Command::Simulate(_) => commands::simulate(&settings),
        Command::Expansion(_) => commands::expansion(&settings),
        Command::Perturbation(_) => commands::perturbation(&settings),
        Command::GaugeFix(g) => commands::gauge_fix(&settings, g.datum.as_deref()),
        Command::Selftest(s) => commands::selftest(s.only.as_deref()),
    }?;
    let mut report = result.report;
    report.command = name.to_string();
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    let text = if settings.csv {
        result.csv.ok_or_else(|| usage(format!("{name} has no tabular output for --csv")))?
    } else {
        report.render()
    };
    let pass = report.pass();
    report::emit(&text, opts.out.as_deref())?;
    Ok(Output { text, pass })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => ExitCode::from(if out.pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage_like = e.downcast_ref::<UsageError>().is_some()
                || matches!(
                    e.downcast_ref::<strichartz::Error>(),
                    Some(
                        strichartz::Error::InvalidArgument(_)
                            | strichartz::Error::Parse(_)
                            | strichartz::Error::DimensionMismatch(_)
                            | strichartz::Error::LensDomain(_)
                    )
                );
            ExitCode::from(if usage_like { 2 } else { 1 })
        }
    }
}
