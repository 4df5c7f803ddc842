//! `charsum`: run one experiment from a JSON config and emit a JSON report.
//!
//! Exit status: 0 on success, 1 on a config or budget error, 2 when the
//! computation ran but one of its checks failed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use charsum::config::{Command, ExperimentConfig, FamilySpec};
use charsum::experiment;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "charsum", version, about = "Character sum laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    #[command(flatten)]
    flags: Overrides,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Closed-form codimension bounds theta(n, r, j)
    Bounds,
    /// The bootstrap fixed point and the no-improvement check
    Bootstrap,
    /// Exact values of S at given offsets
    CharSum,
    /// Both sides of the moment identity
    MomentVerify,
    /// Perfect-power census and its structure check
    Census,
    /// Single sums against the square-root envelope
    Weil,
    /// Stratify offset tuples by |S|
    Stratify,
    /// Exceptional tuples or variety points inside boxes
    Boxcount,
    /// Transverse extension and adapted basis on a worked instance
    SubspaceDemo,
    /// Translation invariance of an integer polynomial
    Invariance,
}

impl Cmd {
    fn command(&self) -> Command {
        match self {
            Cmd::Bounds => Command::Bounds,
            Cmd::Bootstrap => Command::Bootstrap,
            Cmd::CharSum => Command::CharSum,
            Cmd::MomentVerify => Command::MomentVerify,
            Cmd::Census => Command::Census,
            Cmd::Weil => Command::Weil,
            Cmd::Stratify => Command::Stratify,
            Cmd::Boxcount => Command::Boxcount,
            Cmd::SubspaceDemo => Command::SubspaceDemo,
            Cmd::Invariance => Command::Invariance,
        }
    }
}

/// Flags mirror config keys and win over the file.
#[derive(Debug, Args)]
struct Overrides {
    /// JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    p: Option<u64>,
    #[arg(long, global = true)]
    k: Option<u32>,
    /// Family as inline JSON
    #[arg(long, global = true)]
    family: Option<String>,
    /// Extension degrees, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    ext: Option<Vec<u32>>,
    #[arg(long, global = true)]
    s_min: Option<usize>,
    #[arg(long, global = true)]
    s_max: Option<usize>,
    #[arg(long, global = true)]
    n: Option<i64>,
    #[arg(long, global = true)]
    r: Option<i64>,
    #[arg(long, global = true)]
    r_max: Option<i64>,
    #[arg(long, global = true)]
    d: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true, value_delimiter = ',')]
    exponents: Option<Vec<i64>>,
    #[arg(long, global = true)]
    c_user: Option<f64>,
    #[arg(long, global = true)]
    c_prime: Option<f64>,
    #[arg(long, global = true)]
    j: Option<usize>,
    /// Integer polynomial as inline JSON terms
    #[arg(long, global = true)]
    integer_poly: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Sample size; exact enumeration when absent
    #[arg(long, global = true)]
    sample: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum inner-loop iterations
    #[arg(long, global = true, env = "CHARSUM_BUDGET")]
    budget: Option<u64>,
    #[arg(long, global = true)]
    row_limit: Option<usize>,
    /// CSV dump of (tuple, |S|) rows for stratify
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Report path; the report always goes to stdout as well
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    let f = &cli.flags;
    cfg.command = Some(cli.command.command());
    if let Some(p) = f.p {
        cfg.field.p = p;
    }
    if let Some(k) = f.k {
        cfg.field.k = k;
    }
    if let Some(text) = &f.family {
        cfg.family = serde_json::from_str::<FamilySpec>(text).map_err(|e| format!("--family: {e}"))?;
    }
    if let Some(text) = &f.integer_poly {
        cfg.integer_poly = Some(serde_json::from_str(text).map_err(|e| format!("--integer-poly: {e}"))?);
    }
    macro_rules! set {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = &f.$flag {
                cfg.$field = v.clone().into();
            })*
        };
    }
    set!(ext => ext_degrees, s_min => s_min, s_max => s_max, n => n, r => r, primes => primes,
         c_user => c_user, j => j, seed => seed, budget => budget, row_limit => row_limit);
    if f.r_max.is_some() {
        cfg.r_max = f.r_max;
    }
    if f.d.is_some() {
        cfg.d = f.d;
    }
    if f.exponents.is_some() {
        cfg.exponents = f.exponents.clone();
    }
    if f.c_prime.is_some() {
        cfg.c_prime = f.c_prime;
    }
    if f.sample.is_some() {
        cfg.sample = f.sample;
    }
    if f.csv.is_some() {
        cfg.csv = f.csv.clone();
    }
    if f.output.is_some() {
        cfg.output = f.output.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let start = Instant::now();
    let out = match experiment::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let report = experiment::render(&cfg, &out, Some(start.elapsed().as_secs_f64()));
    print!("{report}");
    if let Some(path) = &cfg.output {
        if let Err(e) = fs::write(path, &report) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if let (Some(path), Some(body)) = (&cfg.csv, &out.csv) {
        if let Err(e) = fs::write(path, body) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    if out.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("check failed: see \"pass\" in the report");
        ExitCode::from(2)
    }
}
