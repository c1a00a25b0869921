//! `bratteli`: analyse finite-rank Bratteli diagrams from JSON documents.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "bratteli",
    version,
    about = "Measures, extensions and adic words of Bratteli diagrams"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Analysis depth (number of levels).
    #[arg(long, global = true, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..=100_000))]
    pub depth: u64,
    /// Symbol cap for generated words.
    #[arg(long, global = true, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..=1_000_000_000))]
    pub cap: u64,
    /// Hilbert-metric radius for clustering measures.
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = unit_interval)]
    pub eps: f64,
    /// Contraction threshold for numerical unique ergodicity.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = unit_interval)]
    pub tau_threshold: f64,
    /// Largest bit size of a matrix entry before the analysis stops.
    #[arg(long, global = true, default_value_t = 1 << 20, value_parser = clap::value_parser!(u64).range(64..=1 << 32))]
    pub bit_cap: u64,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true, value_parser = positive_seconds)]
    pub time_budget: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the JSON report to the fixture next to the spec file.
    #[arg(long, global = true)]
    pub bless: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Canonical block-triangular form and minimal components.
    Decompose(SpecArg),
    /// Contraction profile and unique ergodicity verdict.
    Ergodicity(SpecArg),
    /// Invariant measures seen at the given depth.
    Measures(SpecArg),
    /// Tower-mass evidence for exact finite rank.
    ExactRank {
        #[command(flatten)]
        spec: SpecArg,
        /// Measure to use when several are found.
        #[arg(long)]
        cluster: Option<usize>,
    },
    /// Extension of a measure from a constant vertex subset.
    Extend {
        #[command(flatten)]
        spec: SpecArg,
        /// Comma-separated vertex labels or indices.
        #[arg(long)]
        sub: String,
        /// Force a criterion: OdometerIff, KacSufficient, KacNecessary,
        /// AlphaBetaSeries or NormRatioSeries.
        #[arg(long)]
        criterion: Option<String>,
        #[arg(long)]
        cluster: Option<usize>,
    },
    /// Extension from the odometer along one vertex path.
    Odometer {
        #[command(flatten)]
        spec: SpecArg,
        /// Vertices repeated cyclically from level 1 (after the prefix).
        #[arg(long)]
        path: String,
        /// Vertices at the first levels.
        #[arg(long, default_value = "")]
        prefix: String,
    },
    /// Spectral-radius decision for linearly recurrent two-block diagrams.
    Linrec {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        sub: String,
        /// Letters used for empirical densities of non-periodic sequences.
        #[arg(long, default_value_t = bratteli::linrec::DEFAULT_HORIZON)]
        horizon: usize,
    },
    /// Expand the tower word of a vertex.
    Word {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value = "0")]
        vertex: String,
        #[arg(long)]
        level: usize,
        /// Factors to count, as words over a-z A-Z 0-9.
        #[arg(long = "factor")]
        factors: Vec<String>,
        /// Write the word here and the counts to `<out>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical self-correlations of a tower.
    Correlate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value = "0")]
        vertex: String,
        #[arg(long)]
        level: usize,
        /// Comma-separated lags; defaults to heights and sums of heights.
        #[arg(long)]
        q: Option<String>,
    },
    /// Generalized Morse diagram from blocks over Z/kZ.
    Morse {
        #[arg(long)]
        k: usize,
        /// A block such as `0112`; repeat for a periodic schedule.
        #[arg(long = "block", required = true)]
        blocks: Vec<String>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SpecArg {
    /// Diagram document (JSON).
    pub spec: PathBuf,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("{x} is not in (0, 1)"))
    }
}

fn positive_seconds(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{x} is not a positive number of seconds"))
    }
}

/// Failure modes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

impl From<bratteli::Error> for Failure {
    fn from(e: bratteli::Error) -> Self {
        match e {
            bratteli::Error::MemoryBudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn configure_threads() {
    let Ok(v) = std::env::var("BRATTELI_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        _ => eprintln!("warning: ignoring BRATTELI_THREADS={v:?}"),
    }
}

fn run_with_budget(cli: Cli) -> Result<Report, Failure> {
    let Some(secs) = cli.global.time_budget else {
        return commands::run(&cli);
    };
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(commands::run(&cli));
    });
    match rx.recv_timeout(Duration::from_secs_f64(secs)) {
        Ok(r) => r,
        Err(_) => Err(Failure::Budget(format!(
            "time budget of {secs} s exhausted"
        ))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let format = cli.global.format;
    match run_with_budget(cli) {
        Ok(report) => {
            let text = match format {
                Format::Json => report.json_text(),
                Format::Table => report.table,
            };
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Budget(m) => eprintln!("budget exceeded: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
