//! `pomsos`: derive pomset transition systems from rule specifications,
//! compare states, model-check formulas and classify rule formats.
//!
//! Exit codes: 0 the property holds, 1 it fails, 2 unknown because of
//! bounds, 3 usage or parse error.

mod commands;
mod input;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pomsos::plts::Mode;

#[derive(Debug, Parser)]
#[command(name = "pomsos", version, about = "Pomset transition system specifications")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Unfolding semantics for configuration-based checks.
    #[arg(long, global = true, default_value = "strict", value_parser = parse_mode)]
    pub mode: Mode,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub max_states: usize,
    #[arg(long, global = true, default_value_t = 64)]
    pub max_depth: usize,
    /// Seed for randomized checks.
    #[arg(long, global = true, env = "POMSETSOS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

/// Where the rules come from.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Built-in algebra name or path to a `.ptss` file.
    #[arg(long, default_value = "bpa_eps")]
    pub algebra: String,
    /// Extra priority pairs, as in `a < b, c < d`.
    #[arg(long)]
    pub priority: Option<String>,
}

/// Two states to compare: closed terms, or state ids of `--plts`.
#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Read an explicit PLTS from JSON; LEFT and RIGHT are then state ids.
    #[arg(long)]
    pub plts: Option<String>,
    /// Relation name: p s hp hhp, bp bs bhp bhhp, rbp ..., or a preorder.
    #[arg(long, default_value = "p")]
    pub rel: String,
    /// Unfolding depth for history-preserving relations.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Predicate read as acceptance by accepting traces.
    #[arg(long, default_value = "sqrt")]
    pub accept: String,
    pub left: String,
    pub right: String,
}

/// One system to inspect: a closed term or an explicit PLTS.
#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, conflicts_with = "plts")]
    pub term: Option<String>,
    #[arg(long)]
    pub plts: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive the PLTS of a closed term.
    Derive {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        term: String,
        /// Emit Graphviz DOT.
        #[arg(long, conflicts_with = "json")]
        dot: bool,
    },
    /// Decide an equivalence between two states.
    Equiv(PairArgs),
    /// Decide a preorder `LEFT ≲ RIGHT`.
    Preorder(PairArgs),
    /// Model-check a formula at the initial configuration.
    Mc {
        #[command(flatten)]
        system: SystemArgs,
        /// Unfolding depth; defaults to the state count.
        #[arg(long)]
        depth: Option<usize>,
        formula: String,
    },
    /// Classify the rules against every congruence format.
    Formats {
        #[command(flatten)]
        spec: SpecArgs,
        /// Check only this format.
        #[arg(long)]
        format: Option<String>,
    },
    /// Check whether EXT conservatively extends BASE.
    Conservative {
        base: String,
        ext: String,
        /// Also compare transitions of this many random base terms.
        #[arg(long, default_value_t = 0)]
        spot_check: usize,
        /// Depth of the random base terms.
        #[arg(long, default_value_t = 3)]
        term_depth: usize,
    },
    /// Compute the least three-valued stable model from some roots.
    Model {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long = "term", required = true)]
        terms: Vec<String>,
    },
    /// Check a measure for being a stratification.
    Stratify {
        #[command(flatten)]
        spec: SpecArgs,
        /// `source-size`, `symbol-count(f)` or `lex(m1, m2, ...)`.
        #[arg(long, default_value = "source-size")]
        measure: String,
        /// Depth of the closed terms substituted into rules.
        #[arg(long, default_value_t = 1)]
        pool_depth: usize,
    },
    /// Unfold a system into its configuration structure.
    Unfold {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

/// A command failure that is not a verdict.
#[derive(Debug)]
pub enum Failure {
    /// Usage or parse error (exit 3).
    Usage(String),
    /// Exploration stopped at a bound before an answer (exit 2).
    Bounds(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 3,
            Failure::Bounds(_) => 2,
        }
    }
}

/// Output text and exit code of a successful command.
pub struct Report {
    pub text: String,
    pub code: u8,
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Derive { spec, term, dot } => commands::derive(g, &spec, &term, dot),
        Command::Equiv(a) => commands::compare(g, &a, false),
        Command::Preorder(a) => commands::compare(g, &a, true),
        Command::Mc { system, depth, formula } => commands::mc(g, &system, depth, &formula),
        Command::Formats { spec, format } => commands::formats(g, &spec, format.as_deref()),
        Command::Conservative { base, ext, spot_check, term_depth } => {
            commands::conservative(g, &base, &ext, spot_check, term_depth)
        }
        Command::Model { spec, terms } => commands::model(g, &spec, &terms),
        Command::Stratify { spec, measure, pool_depth } => commands::stratify(g, &spec, &measure, pool_depth),
        Command::Unfold { system, depth } => commands::unfold(g, &system, depth),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(r) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(r.text.as_bytes());
            if !r.text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            ExitCode::from(r.code)
        }
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Bounds(m) => eprintln!("unknown: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
