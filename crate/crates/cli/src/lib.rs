//! Command-line front end for `freefold`. [`run`] does all the work and
//! returns the text and exit code, so the binary is a thin wrapper.
//!
//! Exit codes: 0 = predicate true / success, 1 = predicate false,
//! 2 = input error.

mod commands;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use commands::Verdict;

/// What a command printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CmdOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl CmdOutput {
    fn input_error(message: impl std::fmt::Display) -> Self {
        CmdOutput { stdout: String::new(), stderr: format!("error: {message}\n"), code: 2 }
    }
}

/// Machine-readable record of one query, written by `--trace`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub command: String,
    /// Arguments that reproduce the query (output options removed).
    pub args: Vec<String>,
    pub verdict: serde_json::Value,
    pub trace: Option<serde_json::Value>,
    pub timing_ms: f64,
}

#[derive(Debug, Parser)]
#[command(name = "freefold", version, about = "Decision procedures for finite-rank free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub(crate) struct TraceOpts {
    /// Emit a JSON query record with the full trace.
    #[arg(long)]
    pub trace: bool,
    /// Write the JSON record here instead of stdout.
    #[arg(long, requires = "trace")]
    pub out: Option<String>,
}

#[derive(Debug, Subcommand)]
pub(crate) enum Command {
    /// Freely reduce a word.
    Reduce { word: String },
    /// Exit 0 iff the two words are conjugate.
    Conj {
        first: String,
        second: String,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Exit 0 iff the word is a free basis element (up to conjugacy).
    Primitive {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Write one DOT file per split into this directory.
        #[arg(long)]
        dot_dir: Option<String>,
        #[command(flatten)]
        trace: TraceOpts,
    },
    /// Classify an endomorphism; exit 0 iff it is an automorphism.
    Endo {
        /// Comma-separated images of the generators.
        #[arg(long)]
        images: String,
        /// Cross-check against the subgroup generated by the images.
        #[arg(long)]
        check: bool,
        #[command(flatten)]
        trace: TraceOpts,
    },
    /// Report on the subgroup generated by the words.
    Subgroup {
        #[arg(required = true)]
        words: Vec<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        basis: bool,
        #[arg(long)]
        index: bool,
        /// Membership queries; exit 1 if any fails.
        #[arg(long)]
        contains: Vec<String>,
        /// Write the Stallings graph as DOT.
        #[arg(long)]
        dot: Option<String>,
        /// Print the Stallings graph as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Exit 0 iff the conjugacy classes form a partial free basis.
    PartialBasis {
        words: Vec<String>,
        /// Same as the positional words.
        #[arg(long, num_args = 1..)]
        conjugacy: Vec<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        dot_dir: Option<String>,
        #[command(flatten)]
        trace: TraceOpts,
    },
    /// Fold factorization of the map of roses given by an endomorphism.
    Fold {
        #[arg(long)]
        images: String,
        /// Write one DOT file per stage into this directory.
        #[arg(long)]
        dot_dir: Option<String>,
        #[command(flatten)]
        trace: TraceOpts,
    },
    /// Systole of a length structure on a graph (barycenter by default).
    Systole {
        /// Graph JSON file.
        #[arg(long)]
        graph: String,
        /// Edge lengths such as `e0=1/3,e1=1/3,e2=1/3`.
        #[arg(long)]
        lengths: Option<String>,
    },
    /// Print a random automorphism as a composition of Nielsen moves.
    RandomAuto {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-run a recorded query and compare its verdict and trace.
    Replay { file: String },
    /// Run one query per line of a file, in parallel, in input order.
    Batch { file: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Reduce { .. } => "reduce",
            Command::Conj { .. } => "conj",
            Command::Primitive { .. } => "primitive",
            Command::Endo { .. } => "endo",
            Command::Subgroup { .. } => "subgroup",
            Command::PartialBasis { .. } => "partial-basis",
            Command::Fold { .. } => "fold",
            Command::Systole { .. } => "systole",
            Command::RandomAuto { .. } => "random-auto",
            Command::Replay { .. } => "replay",
            Command::Batch { .. } => "batch",
        }
    }

    fn trace_opts(&self) -> Option<&TraceOpts> {
        match self {
            Command::Primitive { trace, .. }
            | Command::Endo { trace, .. }
            | Command::PartialBasis { trace, .. }
            | Command::Fold { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

/// Drop the options that only control where output goes.
fn replay_args(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        match a.as_str() {
            "--trace" => {}
            "--out" | "--dot-dir" | "--dot" => skip = true,
            s if s.starts_with("--out=") || s.starts_with("--dot-dir=") || s.starts_with("--dot=") => {}
            _ => out.push(a.clone()),
        }
    }
    out
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, S>(args: I) -> CmdOutput
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CmdOutput { stdout: String::new(), stderr: text, code: 2 }
            } else {
                CmdOutput { stdout: text, stderr: String::new(), code: 0 }
            };
        }
    };
    let start = Instant::now();
    let result = commands::execute(&cli.command);
    let elapsed = start.elapsed().as_secs_f64() * 1000.0;
    let outcome = match result {
        Ok(outcome) => outcome,
        Err(message) => return CmdOutput::input_error(message),
    };
    let Some(opts) = cli.command.trace_opts().filter(|o| o.trace) else {
        return CmdOutput { stdout: outcome.text, stderr: String::new(), code: outcome.code };
    };
    let record = QueryResult {
        command: cli.command.name().to_string(),
        args: replay_args(&args[2.min(args.len())..]),
        verdict: outcome.verdict,
        trace: Some(outcome.trace),
        timing_ms: elapsed,
    };
    let json = serde_json::to_string_pretty(&record).expect("serializable") + "\n";
    match &opts.out {
        None => CmdOutput { stdout: json, stderr: String::new(), code: outcome.code },
        Some(path) => match std::fs::write(path, json) {
            Ok(()) => CmdOutput { stdout: outcome.text, stderr: String::new(), code: outcome.code },
            Err(e) => CmdOutput::input_error(format!("cannot write {path}: {e}")),
        },
    }
}
