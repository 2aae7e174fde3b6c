//! Command-line interface.
//!
//! Exit status is 0 on success, 1 for bad input (unreadable or malformed
//! logs and models, bad flags) and 2 when an internal invariant breaks.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchError, GeneratorConfig, OperatorWeights};
use crate::dfg::Dfg;
use crate::event_log::{expand_sentinels, parse_csv, read_traces_text, CsvConfig, EventLog, TextFormat};
use crate::metrics::{self, MetricsError};
use crate::miner::{self, MineError};
use crate::program::{parse_expr, render, Format, Program};

/// Environment variable holding the default `--log-format`.
pub const LOG_FORMAT_ENV: &str = "STRUCTMINE_LOG_FORMAT";

#[derive(Parser, Debug)]
#[command(name = "structmine", version, about = "Discover block-structured programs from event logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mine a program from a log and print it.
    Discover {
        #[command(flatten)]
        log: LogArgs,
        #[arg(long, value_enum, default_value = "expr")]
        format: ModelFormat,
        /// Write the sequence of rule applications as JSON lines.
        #[arg(long, value_name = "FILE")]
        trace_steps: Option<PathBuf>,
    },
    /// Score a model against a log, and optionally against a true program.
    Eval {
        #[command(flatten)]
        log: LogArgs,
        /// Model file, or an inline expression.
        #[arg(long, value_name = "FILE|EXPR")]
        model: String,
        /// Ground-truth program file, or an inline expression.
        #[arg(long, value_name = "FILE|EXPR")]
        truth: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run the synthetic program-recovery benchmark.
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        programs: usize,
        #[arg(long, default_value_t = 6)]
        traces: usize,
        /// Generate programs without repeated activities.
        #[arg(long)]
        no_duplicates: bool,
        #[arg(long)]
        json: bool,
        /// Write one JSON line per retained program.
        #[arg(long, value_name = "FILE")]
        results: Option<PathBuf>,
        #[arg(long)]
        alphabet_size: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long)]
        loop_bound: Option<usize>,
        /// Operator weights, e.g. `leaf=8,seq=6,opt=1,choice=1.5,plus=2,star=0.5,par=0`;
        /// unnamed operators keep their defaults.
        #[arg(long, value_parser = parse_weights)]
        weights: Option<OperatorWeights>,
    },
    /// Print the directly-follows graph of a log.
    Dfg {
        #[command(flatten)]
        log: LogArgs,
        #[arg(long, value_enum)]
        format: GraphFormat,
    },
}

#[derive(Args, Debug)]
pub struct LogArgs {
    /// Event log, CSV or plain text.
    #[arg(long, value_name = "FILE")]
    pub log: PathBuf,
    /// `auto` picks CSV for `.csv` files and text otherwise.
    #[arg(long, value_enum, env = LOG_FORMAT_ENV, default_value = "auto")]
    pub log_format: LogFormat,
    /// Activity separator of the text format (default: whitespace).
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long, default_value = "case")]
    pub case_column: String,
    #[arg(long, default_value = "activity")]
    pub activity_column: String,
    #[arg(long)]
    pub timestamp_column: Option<String>,
    /// Order unparsable timestamps as text instead of failing.
    #[arg(long)]
    pub lenient_timestamps: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LogFormat {
    Auto,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelFormat {
    Expr,
    Pseudocode,
    Dot,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<MineError> for CliError {
    fn from(e: MineError) -> Self {
        match e {
            MineError::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Mine(m) => m.into(),
            BenchError::Metrics(m) => CliError::Internal(m.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

impl LogArgs {
    fn read(&self) -> Result<EventLog, CliError> {
        let file = File::open(&self.log).map_err(|e| io_error(&self.log, e))?;
        let reader = BufReader::new(file);
        let csv = match self.log_format {
            LogFormat::Csv => true,
            LogFormat::Text => false,
            LogFormat::Auto => {
                self.log.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
            }
        };
        let parsed = if csv {
            let config = CsvConfig {
                case_column: self.case_column.clone(),
                activity_column: self.activity_column.clone(),
                timestamp_column: self.timestamp_column.clone(),
                lenient_timestamps: self.lenient_timestamps,
            };
            parse_csv(reader, &config)
        } else {
            read_traces_text(reader, &TextFormat { delimiter: self.delimiter })
        };
        parsed.map_err(|e| CliError::Input(format!("{}: {e}", self.log.display())))
    }
}

fn parse_weights(text: &str) -> Result<OperatorWeights, String> {
    let mut w = OperatorWeights::default();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("expected name=weight, got `{item}`"))?;
        let value: f64 = value.trim().parse().map_err(|_| format!("bad weight `{value}`"))?;
        let slot = match key.trim() {
            "leaf" => &mut w.leaf,
            "seq" => &mut w.seq,
            "opt" => &mut w.opt,
            "choice" => &mut w.choice,
            "plus" => &mut w.plus,
            "star" => &mut w.star,
            "par" => &mut w.par,
            other => return Err(format!("unknown operator `{other}`")),
        };
        *slot = value;
    }
    Ok(w)
}

/// Reads a program from a file if `arg` names one, else parses `arg`.
fn load_program(arg: &str) -> Result<Program, CliError> {
    let path = Path::new(arg);
    let (text, origin) = if path.is_file() {
        (std::fs::read_to_string(path).map_err(|e| io_error(path, e))?, path.display().to_string())
    } else {
        (arg.to_string(), "expression".to_string())
    };
    parse_expr(text.trim()).map_err(|e| CliError::Input(format!("{origin}: {e}")))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Discover { log, format, trace_steps } => {
            let log = log.read()?;
            let (program, trace) = miner::discover(&log)?;
            if let Some(path) = trace_steps {
                let file = File::create(&path).map_err(|e| io_error(&path, e))?;
                trace.write_json_lines(io::BufWriter::new(file)).map_err(|e| io_error(&path, e))?;
            }
            let format = match format {
                ModelFormat::Expr => Format::Expr,
                ModelFormat::Pseudocode => Format::Pseudocode,
                ModelFormat::Dot => Format::Dot,
                ModelFormat::Json => Format::Json,
            };
            let mut text = render(&program.canonicalize(), format);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            write_out(out, &text)
        }
        Command::Eval { log, model, truth, json } => {
            let log = log.read()?;
            let model = load_program(&model)?;
            let truth = truth.as_deref().map(load_program).transpose()?;
            let report = metrics::evaluate(&log, &model)?;
            let synthesis = truth.map(|t| metrics::synthesis(&model, &t));
            let text = if json {
                let mut value = serde_json::json!({ "metrics": report });
                if let Some(s) = synthesis {
                    value["synthesis"] = serde_json::to_value(s).map_err(|e| CliError::Internal(e.to_string()))?;
                }
                to_json(&value)?
            } else {
                let mut text = report.to_string();
                if let Some(s) = synthesis {
                    text.push('\n');
                    text.push_str(&s.to_string());
                }
                text
            };
            write_out(out, &text)
        }
        Command::Bench {
            seed,
            programs,
            traces,
            no_duplicates,
            json,
            results,
            alphabet_size,
            max_depth,
            loop_bound,
            weights,
        } => {
            let defaults = GeneratorConfig::default();
            let cfg = GeneratorConfig {
                seed,
                weights: weights.unwrap_or(defaults.weights),
                allow_duplicates: !no_duplicates,
                alphabet_size: alphabet_size.unwrap_or(defaults.alphabet_size),
                max_depth: max_depth.unwrap_or(defaults.max_depth),
                loop_bound: loop_bound.unwrap_or(defaults.loop_bound),
                ..defaults
            };
            let (report, rows) = bench::run_benchmark_detailed(&cfg, programs, traces)?;
            if let Some(path) = results {
                let file = File::create(&path).map_err(|e| io_error(&path, e))?;
                let mut w = io::BufWriter::new(file);
                for row in &rows {
                    serde_json::to_writer(&mut w, row).map_err(|e| CliError::Internal(e.to_string()))?;
                    w.write_all(b"\n").map_err(|e| io_error(&path, e))?;
                }
                w.flush().map_err(|e| io_error(&path, e))?;
            }
            let text = if json { to_json(&report)? } else { report.to_string() };
            write_out(out, &text)
        }
        Command::Dfg { log, format } => {
            let log = log.read()?;
            let g = Dfg::build(&expand_sentinels(&log));
            let text = match format {
                GraphFormat::Dot => g.to_dot(),
                GraphFormat::Json => to_json(&g.to_json())?,
            };
            write_out(out, &text)
        }
    }
}

/// Parses `args`, runs the command against stdout, reports errors on
/// stderr and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Input(msg) | CliError::Internal(msg)) = &e;
            eprintln!("structmine: {msg}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_separate_input_from_internal_failures() {
        use crate::dfg::DfgError;
        use crate::metrics::MetricsError;
        assert_eq!(CliError::from(MineError::EmptyLog).exit_code(), 1);
        assert_eq!(CliError::from(MineError::Internal(DfgError::MissingNode(7))).exit_code(), 2);
        assert_eq!(CliError::from(BenchError::Metrics(MetricsError::EmptyLog)).exit_code(), 2);
        assert_eq!(CliError::from(BenchError::InvalidConfig("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(MetricsError::EmptyLog).exit_code(), 1);
    }

    #[test]
    fn weight_lists() {
        let w = parse_weights("seq=5, par=0.5").unwrap();
        assert_eq!((w.seq, w.par, w.leaf), (5.0, 0.5, OperatorWeights::default().leaf));
        assert!(parse_weights("loop=1").is_err());
        assert!(parse_weights("seq").is_err());
    }

    #[test]
    fn inline_models_parse() {
        assert_eq!(load_program("(a (b?) c)").unwrap().to_expr(), "(a (b?) c)");
        assert!(matches!(load_program("(a"), Err(CliError::Input(_))));
    }
}
