//! Command-line front end for `donaldson-core`.
//!
//! [`run`] is the whole program; `main` only forwards the process arguments
//! and standard streams to it.

pub mod eval;
pub mod expr;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use donaldson_core::criterion::{criterion_constant_term, pn_polynomial};
use donaldson_core::invariants::donaldson_table_with;
use donaldson_core::modforms::hurwitz;
use donaldson_core::named::NamedSeries;
use rayon::prelude::*;
use serde_json::Value;

use crate::eval::{evaluate, Value as EvalValue};
use crate::output::{write_output, Format, OutputRecord, Payload};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "donaldson", version, about = "Exact q-series computations for the Donaldson invariants of CP^2")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Truncation in lattice units (eighths of a power of q) for `series` and `eval`.
    #[arg(long, global = true, default_value_t = 256)]
    trunc: i64,

    /// Worker threads for table commands.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Write results to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a named series (theta2, Theta4, E2, Estar, u, K2, Q01plus, Z, ...).
    Series { name: String },
    /// Evaluate a series expression, e.g. "16*Theta2^4 + Theta3^4 - scale(Estar, 4)".
    Eval { expr: String },
    /// Tabulate Phi_{m,2n+1} and D_{m,n} for m + n < 2 max_k.
    Invariants {
        #[arg(long)]
        max_k: u32,
        /// Recompute every entry at doubled truncation.
        #[arg(long)]
        check: bool,
    },
    /// Check that the criterion constant terms vanish for m + n <= max_sum.
    VerifyCriterion {
        #[arg(long)]
        max_sum: u32,
    },
    /// Extract the polynomials P_0, ..., P_max_n.
    PnTable {
        #[arg(long)]
        max_n: u32,
        /// First of the two m values used to extract each P_n.
        #[arg(long, default_value_t = 0)]
        m_probe: u32,
    },
    /// The Hurwitz class number H(N).
    Hurwitz { n: u64 },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Series { .. } => "series",
            Command::Eval { .. } => "eval",
            Command::Invariants { .. } => "invariants",
            Command::VerifyCriterion { .. } => "verify-criterion",
            Command::PnTable { .. } => "pn-table",
            Command::Hurwitz { .. } => "hurwitz",
        }
    }
}

/// What a command produced.
struct Report {
    trunc: i64,
    records: Vec<OutputRecord>,
    failures: Vec<String>,
}

enum Outcome {
    Done(Report),
    /// Bad input; message for standard error.
    Usage(String),
    /// The computation itself failed.
    Error(String),
}

fn rat_cell(r: &donaldson_core::Rat) -> Value {
    Value::String(r.to_string())
}

fn series_command(name: &str, trunc: i64) -> Outcome {
    let named: NamedSeries = match name.parse() {
        Ok(n) => n,
        Err(e) => return Outcome::Usage(e.to_string()),
    };
    match named.build(trunc) {
        Ok(series) => Outcome::Done(Report {
            trunc,
            records: vec![OutputRecord { payload: Payload::Series { label: named.name(), series }, trunc }],
            failures: vec![],
        }),
        Err(e) => Outcome::Error(e.to_string()),
    }
}

fn eval_command(src: &str, trunc: i64) -> Outcome {
    let expr = match expr::parse(src) {
        Ok(e) => e,
        Err(e) => return Outcome::Usage(format!("parse error at {e}")),
    };
    let label = expr.to_string();
    let record = match evaluate(&expr, src, trunc) {
        Ok(EvalValue::Series(series)) => OutputRecord { payload: Payload::Series { label, series }, trunc },
        Ok(EvalValue::Scalar(c)) => {
            OutputRecord { payload: Payload::Scalar { label, value: c.to_string() }, trunc }
        }
        Err(e) => return Outcome::Error(format!("evaluation error at {e}")),
    };
    Outcome::Done(Report { trunc, records: vec![record], failures: vec![] })
}

fn invariants_command(max_k: u32, check: bool) -> Outcome {
    if max_k == 0 {
        return Outcome::Usage("--max-k must be at least 1".into());
    }
    let table = match donaldson_table_with(max_k, check) {
        Ok(t) => t,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    let mut failures = Vec::new();
    let rows = table
        .rows()
        .into_iter()
        .map(|e| {
            if !e.equal {
                failures.push(format!("Phi != D at (m, n) = ({}, {}): {} vs {}", e.m, e.n, e.phi, e.d));
            }
            if e.k.is_none() && !(e.phi.is_zero() && e.d.is_zero()) {
                failures.push(format!("odd cell ({}, {}) does not vanish", e.m, e.n));
            }
            vec![
                e.k.map_or(Value::Null, Value::from),
                Value::from(e.m),
                Value::from(e.n),
                rat_cell(&e.phi),
                rat_cell(&e.d),
                Value::Bool(e.equal),
            ]
        })
        .collect();
    let trunc = table.trunc_used;
    let verdict = Payload::Verdict {
        check: "phi equals d".into(),
        passed: failures.is_empty(),
        detail: format!(
            "{} cells{}",
            table.entries.len(),
            if check { ", stable under doubled truncation" } else { "" }
        ),
    };
    Outcome::Done(Report {
        trunc,
        records: vec![
            OutputRecord { payload: Payload::Table { columns: vec!["k", "m", "n", "phi", "d", "equal"], rows }, trunc },
            OutputRecord { payload: verdict, trunc },
        ],
        failures,
    })
}

fn criterion_command(max_sum: u32) -> Outcome {
    let cells: Vec<(u32, u32)> = (0..=max_sum).flat_map(|s| (0..=s).map(move |m| (m, s - m))).collect();
    let values: Vec<_> = cells.par_iter().map(|&(m, n)| criterion_constant_term(m, n)).collect();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (&(m, n), v) in cells.iter().zip(values) {
        match v {
            Ok(c) => {
                if !c.is_zero() {
                    failures.push(format!("constant term at ({m}, {n}) is {c}"));
                }
                rows.push(vec![Value::from(m), Value::from(n), rat_cell(&c), Value::Bool(c.is_zero())]);
            }
            Err(e) => return Outcome::Error(format!("({m}, {n}): {e}")),
        }
    }
    let verdict = Payload::Verdict {
        check: "criterion constant terms vanish".into(),
        passed: failures.is_empty(),
        detail: format!("{} cells with m + n <= {max_sum}", cells.len()),
    };
    Outcome::Done(Report {
        trunc: 1,
        records: vec![
            OutputRecord {
                payload: Payload::Table { columns: vec!["m", "n", "constant_term", "vanishes"], rows },
                trunc: 1,
            },
            OutputRecord { payload: verdict, trunc: 1 },
        ],
        failures,
    })
}

fn pn_command(max_n: u32, m_probe: u32) -> Outcome {
    let polys: Vec<_> = (0..=max_n).into_par_iter().map(|n| pn_polynomial(n, m_probe)).collect();
    let trunc = donaldson_core::criterion::PN_QUOTIENT_TRUNC;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (n, p) in (0..=max_n).zip(polys) {
        match p {
            Ok(poly) => records.push(OutputRecord { payload: Payload::Polynomial { n, poly }, trunc }),
            Err(e) => failures.push(format!("P{n}: {e}")),
        }
    }
    Outcome::Done(Report { trunc, records, failures })
}

fn hurwitz_command(n: u64) -> Outcome {
    let record = OutputRecord {
        payload: Payload::Scalar { label: format!("H({n})"), value: hurwitz(n).to_string() },
        trunc: 0,
    };
    Outcome::Done(Report { trunc: 0, records: vec![record], failures: vec![] })
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Series { name } => series_command(name, cli.trunc),
        Command::Eval { expr } => eval_command(expr, cli.trunc),
        Command::Invariants { max_k, check } => invariants_command(*max_k, *check),
        Command::VerifyCriterion { max_sum } => criterion_command(*max_sum),
        Command::PnTable { max_n, m_probe } => pn_command(*max_n, *m_probe),
        Command::Hurwitz { n } => hurwitz_command(*n),
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// exit code: 0 on success, 1 on a failed check or computation, 2 on bad usage.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    if cli.trunc < 1 {
        let _ = writeln!(err, "error: --trunc must be positive");
        return EXIT_USAGE;
    }
    let outcome = match cli.jobs {
        Some(0) => {
            let _ = writeln!(err, "error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Outcome::Error(e.to_string()),
        },
        None => dispatch(&cli),
    };
    let report = match outcome {
        Outcome::Done(r) => r,
        Outcome::Usage(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
        Outcome::Error(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_FAILED;
        }
    };
    let command = cli.command.name();
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|mut f| {
            write_output(&mut f, cli.format, command, report.trunc, &report.records, &report.failures)
        }),
        None => write_output(out, cli.format, command, report.trunc, &report.records, &report.failures),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_FAILED;
    }
    for f in &report.failures {
        let _ = writeln!(err, "check failed: {f}");
    }
    if report.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
