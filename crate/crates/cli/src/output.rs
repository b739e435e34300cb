//! Output records and their plain, JSON and CSV renderings.

use std::io::{self, Write};

use clap::ValueEnum;
use donaldson_core::criterion::ZPolynomial;
use donaldson_core::series::exponent_fraction;
use donaldson_core::QExp;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Series { label: String, series: QExp },
    Table { columns: Vec<&'static str>, rows: Vec<Vec<Value>> },
    Scalar { label: String, value: String },
    Polynomial { n: u32, poly: ZPolynomial },
    Verdict { check: String, passed: bool, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub payload: Payload,
    /// Truncation (lattice units) the values are exact below; 0 when no
    /// series is involved.
    pub trunc: i64,
}

impl OutputRecord {
    pub fn kind(&self) -> &'static str {
        match self.payload {
            Payload::Series { .. } => "series",
            Payload::Table { .. } => "table",
            Payload::Scalar { .. } => "scalar",
            Payload::Polynomial { .. } => "polynomial",
            Payload::Verdict { .. } => "verdict",
        }
    }

    pub fn to_json(&self) -> Value {
        let payload = match &self.payload {
            Payload::Series { label, series } => json!({
                "label": label,
                "valuation": series.valuation().map(exponent_fraction),
                "order": exponent_fraction(series.trunc()),
                "terms": series
                    .terms()
                    .map(|(e, c)| json!({"exponent": exponent_fraction(e), "coefficient": c.to_string()}))
                    .collect::<Vec<_>>(),
                "text": series.to_string(),
            }),
            Payload::Table { columns, rows } => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> =
                            columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect();
                        Value::Object(obj)
                    })
                    .collect();
                json!({ "columns": columns, "rows": rows })
            }
            Payload::Scalar { label, value } => json!({ "label": label, "value": value }),
            Payload::Polynomial { n, poly } => json!({
                "n": n,
                "coefficients": poly.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "text": poly.to_string(),
            }),
            Payload::Verdict { check, passed, detail } => {
                json!({ "check": check, "passed": passed, "detail": detail })
            }
        };
        json!({ "kind": self.kind(), "trunc": self.trunc, "exact": true, "payload": payload })
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn plain_cell(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::Bool(true) => "yes".into(),
        Value::Bool(false) => "no".into(),
        other => cell_text(other),
    }
}

fn write_plain(out: &mut dyn Write, records: &[OutputRecord], failures: &[String]) -> io::Result<()> {
    for r in records {
        match &r.payload {
            Payload::Series { label, series } => writeln!(out, "{label} = {series}")?,
            Payload::Scalar { label, value } => writeln!(out, "{label} = {value}")?,
            Payload::Polynomial { n, poly } => writeln!(out, "P{n} = {poly}")?,
            Payload::Verdict { check, passed, detail } => {
                writeln!(out, "{check}: {} ({detail})", if *passed { "PASS" } else { "FAIL" })?
            }
            Payload::Table { columns, rows } => {
                let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(plain_cell).collect()).collect();
                let widths: Vec<usize> = (0..columns.len())
                    .map(|i| cells.iter().map(|r| r[i].len()).chain([columns[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |items: Vec<&str>| {
                    items
                        .iter()
                        .zip(&widths)
                        .map(|(s, w)| format!("{s:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(columns.clone()))?;
                for row in &cells {
                    writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
                }
            }
        }
    }
    for f in failures {
        writeln!(out, "failure: {f}")?;
    }
    Ok(())
}

fn write_csv(out: &mut dyn Write, records: &[OutputRecord]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let mut last_header: Option<Vec<String>> = None;
    let mut header = |w: &mut csv::Writer<&mut dyn Write>, h: &[&str]| -> csv::Result<()> {
        let h: Vec<String> = h.iter().map(|s| s.to_string()).collect();
        if last_header.as_ref() != Some(&h) {
            w.write_record(&h)?;
            last_header = Some(h);
        }
        Ok(())
    };
    let mut run = |w: &mut csv::Writer<&mut dyn Write>| -> csv::Result<()> {
        for r in records {
            match &r.payload {
                Payload::Series { series, .. } => {
                    header(w, &["exponent", "coefficient"])?;
                    for (e, c) in series.terms() {
                        w.write_record([exponent_fraction(e), c.to_string()])?;
                    }
                }
                Payload::Table { columns, rows } => {
                    header(w, columns)?;
                    for row in rows {
                        w.write_record(row.iter().map(cell_text))?;
                    }
                }
                Payload::Scalar { label, value } => {
                    header(w, &["label", "value"])?;
                    w.write_record([label, value])?;
                }
                Payload::Polynomial { n, poly } => {
                    header(w, &["n", "power", "coefficient"])?;
                    for (i, c) in poly.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                        w.write_record([n.to_string(), i.to_string(), c.to_string()])?;
                    }
                }
                // the exit status carries verdicts in CSV mode
                Payload::Verdict { .. } => {}
            }
        }
        w.flush()?;
        Ok(())
    };
    run(&mut w).map_err(io::Error::other)
}

/// Writes one invocation's output in the requested format.
pub fn write_output(
    out: &mut dyn Write,
    format: Format,
    command: &str,
    trunc: i64,
    records: &[OutputRecord],
    failures: &[String],
) -> io::Result<()> {
    match format {
        Format::Plain => write_plain(out, records, failures),
        Format::Csv => write_csv(out, records),
        Format::Json => {
            let doc = json!({
                "command": command,
                "trunc": trunc,
                "results": records.iter().map(OutputRecord::to_json).collect::<Vec<_>>(),
                "failures": failures,
            });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(io::Error::other)?;
            writeln!(out)
        }
    }
}
