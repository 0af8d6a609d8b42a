//! CSV and JSON output.
//!
//! All tables are long-form CSV with a header row. Numbers carry 9
//! significant digits, written in the shortest form that parses back to the
//! same value; absent values are empty fields. Flags are `;`-separated.
//!
//! | table        | columns |
//! |--------------|---------|
//! | comparison   | `metric,quantum,theory,des,rel_err_qt,flags` |
//! | convergence  | `scenario,n,capacity,lambda_eff_quantum,lambda_eff_theory,rel_err,bound_first_term,bound_first_term_ln,sampling_term,final_norm_defect` |
//! | sensitivity  | `scenario,alpha,beta,seed,lambda_eff_quantum,lambda_eff_theory,rel_err,final_norm_defect` |
//!
//! A CSV written to `out.csv` gets a JSON sidecar `out.params.json` holding
//! the full run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::harness::{ConvergenceRow, Scenario, SensitivityRow};
use crate::metrics::ComparisonRow;

/// Formats `x` to 9 significant digits.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let exp = rounded.abs().log10().floor();
    if (-5.0..16.0).contains(&exp) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn format_opt(x: Option<f64>) -> String {
    x.map(format_num).unwrap_or_default()
}

fn parse_num(field: &str, column: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| invalid(format!("column {column}: cannot parse {field:?} as a number")))
}

fn parse_opt(field: &str, column: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_num(field, column).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(field: &str, column: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| invalid(format!("column {column}: cannot parse {field:?} as an integer")))
}

/// A row type with a fixed CSV schema.
pub trait CsvRecord: Sized {
    const HEADER: &'static [&'static str];
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[&str]) -> Result<Self>;
}

impl CsvRecord for ComparisonRow {
    const HEADER: &'static [&'static str] = &["metric", "quantum", "theory", "des", "rel_err_qt", "flags"];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.metric.clone(),
            format_opt(self.quantum),
            format_opt(self.theory),
            format_opt(self.des),
            format_opt(self.rel_err_qt),
            self.flags.join(";"),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(ComparisonRow {
            metric: f[0].to_string(),
            quantum: parse_opt(f[1], "quantum")?,
            theory: parse_opt(f[2], "theory")?,
            des: parse_opt(f[3], "des")?,
            rel_err_qt: parse_opt(f[4], "rel_err_qt")?,
            flags: if f[5].is_empty() {
                Vec::new()
            } else {
                f[5].split(';').map(String::from).collect()
            },
        })
    }
}

impl CsvRecord for ConvergenceRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "n",
        "capacity",
        "lambda_eff_quantum",
        "lambda_eff_theory",
        "rel_err",
        "bound_first_term",
        "bound_first_term_ln",
        "sampling_term",
        "final_norm_defect",
    ];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            self.n.to_string(),
            self.capacity.to_string(),
            format_num(self.lambda_eff_quantum),
            format_num(self.lambda_eff_theory),
            format_num(self.rel_err),
            format_num(self.bound_first_term),
            format_num(self.bound_first_term_ln),
            format_num(self.sampling_term),
            format_num(self.final_norm_defect),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(ConvergenceRow {
            scenario: f[0].parse::<Scenario>()?,
            n: parse_int(f[1], "n")?,
            capacity: parse_int(f[2], "capacity")?,
            lambda_eff_quantum: parse_num(f[3], "lambda_eff_quantum")?,
            lambda_eff_theory: parse_num(f[4], "lambda_eff_theory")?,
            rel_err: parse_num(f[5], "rel_err")?,
            bound_first_term: parse_num(f[6], "bound_first_term")?,
            bound_first_term_ln: parse_num(f[7], "bound_first_term_ln")?,
            sampling_term: parse_num(f[8], "sampling_term")?,
            final_norm_defect: parse_num(f[9], "final_norm_defect")?,
        })
    }
}

impl CsvRecord for SensitivityRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "alpha",
        "beta",
        "seed",
        "lambda_eff_quantum",
        "lambda_eff_theory",
        "rel_err",
        "final_norm_defect",
    ];

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.scenario.to_string(),
            format_num(self.alpha),
            format_num(self.beta),
            self.seed.to_string(),
            format_num(self.lambda_eff_quantum),
            format_num(self.lambda_eff_theory),
            format_num(self.rel_err),
            format_num(self.final_norm_defect),
        ]
    }

    fn from_fields(f: &[&str]) -> Result<Self> {
        Ok(SensitivityRow {
            scenario: f[0].parse::<Scenario>()?,
            alpha: parse_num(f[1], "alpha")?,
            beta: parse_num(f[2], "beta")?,
            seed: parse_int(f[3], "seed")?,
            lambda_eff_quantum: parse_num(f[4], "lambda_eff_quantum")?,
            lambda_eff_theory: parse_num(f[5], "lambda_eff_theory")?,
            rel_err: parse_num(f[6], "rel_err")?,
            final_norm_defect: parse_num(f[7], "final_norm_defect")?,
        })
    }
}

pub fn to_csv<R: CsvRecord>(rows: &[R]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(R::HEADER)?;
    for row in rows {
        w.write_record(row.to_fields())?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| invalid(format!("csv output is not utf-8: {e}")))
}

pub fn from_csv<R: CsvRecord>(text: &str) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != R::HEADER {
        return Err(invalid(format!(
            "unexpected header {:?}, expected {:?}",
            header.iter().collect::<Vec<_>>(),
            R::HEADER
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let fields: Vec<&str> = rec.iter().collect();
            R::from_fields(&fields)
        })
        .collect()
}

/// Sidecar path for a CSV output: `dir/name.csv` becomes `dir/name.params.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("params.json")
}

/// Writes the CSV to `path` and the serialized configuration next to it.
pub fn write_csv_with_sidecar<P: Serialize>(path: &Path, csv: &str, params: &P) -> Result<()> {
    fs::write(path, csv)?;
    fs::write(sidecar_path(path), to_json(params)?)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
