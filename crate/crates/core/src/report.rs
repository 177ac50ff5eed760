//! CSV and JSON output for sweeps, correlation curves and oracle checks.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::SweepRow;
use crate::oracle::OracleCheckRow;
use crate::rates::CorrelationPoint;

pub const RATE_COLUMNS: [&str; 13] = [
    "length_km",
    "T",
    "eps_tm",
    "beta",
    "alpha_opt",
    "g_opt",
    "p_succ",
    "i_ab_bits",
    "chi_eb_bits",
    "key_rate",
    "baseline_noqs_dm",
    "baseline_gg02",
    "plob_bound",
];

pub const CORRELATION_COLUMNS: [&str; 5] = ["v_a", "z_g", "z_g_nla", "z4", "z4_qs"];

pub const ORACLE_COLUMNS: [&str; 10] = ["alpha", "T", "eps_tm", "g", "quantity", "closed_form", "oracle", "abs_diff", "tolerance", "pass"];

/// Ten significant digits in scientific notation; non-finite values print as `NaN`/`inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.9e}")
    }
}

/// Oracle comparison row tagged with its parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReportRow {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub transmissivity: f64,
    pub eps_tm: f64,
    #[serde(rename = "g")]
    pub gain: f64,
    #[serde(flatten)]
    pub check: OracleCheckRow,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// Rate sweep CSV. An `error` column is appended only when some row failed.
pub fn write_rate_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let with_errors = rows.iter().any(|r| r.error.is_some());
    let mut out = csv_writer(w);
    let mut header: Vec<&str> = RATE_COLUMNS.to_vec();
    if with_errors {
        header.push("error");
    }
    out.write_record(&header).map_err(io_err)?;
    for row in rows {
        let p = &row.point;
        let mut rec: Vec<String> = [
            p.length_km,
            p.transmissivity,
            p.eps_tm,
            p.beta,
            p.alpha_opt,
            p.g_opt,
            p.p_succ,
            p.i_ab,
            p.chi_eb,
            p.key_rate,
            p.baseline_noqs_dm,
            p.baseline_gg02,
            p.plob_bound,
        ]
        .iter()
        .map(|&x| format_float(x))
        .collect();
        if with_errors {
            rec.push(row.error.clone().unwrap_or_default());
        }
        out.write_record(&rec).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_correlation_csv<W: Write>(rows: &[CorrelationPoint], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(CORRELATION_COLUMNS).map_err(io_err)?;
    for p in rows {
        let rec: Vec<String> = [p.v_a, p.z_g, p.z_g_nla, p.z4, p.z4_qs].iter().map(|&x| format_float(x)).collect();
        out.write_record(&rec).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn write_oracle_csv<W: Write>(rows: &[OracleReportRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(ORACLE_COLUMNS).map_err(io_err)?;
    for r in rows {
        let c = &r.check;
        let rec = [
            format_float(r.alpha),
            format_float(r.transmissivity),
            format_float(r.eps_tm),
            format_float(r.gain),
            c.quantity.clone(),
            format_float(c.closed_form),
            format_float(c.oracle),
            format_float(c.abs_diff),
            format_float(c.tolerance),
            c.pass.to_string(),
        ];
        out.write_record(&rec).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Pretty JSON array with a trailing newline. Non-finite numbers become `null`.
pub fn write_json<W: Write, T: Serialize>(rows: &[T], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, rows).map_err(io_err)?;
    writeln!(w).map_err(io_err)
}
