//! Command-line front end: single rates, optimization, sweeps, correlation
//! curves and the Fock-space cross-check.

mod settings;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qs_cvqkd::mutual_info::QuadratureScheme;
use qs_cvqkd::optimize::{correlation_sweep, linear_range, optimize_point, sweep, Protocol, SweepConfig, SweepRow};
use qs_cvqkd::oracle::{oracle_check, OracleSettings};
use qs_cvqkd::params::{ChannelParams, ScissorParams, DEFAULT_KAPPA_DB_PER_KM};
use qs_cvqkd::rates::{gg02_rate_noqs, key_rate_noqs_dm, key_rate_qs, plob_thermal, RatePoint};
use qs_cvqkd::report::{write_correlation_csv, write_json, write_oracle_csv, write_rate_csv, OracleReportRow};
use qs_cvqkd::Error;
use rayon::prelude::*;
use settings::{Flags, Format, Settings};

const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "qs-cvqkd", version, about = "Key rates of QPSK CV-QKD with a quantum-scissor receiver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate at a fixed amplitude and gain, with baselines at the same amplitude
    Rate(Flags),
    /// Rate optimized over amplitude and gain at one channel setting
    Optimize(Flags),
    /// Optimized rates over every (eps-tm, length-km) pair
    Sweep(Flags),
    /// Correlation parameters against the modulation variance, lossless channel
    Correlations(Flags),
    /// Closed forms against the truncated-Fock simulation
    OracleCheck(Flags),
}

/// Non-zero exit without an error message (already reported).
struct Reported(u8);

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

fn quadrature(s: &Settings) -> QuadratureScheme {
    QuadratureScheme::Simpson { half_width: 10.0, nodes: s.grid_nodes }
}

fn sweep_config(s: &Settings) -> SweepConfig {
    SweepConfig {
        lengths_km: s.lengths_km.clone().unwrap_or_default(),
        eps_tm: s.eps_tm.clone(),
        beta: s.beta,
        alpha_cap: s.alpha_cap,
        protocol: s.protocol,
        quadrature: quadrature(s),
        ..SweepConfig::default()
    }
}

fn channel(s: &Settings) -> Result<ChannelParams, Error> {
    ChannelParams::from_length(s.single_length()?, DEFAULT_KAPPA_DB_PER_KM, s.single_eps()?)
}

fn required(value: Option<f64>, flag: &str) -> Result<f64, Error> {
    value.ok_or_else(|| Error::Config(format!("--{flag} is required")))
}

fn open_output(s: &Settings) -> Result<Box<dyn Write>, Error> {
    Ok(match &s.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_rates(s: &Settings, rows: &[SweepRow]) -> Result<(), Error> {
    let out = open_output(s)?;
    match s.format {
        Format::Csv => write_rate_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

fn run_rate(s: &Settings) -> Result<(), Error> {
    let ch = channel(s)?;
    let alpha = required(s.alpha, "alpha")?;
    let gain = required(s.gain, "gain")?;
    let qs = ScissorParams::from_gain(gain)?;
    let grid = qs_cvqkd::mutual_info::QuadratureGrid::from_scheme(quadrature(s))?;
    let r = key_rate_qs(alpha, &ch, &qs, s.beta, &grid)?;
    let point = RatePoint {
        length_km: ch.length_km,
        transmissivity: ch.transmissivity,
        eps_tm: ch.eps_tm,
        beta: s.beta,
        alpha_opt: alpha,
        g_opt: gain,
        p_succ: r.p_succ,
        i_ab: r.i_ab,
        chi_eb: r.chi_eb,
        key_rate: r.key_rate,
        baseline_noqs_dm: key_rate_noqs_dm(alpha, &ch, s.beta, &grid)?,
        baseline_gg02: gg02_rate_noqs(2.0 * alpha * alpha, &ch, s.beta)?,
        plob_bound: plob_thermal(&ch).unwrap_or(f64::NAN),
    };
    emit_rates(s, &[SweepRow { point, error: None }])
}

fn run_optimize(s: &Settings) -> Result<(), Error> {
    let cfg = sweep_config(s);
    cfg.validate()?;
    let point = optimize_point(&channel(s)?, s.beta, &cfg)?;
    emit_rates(s, &[SweepRow { point, error: None }])
}

fn run_correlations(s: &Settings) -> Result<(), Error> {
    let gain = s.gain.unwrap_or(2.0);
    let v_a = linear_range(0.01, 0.5, 0.01)?;
    let rows = correlation_sweep(&v_a, gain)?;
    let out = open_output(s)?;
    match s.format {
        Format::Csv => write_correlation_csv(&rows, out),
        Format::Json => write_json(&rows, out),
    }
}

fn run_sweep(s: &Settings) -> Result<Result<(), Reported>, Error> {
    if s.protocol == Protocol::Correlations {
        return run_correlations(s).map(Ok);
    }
    if s.lengths_km.is_none() {
        return Err(Error::Config("--length-km is required".into()));
    }
    let rows = sweep(&sweep_config(s))?;
    emit_rates(s, &rows)?;
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_some()).collect();
    if failed.is_empty() {
        return Ok(Ok(()));
    }
    for r in &failed {
        eprintln!(
            "row L={} km eps_tm={} failed: {}",
            r.point.length_km,
            r.point.eps_tm,
            r.error.as_deref().unwrap_or_default()
        );
    }
    Ok(Err(Reported(3)))
}

/// A single point when `--alpha`, `--gain` and `--length-km` are all given,
/// otherwise the standard 36-point grid.
fn oracle_points(s: &Settings) -> Result<Vec<(f64, ChannelParams, f64)>, Error> {
    if let (Some(alpha), Some(gain), Some(_)) = (s.alpha, s.gain, &s.lengths_km) {
        return Ok(vec![(alpha, channel(s)?, gain)]);
    }
    let mut pts = Vec::new();
    for alpha in [0.1, 0.5, 0.9] {
        for t in [0.5, 0.1, 0.01] {
            for eps in [0.0, 0.05] {
                for gain in [1.0, 2.0] {
                    pts.push((alpha, ChannelParams::from_transmissivity(t, eps)?, gain));
                }
            }
        }
    }
    Ok(pts)
}

fn run_oracle_check(s: &Settings) -> Result<Result<(), Reported>, Error> {
    let settings = OracleSettings { n_cut: s.fock_cutoff, ..OracleSettings::default() };
    let points = oracle_points(s)?;
    let checked: Vec<Vec<OracleReportRow>> = points
        .par_iter()
        .map(|(alpha, ch, gain)| {
            let qs = ScissorParams::from_gain(*gain)?;
            let rows = oracle_check(*alpha, ch, &qs, &settings, ORACLE_TOLERANCE)?;
            Ok(rows
                .into_iter()
                .map(|check| OracleReportRow {
                    alpha: *alpha,
                    transmissivity: ch.transmissivity,
                    eps_tm: ch.eps_tm,
                    gain: *gain,
                    check,
                })
                .collect())
        })
        .collect::<Result<_, Error>>()?;
    let rows: Vec<OracleReportRow> = checked.into_iter().flatten().collect();
    let out = open_output(s)?;
    match s.format {
        Format::Csv => write_oracle_csv(&rows, out)?,
        Format::Json => write_json(&rows, out)?,
    }
    let failed = rows.iter().filter(|r| !r.check.pass).count();
    if failed == 0 {
        Ok(Ok(()))
    } else {
        eprintln!("{failed} of {} oracle comparisons exceed {ORACLE_TOLERANCE:e}", rows.len());
        Ok(Err(Reported(1)))
    }
}

fn run(cli: Cli) -> Result<Result<(), Reported>, Error> {
    let (flags, cmd) = match &cli.command {
        Command::Rate(f) => (f, "rate"),
        Command::Optimize(f) => (f, "optimize"),
        Command::Sweep(f) => (f, "sweep"),
        Command::Correlations(f) => (f, "correlations"),
        Command::OracleCheck(f) => (f, "oracle-check"),
    };
    let s = Settings::resolve(flags)?;
    match cmd {
        "rate" => run_rate(&s).map(Ok),
        "optimize" => run_optimize(&s).map(Ok),
        "sweep" => run_sweep(&s),
        "correlations" => run_correlations(&s).map(Ok),
        _ => run_oracle_check(&s),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Reported(code))) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
