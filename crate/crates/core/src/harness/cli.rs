//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when
//! `bound --strict` finds the noise margin infeasible.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::crossbar::NoiseKind;
use crate::device::{simulate_iv, sine, MemristorDevice};
use crate::harness::config::{parse_magnitude, ConfigFile};
use crate::harness::demo::worked_example;
use crate::harness::experiment::run_sweep;
use crate::harness::margin::noise_margin;

#[derive(Debug, Parser)]
#[command(name = "xbar-mul", version, about = "Crossbar multiplier simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the 8-bit worked example and print a digit-level trace.
    Demo,
    /// Monte Carlo sweep over random operand pairs; writes CSV.
    Sweep(SweepArgs),
    /// Noise-margin analysis for a crossbar geometry.
    Bound(BoundArgs),
    /// Single-device I-V trace under a sine drive; writes CSV.
    Iv(IvArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    /// Write-noise magnitude, e.g. `2^-8`.
    #[arg(long, value_parser = magnitude)]
    dw: Option<f64>,
    /// Input-noise magnitude.
    #[arg(long, value_parser = magnitude)]
    dx: Option<f64>,
    /// Chain summing-conductance noise magnitude.
    #[arg(long, value_parser = magnitude)]
    dc: Option<f64>,
    /// Carry DAC noise magnitude.
    #[arg(long, value_parser = magnitude)]
    dac: Option<f64>,
    /// `uniform` or `gaussian`.
    #[arg(long)]
    noise_kind: Option<NoiseKind>,
    #[arg(long)]
    adc_bits: Option<u32>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (required here or in the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, value_parser = magnitude, default_value = "0")]
    dw: f64,
    #[arg(long, value_parser = magnitude, default_value = "0")]
    dx: f64,
    /// Exit with status 2 if the margin is infeasible.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct IvArgs {
    /// Drive amplitude (V).
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Drive period (s).
    #[arg(long, default_value_t = 100.0)]
    period: f64,
    #[arg(long, default_value_t = 2.0)]
    periods: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Initial doped fraction `w/D`.
    #[arg(long, default_value_t = 0.5)]
    w0: f64,
    /// `normalized` or `tio2`.
    #[arg(long, default_value = "normalized")]
    preset: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn magnitude(s: &str) -> Result<f64, String> {
    parse_magnitude(s).map_err(|e| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Demo => demo(out),
        Command::Sweep(a) => sweep(a, out, err),
        Command::Bound(a) => bound(a, out),
        Command::Iv(a) => iv(a, out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

type CmdResult = Result<i32, String>;

fn io_err(e: std::io::Error) -> String {
    e.to_string()
}

fn demo(out: &mut dyn Write) -> CmdResult {
    let d = worked_example().map_err(|e| e.to_string())?;
    out.write_all(d.render().as_bytes()).map_err(io_err)?;
    Ok(0)
}

fn sweep(a: SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let base = match &a.config {
        Some(path) => ConfigFile::load(path).map_err(|e| e.to_string())?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        n: a.n,
        m: a.m,
        k: a.k,
        write_noise: a.dw,
        input_noise: a.dx,
        chain_noise: a.dc,
        dac_noise: a.dac,
        noise_kind: a.noise_kind,
        adc_bits: a.adc_bits,
        trials: a.trials,
        seed: a.seed,
    };
    let cfg = base.merge(flags).resolve().map_err(|e| e.to_string())?;
    let report = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let csv = report.to_csv();
    let summary = format!(
        "trials={} successes={} success_rate={} max_error={} ({}) faults={}\n",
        report.trials,
        report.successes,
        report.success_rate,
        report.max_error,
        report.max_error.ratio_string(),
        report.faults
    );
    match &a.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
            out.write_all(summary.as_bytes()).map_err(io_err)?;
        }
        None => {
            out.write_all(csv.as_bytes()).map_err(io_err)?;
            err.write_all(summary.as_bytes()).map_err(io_err)?;
        }
    }
    Ok(0)
}

fn bound(a: BoundArgs, out: &mut dyn Write) -> CmdResult {
    let r = noise_margin(a.k, a.m, a.dw, a.dx).map_err(|e| e.to_string())?;
    let bits = r
        .effective_bits
        .map_or_else(|| "unbounded".to_string(), |b| b.to_string());
    writeln!(
        out,
        "k={} m={} dw={} dx={}\naccumulated_bound={}\nhalf_grid={}\neffective_bits={}\nadc_bits={} carry_bits={}\n{}",
        r.k,
        r.m,
        r.delta_write,
        r.delta_input,
        r.accumulated_bound,
        r.half_grid,
        bits,
        r.adc_bits,
        r.carry_bits,
        if r.feasible { "feasible" } else { "infeasible" }
    )
    .map_err(io_err)?;
    Ok(if a.strict && !r.feasible { 2 } else { 0 })
}

fn iv(a: IvArgs, out: &mut dyn Write) -> CmdResult {
    let dev = match a.preset.as_str() {
        "normalized" => MemristorDevice::normalized(a.w0),
        "tio2" => MemristorDevice::tio2(a.w0),
        other => return Err(format!("unknown device preset {other:?}")),
    };
    if !(a.period > 0.0) || !(a.periods > 0.0) || !(a.dt > 0.0) {
        return Err("period, periods and dt must be positive".into());
    }
    let steps = (a.period * a.periods / a.dt).round() as usize;
    let trace = simulate_iv(&dev, sine(a.amplitude, 1.0 / a.period), a.dt, steps.max(1))
        .map_err(|e| e.to_string())?;
    let csv = trace.to_csv();
    match &a.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?,
        None => out.write_all(csv.as_bytes()).map_err(io_err)?,
    }
    Ok(0)
}
