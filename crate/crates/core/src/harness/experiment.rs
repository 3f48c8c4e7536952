//! End-to-end trials and seeded Monte Carlo sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{run_chain_traced, ProductDigits};
use crate::crossbar::{analog_mac, build_multiplier_layout, program_array, PartialSumsAnalog};
use crate::error::{Error, Result};
use crate::fixedpoint::{decompose, exact_product, FixedPointValue};
use crate::harness::config::SimulationConfig;

/// RNG stream for trial `index` of a run seeded with `seed`.
///
/// Each trial owns a separate ChaCha stream, so results do not depend on
/// how trials are scheduled across threads.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub x: FixedPointValue,
    pub y: FixedPointValue,
    pub z_hat: FixedPointValue,
    pub z_exact: FixedPointValue,
    pub abs_error: FixedPointValue,
    /// `abs_error <= 2^-n`.
    pub success: bool,
    /// First ADC saturation or carry overflow, if any cell left its range.
    pub fault: Option<String>,
}

/// Intermediate values of one trial, for tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDetail {
    pub report: TrialReport,
    pub readout: PartialSumsAnalog,
    pub digits: ProductDigits,
}

fn check_operand(v: &FixedPointValue, n: u32, name: &str) -> Result<()> {
    if v.frac_bits() > n {
        return Err(Error::Param(format!(
            "operand {name} has {} fractional bits, configuration holds {n}",
            v.frac_bits()
        )));
    }
    Ok(())
}

/// Runs one multiplication drawing all noise from `rng`.
pub fn run_trial_with_rng<R: Rng + ?Sized>(
    x: &FixedPointValue,
    y: &FixedPointValue,
    cfg: &SimulationConfig,
    rng: &mut R,
) -> Result<TrialDetail> {
    let (m, k, n) = (cfg.m, cfg.k, cfg.n());
    check_operand(x, n, "x")?;
    check_operand(y, n, "y")?;
    let adc = cfg.adc()?;
    let xd = decompose(x, m, k)?;
    let yd = decompose(y, m, k)?;
    let g = program_array(&build_multiplier_layout(&yd), &cfg.noise, rng);
    let readout = analog_mac(&g, &xd.normalized(), m, &cfg.noise, rng)?;
    let run = run_chain_traced(&readout, &adc, &cfg.noise, rng)?;
    let z_hat = run.digits.to_fixed_point();
    let z_exact = exact_product(x, y)?;
    let abs_error = z_hat.abs_diff(&z_exact);
    let report = TrialReport {
        x: *x,
        y: *y,
        z_hat,
        z_exact,
        success: abs_error.le_pow2_neg(n),
        abs_error,
        fault: run.faults.first().map(ToString::to_string),
    };
    Ok(TrialDetail {
        report,
        readout,
        digits: run.digits,
    })
}

/// Runs one multiplication on trial stream 0 of `seed`.
pub fn run_trial(
    x: &FixedPointValue,
    y: &FixedPointValue,
    cfg: &SimulationConfig,
    seed: u64,
) -> Result<TrialReport> {
    let mut rng = trial_rng(seed, 0);
    Ok(run_trial_with_rng(x, y, cfg, &mut rng)?.report)
}

/// Uniform draw on the `2^-n` grid of `[0,1)`.
pub fn random_operand<R: Rng + ?Sized>(n: u32, rng: &mut R) -> FixedPointValue {
    let bits = rng.random::<u128>() >> (128 - n);
    FixedPointValue::new(bits, n).expect("n-bit draw is below 2^n")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub max_error: FixedPointValue,
    pub faults: usize,
    pub rows: Vec<TrialReport>,
}

impl SweepReport {
    /// `x,y,error` in decimal plus the exact error as a reduced ratio.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,error,error_exact\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.x.to_decimal_string(),
                r.y.to_decimal_string(),
                r.abs_error.to_decimal_string(),
                r.abs_error.ratio_string()
            ));
        }
        out
    }
}

/// Random operand pairs, one RNG stream per trial.
pub fn run_sweep(cfg: &SimulationConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let n = cfg.n();
    let rows = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let x = random_operand(n, &mut rng);
            let y = random_operand(n, &mut rng);
            run_trial_with_rng(&x, &y, cfg, &mut rng).map(|d| d.report)
        })
        .collect::<Result<Vec<_>>>()?;
    let successes = rows.iter().filter(|r| r.success).count();
    let faults = rows.iter().filter(|r| r.fault.is_some()).count();
    let max_error = rows
        .iter()
        .map(|r| r.abs_error)
        .max()
        .expect("at least one trial");
    Ok(SweepReport {
        trials: rows.len(),
        successes,
        success_rate: successes as f64 / rows.len() as f64,
        max_error,
        faults,
        rows,
    })
}
