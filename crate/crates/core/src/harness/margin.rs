use crate::chain::AdcConfig;
use crate::error::{Error, Result};

/// Worst-case column error against the chain's rounding margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginReport {
    pub k: usize,
    pub m: u32,
    pub delta_write: f64,
    pub delta_input: f64,
    /// `k * (dw + dx + dw*dx)`: every term of the fullest column at its worst.
    pub accumulated_bound: f64,
    /// `2^-(2m+1)`.
    pub half_grid: f64,
    pub feasible: bool,
    /// Largest `e` with `accumulated_bound <= 2^-e`; `None` when noiseless.
    pub effective_bits: Option<u32>,
    /// Carry field width the chain's ADC needs, `P - m`.
    pub carry_bits: u32,
    pub adc_bits: u32,
}

pub fn noise_margin(k: usize, m: u32, delta_write: f64, delta_input: f64) -> Result<MarginReport> {
    if k == 0 || m == 0 || m > 16 {
        return Err(Error::Param(format!(
            "need k >= 1 and 1 <= m <= 16 (got k={k}, m={m})"
        )));
    }
    for d in [delta_write, delta_input] {
        if !(d >= 0.0) || !d.is_finite() {
            return Err(Error::Param(format!(
                "noise magnitude must be finite and >= 0, got {d}"
            )));
        }
    }
    let accumulated_bound = k as f64 * (delta_write + delta_input + delta_write * delta_input);
    let half_grid = 2f64.powi(-(2 * m as i32) - 1);
    let effective_bits = if accumulated_bound == 0.0 {
        None
    } else {
        let mut e = (-accumulated_bound.log2()).floor() as i32;
        while accumulated_bound > 2f64.powi(-e) {
            e -= 1;
        }
        while accumulated_bound <= 2f64.powi(-(e + 1)) {
            e += 1;
        }
        Some(e.max(0) as u32)
    };
    let adc = AdcConfig::minimal(m, k);
    Ok(MarginReport {
        k,
        m,
        delta_write,
        delta_input,
        accumulated_bound,
        half_grid,
        feasible: accumulated_bound < half_grid,
        effective_bits,
        carry_bits: adc.carry_bits(),
        adc_bits: adc.total_bits,
    })
}
