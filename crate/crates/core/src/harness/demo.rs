//! The 8-bit worked example: `0.8359375 * 0.42578125` with `m = 2`, `k = 4`,
//! run through a crossbar whose conductances carry fixed perturbations of at
//! most `0.0063` and whose inputs are off by at most `0.0064`.

use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{run_chain_traced, AdcConfig, ChainRun};
use crate::crossbar::{
    analog_mac_with_offsets, build_multiplier_layout, ConductanceMatrix, NoiseModel,
    PartialSumsAnalog,
};
use crate::error::Result;
use crate::fixedpoint::{
    decompose, exact_product, partial_sums_exact, DigitVector, FixedPointValue, PartialSumsExact,
};

pub const X_NUMERATOR: u128 = 214;
pub const Y_NUMERATOR: u128 = 109;
/// Programmed `Y_j` after write variation, per digit.
pub const Y_PERTURBED: [f64; 4] = [0.2546, 0.5063, 0.7510, 0.2550];
/// `X_j` input amplitudes after signal variation.
pub const X_PERTURBED: [f64; 4] = [0.7509, 0.2545, 0.2564, 0.5050];

#[derive(Debug, Clone)]
pub struct Demo {
    pub x: FixedPointValue,
    pub y: FixedPointValue,
    pub xd: DigitVector,
    pub yd: DigitVector,
    pub programmed: ConductanceMatrix,
    pub exact_partials: PartialSumsExact,
    pub readout: PartialSumsAnalog,
    pub chain: ChainRun,
    pub z_hat: FixedPointValue,
    pub z_exact: FixedPointValue,
    pub abs_error: FixedPointValue,
}

pub fn worked_example() -> Result<Demo> {
    let (m, k) = (2, 4);
    let x = FixedPointValue::new(X_NUMERATOR, 8)?;
    let y = FixedPointValue::new(Y_NUMERATOR, 8)?;
    let xd = decompose(&x, m, k)?;
    let yd = decompose(&y, m, k)?;
    let ys = yd.normalized();
    let xs = xd.normalized();
    // every row holds the same digit sequence; column c of row r holds Y_{c-r}
    let programmed = build_multiplier_layout(&yd).perturbed(|r, c| Y_PERTURBED[c - r] - ys[c - r]);
    let input_eps: Vec<f64> = X_PERTURBED.iter().zip(&xs).map(|(a, b)| a - b).collect();
    let readout = analog_mac_with_offsets(&programmed, &xs, &input_eps, m)?;
    // the chain is ideal here, so the RNG is never consulted
    let chain = run_chain_traced(
        &readout,
        &AdcConfig::minimal(m, k),
        &NoiseModel::noiseless(),
        &mut ChaCha8Rng::seed_from_u64(0),
    )?;
    let z_hat = chain.digits.to_fixed_point();
    let z_exact = exact_product(&x, &y)?;
    Ok(Demo {
        exact_partials: partial_sums_exact(&xd, &yd)?,
        abs_error: z_hat.abs_diff(&z_exact),
        x,
        y,
        xd,
        yd,
        programmed,
        readout,
        chain,
        z_hat,
        z_exact,
    })
}

fn join(v: &[f64], prec: usize) -> String {
    v.iter()
        .map(|x| format!("{x:.prec$}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl Demo {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "x = {} = {}", self.x, self.x.to_binary_string());
        let _ = writeln!(s, "y = {} = {}", self.y, self.y.to_binary_string());
        let _ = writeln!(s, "X digits: {}", join(&self.xd.normalized(), 4));
        let _ = writeln!(s, "Y digits: {}", join(&self.yd.normalized(), 4));
        let _ = writeln!(s, "X inputs (perturbed): {}", join(&X_PERTURBED, 4));
        let _ = writeln!(s, "programmed crossbar (. = open):");
        s.push_str(&self.programmed.to_string());
        let _ = writeln!(
            s,
            "exact partial sums:  {}",
            join(&self.exact_partials.normalized(), 5)
        );
        let _ = writeln!(s, "analog partial sums: {}", join(self.readout.values(), 5));
        let _ = writeln!(s, "chain (least significant slot first):");
        let _ = writeln!(
            s,
            "  slot  z_in      carry_in  sum       code  digit  carry_out"
        );
        for c in &self.chain.cells {
            let _ = writeln!(
                s,
                "  {:<4}  {:<8.5}  {:<8}  {:<8.5}  {:<4}  {:<5}  {}",
                c.slot,
                c.v_in1,
                c.carry_in,
                c.output.sum,
                c.output.code,
                c.output.digit,
                c.output.carry_out
            );
        }
        let digits: Vec<String> = self
            .chain
            .digits
            .digits()
            .iter()
            .map(u32::to_string)
            .collect();
        let _ = writeln!(
            s,
            "product digits (base 4, MSB first): {}",
            digits.join(" ")
        );
        let _ = writeln!(
            s,
            "product  = {} = {}",
            self.z_hat.to_binary_string(),
            self.z_hat
        );
        let _ = writeln!(
            s,
            "exact    = {} = {}",
            self.z_exact.to_binary_string(),
            self.z_exact.ratio_string()
        );
        let _ = writeln!(s, "error    = {}", self.abs_error);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbations_within_stated_bound() {
        let d = worked_example().unwrap();
        let ys = d.yd.normalized();
        for r in 0..4 {
            for c in r..r + 4 {
                let eps = d.programmed.cell(r, c).value() - ys[c - r];
                assert!(eps.abs() <= 0.0063 + 1e-12);
            }
        }
        // X_3 = 0.2564 sits 0.0064 from 0.25
        for (a, b) in X_PERTURBED.iter().zip(d.xd.normalized()) {
            assert!((a - b).abs() <= 0.0064 + 1e-12);
        }
    }

    #[test]
    fn recovers_exact_product() {
        let d = worked_example().unwrap();
        assert_eq!(d.z_hat.numerator(), 23326);
        assert!(d.abs_error.is_zero());
        assert!(d.chain.faults.is_empty());
        let text = d.render();
        assert!(text.contains("0.0101101100011110"));
        assert!(text.contains("error    = 0"));
    }
}
