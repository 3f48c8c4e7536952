//! ADC/DAC carry chain.
//!
//! One cell per partial-sum slot, evaluated from the least significant slot
//! upward. Each cell adds its crossbar column `Z~_j` to the upstream carry
//! scaled by `2^-m`, quantizes the sum to the `2^-2m` grid, emits the low
//! `m` bits as an output digit and forwards the rest as the next carry.

use rand::Rng;

use crate::crossbar::{NoiseModel, PartialSumsAnalog};
use crate::error::{Error, Result};
use crate::fixedpoint::FixedPointValue;

/// Effective-bit budget of each cell's ADC.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdcConfig {
    /// Total bits `P` of the quantized cell sum: `m` output bits plus `P - m` carry bits.
    pub total_bits: u32,
    /// Digit width; the quantization grid is `2^-2m`.
    pub m: u32,
}

/// `ceil(log2(n))` for `n >= 1`.
fn ceil_log2(n: u64) -> u32 {
    64 - (n - 1).leading_zeros()
}

impl AdcConfig {
    /// Smallest budget that holds every cell sum of a `k`-digit product.
    pub fn minimal(m: u32, k: usize) -> Self {
        Self {
            total_bits: 2 * m + ceil_log2(k as u64 + 1),
            m,
        }
    }

    pub fn new(total_bits: u32, m: u32, k: usize) -> Result<Self> {
        let min = Self::minimal(m, k);
        if total_bits < min.total_bits || total_bits > 62 {
            return Err(Error::Param(format!(
                "ADC needs between {} and 62 bits for m={m}, k={k}; got {total_bits}",
                min.total_bits
            )));
        }
        Ok(Self { total_bits, m })
    }

    pub fn carry_bits(&self) -> u32 {
        self.total_bits - self.m
    }

    pub fn grid(&self) -> f64 {
        2f64.powi(-2 * self.m as i32)
    }

    /// Number of distinct codes, `2^P`.
    pub fn levels(&self) -> u64 {
        1u64 << self.total_bits
    }
}

fn round_code(v: f64, adc: &AdcConfig) -> f64 {
    // f64::round breaks ties away from zero
    (v / adc.grid()).round()
}

/// Nearest grid code of `v`, ties away from zero.
pub fn quantize(v: f64, adc: &AdcConfig) -> Result<u64> {
    let code = round_code(v, adc);
    if !(code >= 0.0 && code < adc.levels() as f64) {
        return Err(Error::Saturation {
            slot: None,
            input: v,
        });
    }
    Ok(code as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutput {
    /// Analog sum seen by the ADC.
    pub sum: f64,
    /// Quantized sum in grid units.
    pub code: u64,
    pub digit: u32,
    pub carry_out: u64,
}

/// One cell: `V_s = V_in1 + V_in2 * 2^-m`, quantize, split.
///
/// `carry_in` is the upstream carry in grid units; its DAC voltage is
/// `carry_in * 2^-m` in the upstream slot's units, and the `2^-m` summing
/// conductance aligns it with this slot.
pub fn chain_cell<R: Rng + ?Sized>(
    v_in1: f64,
    carry_in: u64,
    adc: &AdcConfig,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CellOutput> {
    let m = adc.m;
    if carry_in >> adc.carry_bits() != 0 {
        return Err(Error::Overflow {
            slot: None,
            carry: carry_in,
            carry_bits: adc.carry_bits(),
        });
    }
    let scale = 2f64.powi(-(m as i32));
    let carry_v = carry_in as f64 * scale + noise.dac.sample(rng);
    let g_in = 1.0 + noise.chain.sample(rng);
    let g_carry = scale + noise.chain.sample(rng);
    let sum = v_in1 * g_in + carry_v * g_carry;
    let code = round_code(sum, adc);
    if code >= adc.levels() as f64 {
        return Err(Error::Overflow {
            slot: None,
            carry: (code as u64) >> m,
            carry_bits: adc.carry_bits(),
        });
    }
    let code = quantize(sum, adc)?;
    Ok(CellOutput {
        sum,
        code,
        digit: (code & ((1 << m) - 1)) as u32,
        carry_out: code >> m,
    })
}

/// `2k` base-`2^m` digits of the product, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductDigits {
    digits: Vec<u32>,
    m: u32,
}

impl ProductDigits {
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn to_fixed_point(&self) -> FixedPointValue {
        let numerator = self
            .digits
            .iter()
            .fold(0u128, |acc, &d| (acc << self.m) | d as u128);
        FixedPointValue::new(numerator, self.digits.len() as u32 * self.m)
            .expect("2k digits of m bits form a value below one")
    }
}

/// Record of one cell evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrace {
    pub slot: usize,
    pub v_in1: f64,
    pub carry_in: u64,
    pub output: CellOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub digits: ProductDigits,
    /// Cells in evaluation order (least significant slot first).
    pub cells: Vec<CellTrace>,
    /// Out-of-range conditions; offending codes were clamped so the run could finish.
    pub faults: Vec<Error>,
}

/// Evaluates the full chain, clamping and recording any cell that leaves
/// its ADC range instead of stopping.
pub fn run_chain_traced<R: Rng + ?Sized>(
    zt: &PartialSumsAnalog,
    adc: &AdcConfig,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ChainRun> {
    let (m, k) = (zt.m(), zt.k());
    if adc.m != m {
        return Err(Error::Param(format!(
            "ADC configured for m={}, partial sums use m={m}",
            adc.m
        )));
    }
    let min = AdcConfig::minimal(m, k);
    if adc.total_bits < min.total_bits {
        return Err(Error::Param(format!(
            "ADC has {} bits, k={k} needs at least {}",
            adc.total_bits, min.total_bits
        )));
    }
    let slots = 2 * k - 1;
    let mask = (1u64 << m) - 1;
    let mut digits = vec![0u32; slots + 1];
    let mut cells = Vec::with_capacity(slots);
    let mut faults = Vec::new();
    let mut carry = 0u64;
    for slot in (0..slots).rev() {
        let v_in1 = zt.values()[slot];
        let output = match chain_cell(v_in1, carry, adc, noise, rng) {
            Ok(out) => out,
            Err(err) => {
                let (code, err) = match err {
                    Error::Saturation { input, .. } => (
                        0,
                        Error::Saturation {
                            slot: Some(slot),
                            input,
                        },
                    ),
                    Error::Overflow {
                        carry, carry_bits, ..
                    } => (
                        adc.levels() - 1,
                        Error::Overflow {
                            slot: Some(slot),
                            carry,
                            carry_bits,
                        },
                    ),
                    other => return Err(other),
                };
                faults.push(err);
                CellOutput {
                    sum: f64::NAN,
                    code,
                    digit: (code & mask) as u32,
                    carry_out: code >> m,
                }
            }
        };
        digits[slot + 1] = output.digit;
        cells.push(CellTrace {
            slot,
            v_in1,
            carry_in: carry,
            output,
        });
        carry = output.carry_out;
    }
    if carry > mask {
        // the product of two values below one cannot carry past the top digit
        faults.push(Error::Overflow {
            slot: Some(0),
            carry,
            carry_bits: m,
        });
        carry = mask;
    }
    digits[0] = carry as u32;
    Ok(ChainRun {
        digits: ProductDigits { digits, m },
        cells,
        faults,
    })
}

/// Evaluates the chain and fails on the first out-of-range cell.
pub fn run_chain<R: Rng + ?Sized>(
    zt: &PartialSumsAnalog,
    adc: &AdcConfig,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ProductDigits> {
    let mut run = run_chain_traced(zt, adc, noise, rng)?;
    if run.faults.is_empty() {
        Ok(run.digits)
    } else {
        Err(run.faults.swap_remove(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoint::{assemble_from_partials, partial_sums_exact, DigitVector};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    fn ideal() -> NoiseModel {
        NoiseModel::noiseless()
    }

    /// Reference ripple carry over integer partial sums, independent of the
    /// analog path: returns MSB-first digits and every intermediate carry.
    fn ripple(z: &[u64], m: u32) -> (Vec<u32>, Vec<u64>) {
        let mut digits = Vec::new();
        let mut carries = Vec::new();
        let mut carry = 0u64;
        for &v in z.iter().rev() {
            let t = v + carry;
            digits.push((t % (1 << m)) as u32);
            carry = t / (1 << m);
            carries.push(carry);
        }
        digits.push(carry as u32);
        digits.reverse();
        (digits, carries)
    }

    #[test]
    fn adc_sizing() {
        assert_eq!(AdcConfig::minimal(2, 4).total_bits, 4 + 3);
        assert_eq!(AdcConfig::minimal(1, 16).total_bits, 2 + 5);
        assert_eq!(AdcConfig::minimal(1, 15).total_bits, 2 + 4);
        assert_eq!(AdcConfig::minimal(1, 32).carry_bits(), 7);
        assert!(AdcConfig::new(6, 2, 4).is_err());
        assert!(AdcConfig::new(9, 2, 4).is_ok());
    }

    #[test]
    fn quantize_examples() {
        let adc = AdcConfig::minimal(2, 4);
        assert_eq!(quantize(0.758058, &adc).unwrap(), 12);
        assert_eq!(quantize(0.3125, &adc).unwrap(), 5);
        assert_eq!(quantize(0.0625 * 7.5, &adc).unwrap(), 8);
        assert_eq!(quantize(0.0625 * 0.5, &adc).unwrap(), 1);
        assert_eq!(quantize(-0.01, &adc).unwrap(), 0);
    }

    #[test]
    fn quantize_rejects_out_of_range() {
        let adc = AdcConfig::minimal(2, 4);
        assert!(matches!(
            quantize(-0.04, &adc),
            Err(Error::Saturation { .. })
        ));
        // 2^7 codes of 1/16 each
        assert!(quantize(127.0 / 16.0, &adc).is_ok());
        assert!(quantize(128.0 / 16.0, &adc).is_err());
    }

    #[test]
    fn cell_examples() {
        let adc = AdcConfig::minimal(2, 4);
        let out = chain_cell(2.0 / 16.0, 0, &adc, &ideal(), &mut rng()).unwrap();
        assert_eq!((out.digit, out.carry_out), (2, 0));
        let out = chain_cell(12.0 / 16.0, 3, &adc, &ideal(), &mut rng()).unwrap();
        assert_eq!(out.code, 15);
        assert_eq!((out.digit, out.carry_out), (3, 3));
        let out = chain_cell(0.0, 0, &adc, &ideal(), &mut rng()).unwrap();
        assert_eq!((out.digit, out.carry_out), (0, 0));
    }

    #[test]
    fn cell_rejects_carry_overflow() {
        let adc = AdcConfig::minimal(2, 4);
        assert!(matches!(
            chain_cell(0.0, 1 << 5, &adc, &ideal(), &mut rng()),
            Err(Error::Overflow { .. })
        ));
        assert!(matches!(
            chain_cell(7.99, 31, &adc, &ideal(), &mut rng()),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn worked_example_digits() {
        let z = [3u64, 7, 12, 10, 8, 7, 2];
        let (expected, _) = ripple(&z, 2);
        assert_eq!(expected, vec![1, 1, 2, 3, 0, 1, 3, 2]);

        let zt =
            PartialSumsAnalog::new(z.iter().map(|&v| v as f64 / 16.0).collect(), 2, 4).unwrap();
        let out = run_chain(&zt, &AdcConfig::minimal(2, 4), &ideal(), &mut rng()).unwrap();
        assert_eq!(out.digits(), &[1, 1, 2, 3, 0, 1, 3, 2]);
        let value = out.to_fixed_point();
        assert_eq!(value.to_binary_string(), "0.0101101100011110");
        assert_eq!(value.numerator(), 23326);
    }

    #[test]
    fn all_zero_partial_sums() {
        let zt = PartialSumsAnalog::new(vec![0.0; 9], 3, 5).unwrap();
        let out = run_chain(&zt, &AdcConfig::minimal(3, 5), &ideal(), &mut rng()).unwrap();
        assert_eq!(out.digits(), &[0; 10]);
    }

    #[test]
    fn noisy_worked_example_recovers_exactly() {
        // crossbar readout from the perturbed operands, every slot within 2^-5
        let noisy = [
            0.19118, 0.44498, 0.75806, 0.64100, 0.51314, 0.44464, 0.12878,
        ];
        let zt = PartialSumsAnalog::new(noisy.to_vec(), 2, 4).unwrap();
        let out = run_chain(&zt, &AdcConfig::minimal(2, 4), &ideal(), &mut rng()).unwrap();
        assert_eq!(out.digits(), &[1, 1, 2, 3, 0, 1, 3, 2]);
    }

    #[test]
    fn saturation_is_reported_with_slot() {
        let zt = PartialSumsAnalog::new(vec![0.0, -0.5, 0.0], 1, 2).unwrap();
        let err = run_chain(&zt, &AdcConfig::minimal(1, 2), &ideal(), &mut rng()).unwrap_err();
        assert_eq!(
            err,
            Error::Saturation {
                slot: Some(1),
                input: -0.5
            }
        );
        let run = run_chain_traced(&zt, &AdcConfig::minimal(1, 2), &ideal(), &mut rng()).unwrap();
        assert_eq!(run.faults.len(), 1);
        assert_eq!(run.digits.digits().len(), 4);
    }

    #[test]
    fn mismatched_adc_rejected() {
        let zt = PartialSumsAnalog::new(vec![0.0; 3], 1, 2).unwrap();
        assert!(run_chain(&zt, &AdcConfig::minimal(2, 2), &ideal(), &mut rng()).is_err());
        let small = AdcConfig {
            total_bits: 2,
            m: 1,
        };
        assert!(run_chain(&zt, &small, &ideal(), &mut rng()).is_err());
    }

    fn random_digits(rng: &mut ChaCha8Rng, m: u32, k: usize) -> DigitVector {
        let mask = (1u32 << m) - 1;
        DigitVector::new((0..k).map(|_| rng.random::<u32>() & mask).collect(), m).unwrap()
    }

    proptest! {
        #[test]
        fn exact_recovery_inside_half_grid(m in 1u32..=4, k in 1usize..=16, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xd = random_digits(&mut rng, m, k);
            let yd = random_digits(&mut rng, m, k);
            let zs = partial_sums_exact(&xd, &yd).unwrap();
            let half = 2f64.powi(-(2 * m as i32) - 1);
            let zt: Vec<f64> = zs.normalized().iter()
                .map(|&z| z + rng.random_range(-0.999..0.999) * half)
                .collect();
            let zt = PartialSumsAnalog::new(zt, m, k).unwrap();
            let out = run_chain(&zt, &AdcConfig::minimal(m, k), &NoiseModel::noiseless(), &mut rng).unwrap();
            prop_assert_eq!(out.to_fixed_point(), assemble_from_partials(&zs));
        }

        #[test]
        fn carries_bounded_and_digit_count(m in 1u32..=4, k in 1usize..=16, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xd = random_digits(&mut rng, m, k);
            let yd = random_digits(&mut rng, m, k);
            let zs = partial_sums_exact(&xd, &yd).unwrap();
            let zt = PartialSumsAnalog::new(zs.normalized(), m, k).unwrap();
            let run = run_chain_traced(&zt, &AdcConfig::minimal(m, k), &NoiseModel::noiseless(), &mut rng).unwrap();
            prop_assert!(run.faults.is_empty());
            prop_assert_eq!(run.digits.digits().len(), 2 * k);
            let (expected, carries) = ripple(zs.values(), m);
            prop_assert_eq!(run.digits.digits(), expected.as_slice());
            let cap = k as u64 * ((1 << m) - 1) + 1;
            for (cell, &c) in run.cells.iter().zip(&carries) {
                prop_assert_eq!(cell.output.carry_out, c);
                prop_assert!(c <= cap);
            }
            prop_assert!(*run.digits.digits().first().unwrap() < (1 << m));
        }
    }
}
