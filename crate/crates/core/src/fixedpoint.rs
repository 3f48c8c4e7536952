//! Exact unsigned fixed-point values in `[0, 1)`, their radix-`2^m` digit
//! slices, and the integer reference path for the full multiplication.
//!
//! Everything here is exact integer arithmetic. The analog modules are
//! checked against these functions.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of fractional bits.
pub const MAX_FRAC_BITS: u32 = 128;
/// Largest supported digit width.
pub const MAX_DIGIT_BITS: u32 = 16;

/// An exact value `numerator / 2^frac_bits` with `numerator < 2^frac_bits`.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointValue {
    numerator: u128,
    frac_bits: u32,
}

impl FixedPointValue {
    pub fn new(numerator: u128, frac_bits: u32) -> Result<Self> {
        if frac_bits == 0 || frac_bits > MAX_FRAC_BITS {
            return Err(Error::FracBits(frac_bits));
        }
        if frac_bits < 128 && numerator >> frac_bits != 0 {
            return Err(Error::OutOfRange {
                numerator,
                frac_bits,
            });
        }
        Ok(Self {
            numerator,
            frac_bits,
        })
    }

    pub fn zero(frac_bits: u32) -> Result<Self> {
        Self::new(0, frac_bits)
    }

    /// Parses a binary fraction such as `0.10110011`.
    pub fn from_binary_str(s: &str) -> Result<Self> {
        let bits = s.strip_prefix("0.").ok_or_else(|| {
            Error::Param(format!("expected a binary fraction `0.xxx`, got {s:?}"))
        })?;
        let frac_bits = u32::try_from(bits.len()).map_err(|_| Error::FracBits(u32::MAX))?;
        if frac_bits == 0 || frac_bits > MAX_FRAC_BITS {
            return Err(Error::FracBits(frac_bits));
        }
        let mut numerator = 0u128;
        for c in bits.chars() {
            let bit = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::Param(format!("invalid binary digit {c:?} in {s:?}"))),
            };
            numerator = (numerator << 1) | bit;
        }
        Self::new(numerator, frac_bits)
    }

    /// Converts an `f64` that is exactly representable on the `2^-frac_bits` grid.
    pub fn from_f64_exact(v: f64, frac_bits: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::Param(format!("{v} is outside [0,1)")));
        }
        if frac_bits == 0 || frac_bits > 64 {
            return Err(Error::FracBits(frac_bits));
        }
        let scaled = v * 2f64.powi(frac_bits as i32);
        if scaled.fract() != 0.0 {
            return Err(Error::Param(format!(
                "{v} is not representable with {frac_bits} fractional bits"
            )));
        }
        Self::new(scaled as u128, frac_bits)
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 * 2f64.powi(-(self.frac_bits as i32))
    }

    /// Re-expresses the value with more fractional bits. Never rounds.
    pub fn widen(&self, frac_bits: u32) -> Result<Self> {
        if frac_bits < self.frac_bits {
            return Err(Error::Param(format!(
                "cannot narrow {} fractional bits to {frac_bits}",
                self.frac_bits
            )));
        }
        Self::new(self.numerator << (frac_bits - self.frac_bits), frac_bits)
    }

    /// `|self - other|`, exact, on the finer of the two grids.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let bits = self.frac_bits.max(other.frac_bits);
        let a = self.numerator << (bits - self.frac_bits);
        let b = other.numerator << (bits - other.frac_bits);
        Self {
            numerator: a.abs_diff(b),
            frac_bits: bits,
        }
    }

    /// `true` iff `self <= 2^-exp`.
    pub fn le_pow2_neg(&self, exp: u32) -> bool {
        if exp >= self.frac_bits {
            // 2^-exp is at or below one ulp of this grid
            let shift = exp - self.frac_bits;
            return match self.numerator {
                0 => true,
                1 => shift == 0,
                _ => false,
            };
        }
        self.numerator <= 1u128 << (self.frac_bits - exp)
    }

    /// The lowest-terms ratio `num/den` as a string; denominators are powers of two.
    pub fn ratio_string(&self) -> String {
        if self.numerator == 0 {
            return "0/1".to_string();
        }
        let tz = self.numerator.trailing_zeros().min(self.frac_bits);
        let num = self.numerator >> tz;
        let den_bits = self.frac_bits - tz;
        if den_bits == 128 {
            format!("{num}/340282366920938463463374607431768211456")
        } else {
            format!("{num}/{}", 1u128 << den_bits)
        }
    }

    /// `0.` followed by exactly `frac_bits` binary digits.
    pub fn to_binary_string(&self) -> String {
        let mut s = String::with_capacity(self.frac_bits as usize + 2);
        s.push_str("0.");
        for i in (0..self.frac_bits).rev() {
            s.push(if (self.numerator >> i) & 1 == 1 {
                '1'
            } else {
                '0'
            });
        }
        s
    }

    /// Exact decimal expansion (every dyadic fraction terminates).
    pub fn to_decimal_string(&self) -> String {
        if self.numerator == 0 {
            return "0".to_string();
        }
        let tz = self.numerator.trailing_zeros();
        let mut r = self.numerator >> tz;
        let bits = self.frac_bits - tz;
        if bits > 124 {
            // r * 10 would overflow u128
            return format!("{}", self.to_f64());
        }
        let mask = (1u128 << bits) - 1;
        let mut s = String::from("0.");
        while r != 0 {
            r *= 10;
            s.push(char::from(b'0' + (r >> bits) as u8));
            r &= mask;
        }
        s
    }
}

impl PartialEq for FixedPointValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FixedPointValue {}

impl PartialOrd for FixedPointValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FixedPointValue {
    fn cmp(&self, other: &Self) -> Ordering {
        let bits = self.frac_bits.max(other.frac_bits);
        let a = self.numerator << (bits - self.frac_bits);
        let b = other.numerator << (bits - other.frac_bits);
        a.cmp(&b)
    }
}

impl fmt::Display for FixedPointValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

/// `k` radix-`2^m` digits, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    digits: Vec<u32>,
    m: u32,
}

fn check_geometry(m: u32, k: usize) -> Result<()> {
    if m == 0 || m > MAX_DIGIT_BITS || k == 0 || (k as u64) * (m as u64) > MAX_FRAC_BITS as u64 {
        return Err(Error::Geometry { m, k });
    }
    Ok(())
}

impl DigitVector {
    pub fn new(digits: Vec<u32>, m: u32) -> Result<Self> {
        check_geometry(m, digits.len())?;
        for (index, &digit) in digits.iter().enumerate() {
            if digit >> m != 0 {
                return Err(Error::Digit { index, digit, m });
            }
        }
        Ok(Self { digits, m })
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.digits.len()
    }

    /// Digit values scaled into `[0,1)`, i.e. `digit * 2^-m`.
    pub fn normalized(&self) -> Vec<f64> {
        let scale = 2f64.powi(-(self.m as i32));
        self.digits.iter().map(|&d| d as f64 * scale).collect()
    }
}

/// Splits `v` into `k` digits of `m` bits; digit 0 holds the most significant bits.
pub fn decompose(v: &FixedPointValue, m: u32, k: usize) -> Result<DigitVector> {
    check_geometry(m, k)?;
    let total = k as u32 * m;
    if total < v.frac_bits {
        return Err(Error::Truncation {
            m,
            k,
            frac_bits: v.frac_bits,
        });
    }
    let aligned = v.numerator << (total - v.frac_bits);
    let mask = (1u128 << m) - 1;
    let digits = (0..k)
        .map(|j| ((aligned >> ((k - 1 - j) as u32 * m)) & mask) as u32)
        .collect();
    Ok(DigitVector { digits, m })
}

pub fn recompose(d: &DigitVector) -> FixedPointValue {
    let numerator = d
        .digits
        .iter()
        .fold(0u128, |acc, &digit| (acc << d.m) | digit as u128);
    FixedPointValue {
        numerator,
        frac_bits: d.k() as u32 * d.m,
    }
}

/// Column sums `Z_j = sum_{p+q=j} X_p Y_q` in integer units of `2^-2m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSumsExact {
    values: Vec<u64>,
    m: u32,
    k: usize,
}

/// Number of digit products that land in slot `j` of a `k`-digit product.
pub fn terms_in_slot(j: usize, k: usize) -> usize {
    (j + 1).min(k).min(2 * k - 1 - j)
}

impl PartialSumsExact {
    pub fn new(values: Vec<u64>, m: u32, k: usize) -> Result<Self> {
        check_geometry(m, k)?;
        if values.len() != 2 * k - 1 {
            return Err(Error::Dimension {
                expected: 2 * k - 1,
                actual: values.len(),
            });
        }
        let dmax = (1u64 << m) - 1;
        for (j, &v) in values.iter().enumerate() {
            if v > terms_in_slot(j, k) as u64 * dmax * dmax {
                return Err(Error::Param(format!(
                    "partial sum {v} at slot {j} exceeds the slot cap"
                )));
            }
        }
        Ok(Self { values, m, k })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Values as reals, `values[j] * 2^-2m`.
    pub fn normalized(&self) -> Vec<f64> {
        let grid = 2f64.powi(-2 * self.m as i32);
        self.values.iter().map(|&v| v as f64 * grid).collect()
    }
}

pub fn partial_sums_exact(xd: &DigitVector, yd: &DigitVector) -> Result<PartialSumsExact> {
    if xd.m != yd.m || xd.k() != yd.k() {
        return Err(Error::Mismatch {
            m_a: xd.m,
            k_a: xd.k(),
            m_b: yd.m,
            k_b: yd.k(),
        });
    }
    let k = xd.k();
    let mut values = vec![0u64; 2 * k - 1];
    for (p, &xp) in xd.digits.iter().enumerate() {
        for (q, &yq) in yd.digits.iter().enumerate() {
            values[p + q] += xp as u64 * yq as u64;
        }
    }
    Ok(PartialSumsExact { values, m: xd.m, k })
}

/// Reference product: integer multiply of numerators.
pub fn exact_product(x: &FixedPointValue, y: &FixedPointValue) -> Result<FixedPointValue> {
    let frac_bits = x.frac_bits + y.frac_bits;
    if frac_bits > MAX_FRAC_BITS {
        return Err(Error::FracBits(frac_bits));
    }
    let numerator = x
        .numerator
        .checked_mul(y.numerator)
        .expect("product of values below 2^a and 2^b fits in a+b <= 128 bits");
    FixedPointValue::new(numerator, frac_bits)
}

/// `sum_j Z_j * 2^-2m * 2^-jm` on the `2^-2km` grid.
pub fn assemble_from_partials(zs: &PartialSumsExact) -> FixedPointValue {
    let (m, k) = (zs.m, zs.k);
    let numerator = zs.values.iter().enumerate().fold(0u128, |acc, (j, &v)| {
        let shift = (2 * k - 2 - j) as u32 * m;
        acc.checked_add((v as u128) << shift)
            .expect("capped partial sums assemble below 2^(2km)")
    });
    FixedPointValue {
        numerator,
        frac_bits: 2 * k as u32 * m,
    }
}
