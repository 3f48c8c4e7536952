use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("numerator {numerator} does not fit in {frac_bits} fractional bits (value must lie in [0,1))")]
    OutOfRange { numerator: u128, frac_bits: u32 },

    #[error("fractional bit count {0} is outside 1..=128")]
    FracBits(u32),

    #[error("{k} digits of {m} bits cannot hold a {frac_bits}-bit value without truncation")]
    Truncation { m: u32, k: usize, frac_bits: u32 },

    #[error("invalid digit geometry: m={m}, k={k}")]
    Geometry { m: u32, k: usize },

    #[error("digit {digit} at index {index} does not fit in {m} bits")]
    Digit { index: usize, digit: u32, m: u32 },

    #[error("digit vectors disagree: (m={m_a}, k={k_a}) vs (m={m_b}, k={k_b})")]
    Mismatch {
        m_a: u32,
        k_a: usize,
        m_b: u32,
        k_b: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("conductance {value} at ({row}, {col}) is outside [0,1]")]
    Conductance { row: usize, col: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("ADC saturated{}: input {input} is outside the representable range", fmt_slot(*slot))]
    Saturation { slot: Option<usize>, input: f64 },

    #[error("carry overflow{}: carry {carry} needs more than {carry_bits} bits", fmt_slot(*slot))]
    Overflow {
        slot: Option<usize>,
        carry: u64,
        carry_bits: u32,
    },

    #[error("config: {0}")]
    Config(String),
}

fn fmt_slot(slot: Option<usize>) -> String {
    slot.map(|s| format!(" at slot {s}")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;
