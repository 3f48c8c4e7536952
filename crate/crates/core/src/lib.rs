//! Simulator for a noise-tolerant crossbar multiplier.
//!
//! Operands in `[0,1)` are cut into `k` digits of `m` bits. One operand's
//! digits are programmed into a banded memristor crossbar, the other's drive
//! its rows, and each column current is one partial sum of the digit
//! convolution. A chain of ADC/DAC cells rounds those noisy sums back onto
//! their exact grid and ripples the carries, recovering the full `2km`-bit
//! product as long as each column's accumulated noise stays below half a
//! grid step.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod fixedpoint;
pub mod harness;

pub use error::{Error, Result};
