//! Banded crossbar layout for digit-sliced multiplication and the noisy
//! analog multiply-accumulate read.
//!
//! Row `i` is driven by input digit `X_i`. Row `i` stores `Y_1..Y_k` in
//! columns `i..i+k-1`, so column `c` collects every `X_p * Y_q` with
//! `p + q = c` (0-based). All other cross-points are left open.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fixedpoint::{terms_in_slot, DigitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    /// `eps ~ U[-magnitude, magnitude]`; never exceeds the magnitude.
    #[default]
    UniformBounded,
    /// `eps ~ N(0, magnitude^2)`.
    Gaussian,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform-bounded" => Ok(Self::UniformBounded),
            "gaussian" | "normal" => Ok(Self::Gaussian),
            _ => Err(Error::Param(format!("unknown noise kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub magnitude: f64,
}

impl NoiseSpec {
    pub const NONE: Self = Self {
        kind: NoiseKind::UniformBounded,
        magnitude: 0.0,
    };

    pub fn uniform(magnitude: f64) -> Self {
        Self {
            kind: NoiseKind::UniformBounded,
            magnitude,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            magnitude: sigma,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude == 0.0
    }

    /// One perturbation. Zero-magnitude specs consume no randomness.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        match self.kind {
            NoiseKind::UniformBounded => rng.random_range(-self.magnitude..=self.magnitude),
            NoiseKind::Gaussian => Normal::new(0.0, self.magnitude)
                .expect("validated non-negative sigma")
                .sample(rng),
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.magnitude >= 0.0) || !self.magnitude.is_finite() {
            return Err(Error::Param(format!(
                "{what} noise magnitude must be finite and >= 0, got {}",
                self.magnitude
            )));
        }
        Ok(())
    }
}

/// Perturbation sources along the whole datapath.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseModel {
    /// Programmed conductances.
    pub write: NoiseSpec,
    /// Input signal amplitudes, drawn once per read.
    pub input: NoiseSpec,
    /// Summing conductances (`1` and `2^-m`) inside each chain cell.
    pub chain: NoiseSpec,
    /// Carry voltage re-emitted by each cell's DAC; ideal when zero.
    pub dac: NoiseSpec,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn uniform(write: f64, input: f64) -> Self {
        Self {
            write: NoiseSpec::uniform(write),
            input: NoiseSpec::uniform(input),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.write.validate("write")?;
        self.input.validate("input")?;
        self.chain.validate("chain")?;
        self.dac.validate("dac")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// No device at this cross-point; carries no current and takes no write noise.
    Open,
    Programmed(f64),
}

impl Cell {
    pub fn value(&self) -> f64 {
        match *self {
            Cell::Open => 0.0,
            Cell::Programmed(g) => g,
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Cell::Open)
    }
}

/// Row-major grid of normalized conductances; rows are inputs, columns outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Cell>,
}

impl ConductanceMatrix {
    pub fn new(rows: usize, cols: usize, cells: Vec<Cell>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Param(
                "conductance matrix needs at least one row and column".into(),
            ));
        }
        if cells.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: cells.len(),
            });
        }
        for (idx, cell) in cells.iter().enumerate() {
            if let Cell::Programmed(g) = *cell {
                if !(0.0..=1.0).contains(&g) {
                    return Err(Error::Conductance {
                        row: idx / cols,
                        col: idx % cols,
                        value: g,
                    });
                }
            }
        }
        Ok(Self { rows, cols, cells })
    }

    /// Fully programmed matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Param("ragged rows".into()));
        }
        let cells = rows
            .iter()
            .flatten()
            .map(|&g| Cell::Programmed(g))
            .collect();
        Self::new(rows.len(), cols, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.cols + col]
    }

    /// Whether every non-open cell of row `i` sits in columns `i..i+rows-1`.
    pub fn is_banded(&self) -> bool {
        (0..self.rows).all(|i| {
            (0..self.cols).all(|c| (i..i + self.rows).contains(&c) || self.cell(i, c).is_open())
        })
    }

    /// Applies `eps(row, col)` to every programmed cell and clips to `[0,1]`.
    /// Open cells are left alone and never queried.
    pub fn perturbed(&self, mut eps: impl FnMut(usize, usize) -> f64) -> Self {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(idx, cell)| match *cell {
                Cell::Open => Cell::Open,
                Cell::Programmed(g) => {
                    Cell::Programmed((g + eps(idx / self.cols, idx % self.cols)).clamp(0.0, 1.0))
                }
            })
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            cells,
        }
    }
}

impl std::fmt::Display for ConductanceMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c > 0 {
                    f.write_str(" ")?;
                }
                match self.cell(r, c) {
                    Cell::Open => write!(f, "{:>7}", ".")?,
                    Cell::Programmed(g) => write!(f, "{g:>7.4}")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Noisy column readouts `Z~_j`, in the same units as the normalized digits.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumsAnalog {
    values: Vec<f64>,
    m: u32,
    k: usize,
}

impl PartialSumsAnalog {
    pub fn new(values: Vec<f64>, m: u32, k: usize) -> Result<Self> {
        if k == 0 || values.len() != 2 * k - 1 {
            return Err(Error::Dimension {
                expected: (2 * k).saturating_sub(1),
                actual: values.len(),
            });
        }
        Ok(Self { values, m, k })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Adds a fixed offset to each column (op-amp offset sensitivity studies).
    pub fn with_column_offsets(mut self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.values.len() {
            return Err(Error::Dimension {
                expected: self.values.len(),
                actual: offsets.len(),
            });
        }
        for (v, o) in self.values.iter_mut().zip(offsets) {
            *v += o;
        }
        Ok(self)
    }
}

/// Places the normalized `y` digits on the `k x (2k-1)` band.
pub fn build_multiplier_layout(yd: &DigitVector) -> ConductanceMatrix {
    let k = yd.k();
    let cols = 2 * k - 1;
    let ys = yd.normalized();
    let mut cells = vec![Cell::Open; k * cols];
    for i in 0..k {
        for (q, &y) in ys.iter().enumerate() {
            cells[i * cols + i + q] = Cell::Programmed(y);
        }
    }
    ConductanceMatrix {
        rows: k,
        cols,
        cells,
    }
}

/// Programs every device with an independent write-noise draw, row-major.
pub fn program_array<R: Rng + ?Sized>(
    ideal: &ConductanceMatrix,
    noise: &NoiseModel,
    rng: &mut R,
) -> ConductanceMatrix {
    ideal.perturbed(|_, _| noise.write.sample(rng))
}

/// Matrix-vector product with explicit per-input perturbations.
pub fn mac_with_input_offsets(
    g: &ConductanceMatrix,
    x: &[f64],
    input_eps: &[f64],
) -> Result<Vec<f64>> {
    if x.len() != g.rows {
        return Err(Error::Dimension {
            expected: g.rows,
            actual: x.len(),
        });
    }
    if input_eps.len() != g.rows {
        return Err(Error::Dimension {
            expected: g.rows,
            actual: input_eps.len(),
        });
    }
    let mut out = vec![0.0; g.cols];
    for (r, (&xi, &ei)) in x.iter().zip(input_eps).enumerate() {
        let drive = xi + ei;
        for (c, acc) in out.iter_mut().enumerate() {
            if let Cell::Programmed(gv) = g.cell(r, c) {
                *acc += drive * gv;
            }
        }
    }
    Ok(out)
}

/// `out[c] = sum_i (x_i + eps_i) * g[i][c]` with one input draw per row.
pub fn general_mac<R: Rng + ?Sized>(
    g: &ConductanceMatrix,
    x: &[f64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if x.len() != g.rows {
        return Err(Error::Dimension {
            expected: g.rows,
            actual: x.len(),
        });
    }
    let eps: Vec<f64> = (0..g.rows).map(|_| noise.input.sample(rng)).collect();
    mac_with_input_offsets(g, x, &eps)
}

fn check_layout(g: &ConductanceMatrix) -> Result<()> {
    if g.cols != 2 * g.rows - 1 {
        return Err(Error::Dimension {
            expected: 2 * g.rows - 1,
            actual: g.cols,
        });
    }
    if !g.is_banded() {
        return Err(Error::Param("conductance matrix is not banded".into()));
    }
    Ok(())
}

/// Column readout of a multiplier layout with explicit input perturbations.
pub fn analog_mac_with_offsets(
    g: &ConductanceMatrix,
    x_inputs: &[f64],
    input_eps: &[f64],
    m: u32,
) -> Result<PartialSumsAnalog> {
    check_layout(g)?;
    let values = mac_with_input_offsets(g, x_inputs, input_eps)?;
    PartialSumsAnalog::new(values, m, g.rows)
}

/// Column readout of a multiplier layout; inputs are perturbed by `noise.input`.
pub fn analog_mac<R: Rng + ?Sized>(
    g: &ConductanceMatrix,
    x_inputs: &[f64],
    m: u32,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<PartialSumsAnalog> {
    check_layout(g)?;
    let values = general_mac(g, x_inputs, noise, rng)?;
    PartialSumsAnalog::new(values, m, g.rows)
}

/// Worst-case `|Z~_j - Z_j|` under bounded write/input noise.
pub fn readout_error_bound(j: usize, k: usize, write: f64, input: f64) -> f64 {
    terms_in_slot(j, k) as f64 * (write + input + write * input)
}
