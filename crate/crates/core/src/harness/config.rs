//! Simulation settings and the flat `key = value` config file.
//!
//! ```text
//! # 16-bit sweep
//! m = 1
//! k = 16
//! write_noise = 2^-8
//! input_noise = 2^-8
//! noise_kind = uniform
//! trials = 10000
//! seed = 1
//! ```
//!
//! Noise magnitudes are normalized conductance/amplitude units and may be
//! written as `2^-8` or as plain decimals.

use std::path::Path;

use crate::chain::AdcConfig;
use crate::crossbar::{NoiseKind, NoiseModel, NoiseSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub m: u32,
    pub k: usize,
    pub noise: NoiseModel,
    /// ADC width override; `None` uses the minimal width for `(m, k)`.
    pub adc_bits: Option<u32>,
    pub trials: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(m: u32, k: usize) -> Self {
        Self {
            m,
            k,
            noise: NoiseModel::noiseless(),
            adc_bits: None,
            trials: 1,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Operand width `n = k * m`.
    pub fn n(&self) -> u32 {
        self.k as u32 * self.m
    }

    pub fn adc(&self) -> Result<AdcConfig> {
        match self.adc_bits {
            Some(bits) => AdcConfig::new(bits, self.m, self.k),
            None => Ok(AdcConfig::minimal(self.m, self.k)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m > 16 || self.k == 0 {
            return Err(Error::Config(format!(
                "need 1 <= m <= 16 and k >= 1 (got m={}, k={})",
                self.m, self.k
            )));
        }
        if self.n() > 64 {
            return Err(Error::Config(format!(
                "operand width n = k*m = {} exceeds 64 bits",
                self.n()
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.noise
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.adc().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Parses `2^-8`, `2^3`, or a plain decimal.
pub fn parse_magnitude(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = if let Some(exp) = s.strip_prefix("2^") {
        let exp: i32 = exp
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad exponent in {s:?}")))?;
        2f64.powi(exp)
    } else {
        s.parse::<f64>()
            .map_err(|_| Error::Config(format!("not a number: {s:?}")))?
    };
    if !value.is_finite() || value < 0.0 {
        return Err(Error::Config(format!(
            "magnitude must be finite and >= 0: {s:?}"
        )));
    }
    Ok(value)
}

/// Values read from a config file; every field is optional so command-line
/// flags can fill or override them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub k: Option<usize>,
    pub write_noise: Option<f64>,
    pub input_noise: Option<f64>,
    pub chain_noise: Option<f64>,
    pub dac_noise: Option<f64>,
    pub noise_kind: Option<NoiseKind>,
    pub adc_bits: Option<u32>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: expected an integer, got {v:?}")))
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => cfg.n = Some(parse_int(key, value)?),
                "m" => cfg.m = Some(parse_int(key, value)?),
                "k" => cfg.k = Some(parse_int(key, value)?),
                "write_noise" => cfg.write_noise = Some(parse_magnitude(value)?),
                "input_noise" => cfg.input_noise = Some(parse_magnitude(value)?),
                "chain_noise" => cfg.chain_noise = Some(parse_magnitude(value)?),
                "dac_noise" => cfg.dac_noise = Some(parse_magnitude(value)?),
                "noise_kind" => {
                    cfg.noise_kind = Some(
                        value
                            .parse()
                            .map_err(|e: Error| Error::Config(e.to_string()))?,
                    )
                }
                "adc_bits" => cfg.adc_bits = Some(parse_int(key, value)?),
                "trials" => cfg.trials = Some(parse_int(key, value)?),
                "seed" => cfg.seed = Some(parse_int(key, value)?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: Self) -> Self {
        Self {
            n: other.n.or(self.n),
            m: other.m.or(self.m),
            k: other.k.or(self.k),
            write_noise: other.write_noise.or(self.write_noise),
            input_noise: other.input_noise.or(self.input_noise),
            chain_noise: other.chain_noise.or(self.chain_noise),
            dac_noise: other.dac_noise.or(self.dac_noise),
            noise_kind: other.noise_kind.or(self.noise_kind),
            adc_bits: other.adc_bits.or(self.adc_bits),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
        }
    }

    /// Resolves to a validated configuration. `m` defaults to 1; `k` is
    /// derived from `n` when only `n` is given; `n`, if given, must equal `k*m`.
    pub fn resolve(&self) -> Result<SimulationConfig> {
        let m = self.m.unwrap_or(1);
        let k = match (self.k, self.n) {
            (Some(k), _) => k,
            (None, Some(n)) => {
                if m == 0 || n % m != 0 {
                    return Err(Error::Config(format!("n={n} is not a multiple of m={m}")));
                }
                (n / m) as usize
            }
            (None, None) => return Err(Error::Config("one of n or k is required".into())),
        };
        if let Some(n) = self.n {
            if n as u64 != k as u64 * m as u64 {
                return Err(Error::Config(format!("n={n} must equal k*m = {k}*{m}")));
            }
        }
        let seed = self
            .seed
            .ok_or_else(|| Error::Config("a seed is required".into()))?;
        let kind = self.noise_kind.unwrap_or_default();
        let spec = |mag: Option<f64>| NoiseSpec {
            kind,
            magnitude: mag.unwrap_or(0.0),
        };
        let cfg = SimulationConfig {
            m,
            k,
            noise: NoiseModel {
                write: spec(self.write_noise),
                input: spec(self.input_noise),
                chain: spec(self.chain_noise),
                dac: spec(self.dac_noise),
            },
            adc_bits: self.adc_bits,
            trials: self.trials.unwrap_or(1),
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
